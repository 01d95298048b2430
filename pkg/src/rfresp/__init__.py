"""Respiratory-rate estimation from RF channel measurements."""

from .trace import (PROFILES, AlignedPair, RateEstimate, RateSeries, RawTrace, StreamMatrix,
                    Tech, TechnologyProfile, ValueKind, Window, align_nearest, extract_window,
                    profile_for)
from .dsp import (BiquadCascade, FrequencyGrid, apply_filter, band_power, band_powers,
                  design_butterworth, find_peaks, median_filter, moving_variance,
                  optimal_rotation, upsample_complex, xcorr_lag)
from .preprocess import (CirAlignState, PreprocessOutput, preprocess, preprocess_cir,
                         preprocess_csi, preprocess_rss, preprocess_sub)
from .selection import StreamMask, select_cir, select_csi, select_rss, select_sub
from .estimate import (PipelineConfig, estimate_ibi, estimate_psd, ground_truth_rr,
                       run_pipeline)
from .motion import (MotionConfig, detect_motion, score_ave, score_fsd, score_mabd,
                     score_mvbd)
from .evaluate import (ErrorSample, EvalReport, mann_whitney_u, rr_error, slice_by_intervals,
                       summarize)
from .synth import SynthScenario, synth_trace

__version__ = "0.1.0"
