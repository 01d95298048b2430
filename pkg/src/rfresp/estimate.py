"""Respiration-rate estimation: PSD and inter-breath-interval methods.

``run_pipeline`` chains pre-processing, band filtering, stream selection,
estimation and motion suppression for one trace, producing one estimate
every 5 s once a full 30 s window is available.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import dsp
from .dsp import DEFAULT_GRID, FrequencyGrid
from .motion import MotionConfig, decide, default_motion_config, motion_scores
from .preprocess import CirAlignState, preprocess
from .selection import StreamMask, StreamSelector, csi_rx_groups
from .trace import (RateEstimate, RateSeries, RawTrace, StreamMatrix, Tech,
                    Window, round_half_up)

LP_CUTOFF = 0.4
HP_CUTOFF = 0.1
FILTER_ORDER = 5


@dataclass(frozen=True)
class PipelineConfig:
    tech: Tech
    method: str = "psd"
    stream_select: bool = True
    motion: str = "none"
    window: float = 30.0
    tick: float = 5.0
    grid: FrequencyGrid = DEFAULT_GRID
    motion_config: Optional[MotionConfig] = None
    lp_cutoff: float = LP_CUTOFF
    hp_cutoff: float = HP_CUTOFF
    filter_order: int = FILTER_ORDER
    cir_alpha: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "tech", Tech(self.tech))
        method = self.method.lower()
        if method not in ("psd", "ibi"):
            raise ValueError(f"method must be psd or ibi, got {self.method!r}")
        object.__setattr__(self, "method", method)
        motion = self.motion.lower()
        object.__setattr__(self, "motion", motion)
        if motion != "none":
            mc = self.motion_config
            if mc is None:
                mc = default_motion_config(self.tech, motion)
            elif mc.method != motion:
                raise ValueError(f"motion_config is for {mc.method}, config asks for {motion}")
            object.__setattr__(self, "motion_config", mc)
        if not (self.window > 0 and self.tick > 0):
            raise ValueError("window and tick must be positive")


def filter_band(y: StreamMatrix, cfg: PipelineConfig) -> StreamMatrix:
    """Low-pass then high-pass Butterworth, both causal."""
    lp = dsp.design_butterworth(cfg.filter_order, cfg.lp_cutoff, y.fs, "low")
    hp = dsp.design_butterworth(cfg.filter_order, cfg.hp_cutoff, y.fs, "high")
    return dsp.apply_filter(hp, dsp.apply_filter(lp, y))


def _window_values(w, mask: Optional[StreamMask]):
    v = w.values if isinstance(w, Window) else np.atleast_2d(np.asarray(w, dtype=float))
    if mask is not None:
        v = v[mask.keep]
    return v


def average_psd(w, mask: Optional[StreamMask] = None, grid: FrequencyGrid = DEFAULT_GRID,
                fs: Optional[float] = None) -> np.ndarray:
    fs = w.fs if fs is None else fs
    return dsp.band_powers(_window_values(w, mask), fs, grid.frequencies).mean(axis=0)


def estimate_psd(w, mask: Optional[StreamMask] = None, grid: FrequencyGrid = DEFAULT_GRID,
                 fs: Optional[float] = None) -> float:
    """Grid frequency where the stream-averaged periodogram peaks (lowest on ties)."""
    p = average_psd(w, mask, grid, fs)
    return float(grid.frequencies[int(np.argmax(p))])


def estimate_ibi(w, mask: Optional[StreamMask] = None, fs: Optional[float] = None,
                 grid: FrequencyGrid = DEFAULT_GRID, min_prom: float = 0.3) -> Optional[float]:
    """Inverse of the average per-stream mean inter-peak interval.

    Intervals outside [1/f_max, 1/f_min] are discarded; a stream needs two
    valid peaks to contribute. Returns None when nothing contributes.
    """
    fs = w.fs if fs is None else fs
    lo, hi = 1.0 / grid.f_max, 1.0 / grid.f_min
    means = []
    for v in _window_values(w, mask):
        peaks = dsp.find_peaks(v, fs, lo, min_prom)
        if peaks.size < 2:
            continue
        gaps = np.diff(peaks) / fs
        gaps = gaps[(gaps >= lo - 1e-9) & (gaps <= hi + 1e-9)]
        if gaps.size:
            means.append(gaps.mean())
    if not means:
        return None
    return float(1.0 / np.mean(means))


@dataclass
class TickDetail:
    t: float
    mask: StreamMask
    f_raw: Optional[float]
    scores: dict = field(default_factory=dict)
    motion: bool = False


@dataclass
class PipelineResult:
    series: RateSeries
    y: StreamMatrix
    y_filtered: StreamMatrix
    ticks: list


def tick_times(m: StreamMatrix, window: float, tick: float) -> np.ndarray:
    """End times of every full window, the first one ``window`` s after t0."""
    if m.n_samples == 0:
        return np.zeros(0)
    out = []
    k = 0
    while True:
        t = m.t0 + window + k * tick
        if round_half_up((t - m.t0) * m.fs) > m.n_samples - 1:
            break
        out.append(t)
        k += 1
    return np.array(out)


def _selector(raw: RawTrace, cfg: PipelineConfig, n_streams: int) -> StreamSelector:
    groups = None
    if cfg.tech is Tech.CSI:
        groups = csi_rx_groups(raw.stream_labels)
    return StreamSelector(cfg.tech, n_streams, cfg.stream_select, groups)


def run_pipeline_detailed(trace: RawTrace, cfg: PipelineConfig) -> PipelineResult:
    if trace.profile.tech is not cfg.tech:
        raise ValueError(f"trace is {trace.profile.tech.value} but config is for {cfg.tech.value}")
    state = CirAlignState(ewma_alpha=cfg.cir_alpha) if cfg.tech is Tech.CIR else None
    y = preprocess(trace, state).y
    yf = filter_band(y, cfg) if y.n_samples else y
    select = _selector(trace, cfg, y.n_streams)
    mc = cfg.motion_config
    estimates, details = [], []
    for t in tick_times(y, cfg.window, cfg.tick):
        w = Window(y, t, cfg.window)
        wf = Window(yf, t, cfg.window)
        mask = select(dsp.window_variance(w.values))
        if cfg.method == "psd":
            f = estimate_psd(wf, mask, cfg.grid)
        else:
            f = estimate_ibi(wf, mask, grid=cfg.grid)
        scores, moving = {}, False
        if mc is not None:
            scores = motion_scores(w, mc, mask.indices, cfg.grid)
            moving = decide(scores, mc)
        details.append(TickDetail(float(t), mask, f, scores, moving))
        estimates.append(RateEstimate(float(t), None if moving else f, cfg.method, moving))
    return PipelineResult(RateSeries(tuple(estimates), cfg.tick), y, yf, details)


def run_pipeline(trace: RawTrace, cfg: PipelineConfig) -> RateSeries:
    """Respiration-rate series for one trace; empty if shorter than a window."""
    return run_pipeline_detailed(trace, cfg).series


def ground_truth_rr(poly: RawTrace, grid: FrequencyGrid = DEFAULT_GRID,
                    window: float = 30.0, tick: float = 5.0) -> RateSeries:
    """Reference rate from the four polysomnograph channels (PSD, all channels)."""
    if poly.profile.tech is not Tech.POLY or poly.profile.stream_count != 4:
        raise ValueError("ground truth needs a 4-channel polysomnograph trace")
    cfg = PipelineConfig(Tech.POLY, "psd", stream_select=False, grid=grid, window=window, tick=tick)
    return run_pipeline(poly, cfg)
