"""Motion-threshold calibration on synthetic traces with known bursts.

A tick counts as a burst tick when its estimation window overlaps a burst.
Thresholds are set so each detector flags a target share of all ticks on a
calibration set; the acceptance check then runs on different seeds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .estimate import PipelineConfig, run_pipeline_detailed
from .motion import MotionConfig, decide, score_ave, score_fsd, score_mabd, score_mvbd
from .synth import periodic_bursts, random_scenario, synth_trace
from .trace import Tech, Window, profile_for

DETECTORS = ("mabd", "mvbd", "ave", "fsd")
TARGET_RATE = 0.11


@dataclass
class TickScores:
    """Per-tick detector scores for one trace plus the burst-tick labels."""

    times: np.ndarray
    scores: dict
    burst: np.ndarray


def motion_scenario(seed: int, tech, duration: float = 1200.0):
    """Constant-rate scenario with one 3 to 8 s burst per 5 minutes."""
    tech = Tech(tech)
    return random_scenario(seed, duration=duration,
                           motion_bursts=periodic_bursts(duration, seed),
                           rss_quantization="1db" if tech is Tech.RSS else "none")


def burst_ticks(times, intervals, window: float = 30.0) -> np.ndarray:
    """True for ticks whose window (t - window, t] overlaps any interval."""
    times = np.asarray(times, dtype=float)
    out = np.zeros(times.size, dtype=bool)
    for s, e in intervals:
        out |= (s < times) & (e > times - window)
    return out


def tick_scores(trace, intervals, short: float = 2.0, long: float = 30.0, ave: float = 30.0) -> TickScores:
    """Every detector's score at every tick, on the streams selection keeps."""
    res = run_pipeline_detailed(trace, PipelineConfig(trace.profile.tech))
    scores = {k: [] for k in DETECTORS}
    for d in res.ticks:
        w = Window(res.y, d.t, 30.0)
        idx = d.mask.indices
        scores["mabd"].append(score_mabd(w, short, long, idx))
        scores["mvbd"].append(score_mvbd(w, short, long, idx))
        scores["ave"].append(score_ave(w, ave, idx))
        scores["fsd"].append(score_fsd(w, streams=idx))
    times = np.array([d.t for d in res.ticks])
    return TickScores(times, {k: np.array(v) for k, v in scores.items()}, burst_ticks(times, intervals))


def collect(tech, seeds, duration: float = 1200.0) -> TickScores:
    """Pooled tick scores over synthetic scenarios with the given seeds."""
    parts = []
    for seed in seeds:
        out = synth_trace(profile_for(tech), motion_scenario(seed, tech, duration))
        parts.append(tick_scores(out.trace, out.motion_intervals))
    return TickScores(np.concatenate([p.times for p in parts]),
                      {k: np.concatenate([p.scores[k] for p in parts]) for k in DETECTORS},
                      np.concatenate([p.burst for p in parts]))


def thresholds_for(ts: TickScores, target: float = TARGET_RATE) -> dict:
    """Thresholds that flag a ``target`` share of the pooled ticks."""
    out = {}
    for k in DETECTORS:
        q = target if k == "fsd" else 1.0 - target
        out[k] = float(np.quantile(ts.scores[k], q))
    return out


def flags(ts: TickScores, cfg: MotionConfig) -> np.ndarray:
    """Motion decision at every tick for ``cfg``."""
    n = ts.times.size
    return np.array([decide({k: ts.scores[k][i] for k in cfg.required()}, cfg) for i in range(n)],
                    dtype=bool)


def suppression_and_recall(ts: TickScores, cfg: MotionConfig) -> tuple:
    f = flags(ts, cfg)
    recall = float(f[ts.burst].mean()) if ts.burst.any() else float("nan")
    return float(f.mean()), recall


def write_defaults(table: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(table, fh, indent=2, sort_keys=True)
        fh.write("\n")
