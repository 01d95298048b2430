"""Motion detectors that veto respiration-rate estimates.

All detectors look at the pre-filter streams of the current 30 s window.
The band filter is causal and delays a burst onset by a few seconds, which
would hide motion that starts just before a tick.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping

import numpy as np

from .dsp import DEFAULT_GRID, FrequencyGrid, band_powers
from .trace import Tech, Window, round_half_up

METHODS = ("mabd", "mvbd", "ave", "fsd", "mavbd")
EPS = 1e-9


@dataclass(frozen=True)
class MotionConfig:
    method: str
    thresholds: Mapping[str, float] = field(default_factory=dict)
    short_window: float = 2.0
    long_window: float = 30.0
    ave_window: float = 30.0

    def __post_init__(self):
        method = self.method.lower()
        object.__setattr__(self, "method", method)
        if method not in METHODS:
            raise ValueError(f"unknown motion method {self.method!r}; expected one of {METHODS}")
        if not 0 < self.short_window < self.long_window:
            raise ValueError("need 0 < short_window < long_window")
        if not self.ave_window > 0:
            raise ValueError("ave_window must be positive")
        th = {k.lower(): float(v) for k, v in dict(self.thresholds).items()}
        for k in self.required():
            if k not in th:
                raise ValueError(f"motion method {method} needs a {k} threshold")
            if not th[k] > 0:
                raise ValueError(f"{k} threshold must be positive")
        if "fsd" in self.required() and not th["fsd"] > 1:
            raise ValueError("fsd threshold must exceed 1")
        object.__setattr__(self, "thresholds", th)

    def required(self) -> tuple:
        return ("mabd", "mvbd") if self.method == "mavbd" else (self.method,)

    @property
    def threshold(self) -> float:
        if self.method == "mavbd":
            raise AttributeError("mavbd combines the mabd and mvbd thresholds")
        return self.thresholds[self.method]


def _rows(w, streams):
    v = w.values if isinstance(w, Window) else np.atleast_2d(w)
    return v if streams is None else v[np.asarray(streams)]


def _tail(v: np.ndarray, seconds: float, fs: float) -> np.ndarray:
    n = min(v.shape[1], max(1, round_half_up(seconds * fs)))
    return v[:, v.shape[1] - n:]


def score_mabd(w: Window, short: float = 2.0, long: float = 30.0, streams=None,
               reduce=np.median) -> float:
    """Largest relative departure of the short moving mean from the long mean.

    Every ``short``-second moving mean inside the trailing ``long`` seconds
    is compared with the mean of that whole span, so a level step anywhere
    in the estimation window is caught. Per-stream ratios are reduced with
    the median: streams whose mean sits near zero (CIR phases) give
    unbounded ratios that would swamp a mean.
    """
    v = _tail(_rows(w, streams), long, w.fs)
    n = min(v.shape[1], max(1, round_half_up(short * w.fs)))
    c = np.cumsum(np.pad(v, ((0, 0), (1, 0))), axis=1)
    sa = (c[:, n:] - c[:, :-n]) / n
    la = v.mean(axis=1)
    dev = np.abs(sa - la[:, None]).max(axis=1)
    return float(reduce(dev / np.maximum(np.abs(la), EPS)))


def score_mvbd(w: Window, short: float = 2.0, long: float = 30.0, streams=None) -> float:
    v = _rows(w, streams)
    sv = _tail(v, short, w.fs).var(axis=1)
    lv = _tail(v, long, w.fs).var(axis=1)
    return float(np.mean(np.abs(sv - lv)))


def score_ave(w: Window, short: float = 2.0, streams=None) -> float:
    v = _rows(w, streams)
    return float(np.mean(_tail(v, short, w.fs).var(axis=1)))


def score_fsd(w: Window, grid: FrequencyGrid = DEFAULT_GRID, streams=None) -> float:
    """Peak-to-average ratio of the stream-averaged band powers.

    Each stream is demeaned first. The peak is compared against the mean of
    the other grid points. A dead window (all powers zero) scores 1.
    """
    v = _rows(w, streams)
    v = v - v.mean(axis=1, keepdims=True)
    p = band_powers(v, w.fs, grid.frequencies).mean(axis=0)
    k = int(np.argmax(p))
    rest = np.delete(p, k)
    if p[k] <= 1e-300:
        return 1.0
    mean_rest = rest.mean() if rest.size else 0.0
    if mean_rest <= 0:
        return float("inf")
    return float(p[k] / mean_rest)


def motion_scores(w: Window, cfg: MotionConfig, streams=None, grid: FrequencyGrid = DEFAULT_GRID) -> dict:
    """Scores needed by ``cfg.method``, keyed by detector name."""
    out = {}
    for k in cfg.required():
        if k == "mabd":
            out[k] = score_mabd(w, cfg.short_window, cfg.long_window, streams)
        elif k == "mvbd":
            out[k] = score_mvbd(w, cfg.short_window, cfg.long_window, streams)
        elif k == "ave":
            out[k] = score_ave(w, cfg.ave_window, streams)
        elif k == "fsd":
            out[k] = score_fsd(w, grid, streams)
    return out


def decide(scores: Mapping[str, float], cfg: MotionConfig) -> bool:
    th = cfg.thresholds

    def hit(k):
        return scores[k] < th[k] if k == "fsd" else scores[k] > th[k]

    if cfg.method == "mavbd":
        return hit("mabd") and hit("mvbd")
    return hit(cfg.method)


def detect_motion(w: Window, cfg: MotionConfig, streams=None, grid: FrequencyGrid = DEFAULT_GRID) -> bool:
    """True when ``cfg.method`` flags motion in the window."""
    return decide(motion_scores(w, cfg, streams, grid), cfg)


def load_motion_defaults(path=None) -> dict:
    """Per-technology detector settings from the shipped JSON (or ``path``)."""
    if path is None:
        text = resources.files("rfresp").joinpath("data/motion_defaults.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return json.loads(text)


def default_motion_config(tech, method: str, path=None) -> MotionConfig:
    table = load_motion_defaults(path)
    entry = table[Tech(tech).value]
    return MotionConfig(method, entry["thresholds"], entry.get("short_window", 2.0),
                        entry.get("long_window", 30.0), entry.get("ave_window", 30.0))
