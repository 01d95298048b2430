"""Per-technology conversion of raw measurements into real stream matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import dsp
from .trace import RawTrace, StreamMatrix, Tech

DB_FLOOR = -120.0
CIR_TAPS = 20
CIR_UPSAMPLE = 16
CIR_MAX_LAG = 80
CSI_STREAMS = 456
SUB_DECIMATION = 30
CSI_MEDIAN_S = 0.7
SUB_MEDIAN_S = 0.45


@dataclass
class CirAlignState:
    """Running reference CIR used for lag and phase correction.

    Owned by one trace at a time; the reference update order matters.
    """

    ewma_alpha: float = 0.05
    n_up: int = CIR_UPSAMPLE
    max_lag: int = CIR_MAX_LAG
    reference: Optional[np.ndarray] = None

    def __post_init__(self):
        if not 0 < self.ewma_alpha < 1:
            raise ValueError("ewma_alpha must lie in (0, 1)")

    @property
    def initialized(self) -> bool:
        return self.reference is not None

    def align(self, x_up: np.ndarray):
        """Align one upsampled CIR to the reference; returns (x_adj, lag, theta)."""
        if self.reference is None:
            # canonical phase: strongest tap real-positive, so y does not depend
            # on the arbitrary carrier phase of the first packet
            k = int(np.argmax(np.abs(x_up)))
            x_adj = x_up * np.exp(-1j * np.angle(x_up[k])) if x_up[k] != 0 else x_up.copy()
            self.reference = x_adj.copy()
            return x_adj, 0, 0.0
        lag = dsp.xcorr_lag(np.abs(x_up), np.abs(self.reference), self.max_lag)
        x_no = dsp.shift_zero_fill(x_up, lag)
        theta = dsp.optimal_rotation(self.reference, x_no)
        x_adj = np.exp(1j * theta) * x_no
        self.reference = (1 - self.ewma_alpha) * self.reference + self.ewma_alpha * x_adj
        return x_adj, lag, theta


@dataclass(frozen=True)
class PreprocessOutput:
    y: StreamMatrix

    @property
    def effective_fs(self) -> float:
        return self.y.fs


def _to_db(power_like: np.ndarray, scale: float) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        db = scale * np.log10(power_like)
    return np.where(power_like > 0, db, DB_FLOOR)


def _require(raw: RawTrace, tech: Tech, streams: int):
    if raw.profile.tech is not tech:
        raise ValueError(f"expected a {tech.value} trace, got {raw.profile.tech.value}")
    if raw.profile.stream_count != streams:
        raise ValueError(f"{tech.value} trace must carry {streams} streams, got {raw.profile.stream_count}")


def preprocess_cir(raw: RawTrace, state: Optional[CirAlignState] = None) -> PreprocessOutput:
    """Upsample, lag-correct and phase-rotate each CIR; output the tap phases."""
    _require(raw, Tech.CIR, CIR_TAPS)
    raw = raw.normalized()
    state = CirAlignState() if state is None else state
    x_up = dsp.upsample_complex(raw.samples, state.n_up, axis=1)
    y = np.empty((x_up.shape[1], x_up.shape[0]))
    for i, x in enumerate(x_up):
        x_adj, _, _ = state.align(x)
        y[:, i] = np.angle(x_adj)
    y[y <= -np.pi] = np.pi
    return PreprocessOutput(StreamMatrix(raw.t0, raw.profile.fs_nominal, y))


def preprocess_csi(raw: RawTrace) -> PreprocessOutput:
    """Subcarrier magnitudes in dB followed by a 0.7 s median filter."""
    _require(raw, Tech.CSI, CSI_STREAMS)
    raw = raw.normalized()
    mag_db = _to_db(np.abs(raw.samples.T), 20.0)
    m = StreamMatrix(raw.t0, raw.profile.fs_nominal, mag_db)
    return PreprocessOutput(dsp.median_filter(m, CSI_MEDIAN_S))


def preprocess_sub(raw: RawTrace) -> PreprocessOutput:
    """Average 30-sample chunks of linear power, convert to dB, median filter."""
    _require(raw, Tech.SUB, 1)
    raw = raw.normalized()
    p = raw.samples[:, 0].real
    n = p.size // SUB_DECIMATION
    chunk = p[: n * SUB_DECIMATION].reshape(n, SUB_DECIMATION).mean(axis=1)
    m = StreamMatrix(raw.t0, raw.profile.fs_nominal / SUB_DECIMATION, _to_db(chunk, 10.0)[None, :])
    return PreprocessOutput(dsp.median_filter(m, SUB_MEDIAN_S))


def preprocess_rss(raw: RawTrace) -> PreprocessOutput:
    _require(raw, Tech.RSS, 32)
    raw = raw.normalized()
    return PreprocessOutput(StreamMatrix(raw.t0, raw.profile.fs_nominal, raw.samples.T.astype(float)))


def preprocess_poly(raw: RawTrace) -> PreprocessOutput:
    _require(raw, Tech.POLY, 4)
    raw = raw.normalized()
    return PreprocessOutput(StreamMatrix(raw.t0, raw.profile.fs_nominal, raw.samples.T.astype(float)))


def preprocess(raw: RawTrace, state: Optional[CirAlignState] = None) -> PreprocessOutput:
    tech = raw.profile.tech
    if tech is Tech.CIR:
        return preprocess_cir(raw, state)
    return {
        Tech.CSI: preprocess_csi,
        Tech.SUB: preprocess_sub,
        Tech.RSS: preprocess_rss,
        Tech.POLY: preprocess_poly,
    }[tech](raw)
