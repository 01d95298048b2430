"""Trace containers, windows and time alignment.

Everything here is immutable once built: arrays are copied and flagged
read-only so a ``StreamMatrix`` can be shared between pipeline stages.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np


class Tech(str, enum.Enum):
    CIR = "cir"
    CSI = "csi"
    RSS = "rss"
    SUB = "sub"
    POLY = "poly"


class ValueKind(str, enum.Enum):
    COMPLEX = "complex"
    REAL = "real"
    INTEGER = "integer"


@dataclass(frozen=True)
class TechnologyProfile:
    tech: Tech
    fs_nominal: float
    stream_count: int
    value_kind: ValueKind

    def __post_init__(self):
        object.__setattr__(self, "tech", Tech(self.tech))
        object.__setattr__(self, "value_kind", ValueKind(self.value_kind))
        if not self.fs_nominal > 0:
            raise ValueError(f"fs_nominal must be positive, got {self.fs_nominal}")
        if int(self.stream_count) < 1:
            raise ValueError(f"stream_count must be >= 1, got {self.stream_count}")
        object.__setattr__(self, "stream_count", int(self.stream_count))


PROFILES = {
    Tech.CIR: TechnologyProfile(Tech.CIR, 18.9, 20, ValueKind.COMPLEX),
    Tech.CSI: TechnologyProfile(Tech.CSI, 9.9, 456, ValueKind.COMPLEX),
    Tech.RSS: TechnologyProfile(Tech.RSS, 4.5, 32, ValueKind.INTEGER),
    Tech.SUB: TechnologyProfile(Tech.SUB, 487.5, 1, ValueKind.REAL),
    Tech.POLY: TechnologyProfile(Tech.POLY, 25.0, 4, ValueKind.REAL),
}


def profile_for(tech) -> TechnologyProfile:
    """Canonical profile for a technology name or ``Tech`` member."""
    return PROFILES[Tech(tech)]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def round_half_up(x: float) -> int:
    # Python's round() is half-to-even; sample counts like 30 * 16.25 must round up
    return int(math.floor(x + 0.5))


@dataclass(frozen=True, eq=False)
class RawTrace:
    """Timestamped multi-stream measurements of one technology.

    ``samples`` has shape (n_samples, stream_count); complex for CIR/CSI.
    """

    profile: TechnologyProfile
    timestamps: np.ndarray
    samples: np.ndarray
    stream_labels: Optional[tuple] = None

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=float).reshape(-1)
        dtype = complex if self.profile.value_kind is ValueKind.COMPLEX else float
        x = np.asarray(self.samples, dtype=dtype)
        if x.ndim == 1:
            x = x.reshape(-1, 1) if self.profile.stream_count == 1 else x.reshape(1, -1)
        if x.size == 0:
            x = x.reshape(0, self.profile.stream_count)
        if x.shape[1] != self.profile.stream_count:
            raise ValueError(
                f"{self.profile.tech.value} trace needs {self.profile.stream_count} "
                f"values per sample, got {x.shape[1]}")
        if x.shape[0] != ts.size:
            raise ValueError(f"{ts.size} timestamps but {x.shape[0]} samples")
        if ts.size > 1 and np.any(np.diff(ts) < 0):
            raise ValueError("timestamps must be nondecreasing")
        if self.stream_labels is not None:
            labels = tuple(str(s) for s in self.stream_labels)
            if len(labels) != self.profile.stream_count:
                raise ValueError("stream_labels length must equal stream_count")
            object.__setattr__(self, "stream_labels", labels)
        object.__setattr__(self, "timestamps", _frozen(ts))
        object.__setattr__(self, "samples", _frozen(x))

    def __len__(self):
        return self.timestamps.size

    @property
    def t0(self) -> float:
        return float(self.timestamps[0]) if len(self) else 0.0

    @property
    def duration(self) -> float:
        if len(self) == 0:
            return 0.0
        return float(self.timestamps[-1] - self.timestamps[0]) + 1.0 / self.profile.fs_nominal

    def is_regular(self, rtol: float = 1e-9) -> bool:
        if len(self) < 2:
            return True
        expected = self.t0 + np.arange(len(self)) / self.profile.fs_nominal
        return bool(np.allclose(self.timestamps, expected, rtol=0, atol=rtol * max(1.0, abs(self.t0)) + 1e-9))

    def normalized(self) -> "RawTrace":
        """Snap samples onto the nominal sampling grid.

        Each sample goes to its nearest grid slot (the sample closest to the
        slot centre wins a collision) and empty slots hold the previous value.
        """
        if len(self) == 0 or self.is_regular():
            return self
        fs = self.profile.fs_nominal
        t0 = self.t0
        pos = (self.timestamps - t0) * fs
        slot = np.floor(pos + 0.5).astype(np.int64)
        n = int(slot[-1]) + 1
        dist = np.abs(pos - slot)
        # stable sort by (slot, distance) so the nearest sample per slot comes first
        order = np.lexsort((dist, slot))
        first = np.ones(order.size, dtype=bool)
        first[1:] = slot[order][1:] != slot[order][:-1]
        chosen = order[first]
        filled = np.full(n, -1, dtype=np.int64)
        filled[slot[chosen]] = chosen
        # hold-last fill; slot 0 always holds the first sample
        idx = np.maximum.accumulate(np.where(filled >= 0, np.arange(n), 0))
        src = filled[idx]
        return RawTrace(self.profile, t0 + np.arange(n) / fs, self.samples[src], self.stream_labels)


@dataclass(frozen=True, eq=False)
class StreamMatrix:
    """Uniformly sampled real streams, shape (streams, samples)."""

    t0: float
    fs: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v.reshape(1, -1)
        if v.ndim != 2:
            raise ValueError("values must be a (streams, samples) matrix")
        if not self.fs > 0:
            raise ValueError("fs must be positive")
        if not np.all(np.isfinite(v)):
            raise ValueError("stream matrix contains non-finite values")
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "fs", float(self.fs))
        object.__setattr__(self, "values", _frozen(v))

    @property
    def n_streams(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n_samples) / self.fs

    @property
    def t_end(self) -> float:
        return self.t0 + (self.n_samples - 1) / self.fs

    def with_values(self, values) -> "StreamMatrix":
        return StreamMatrix(self.t0, self.fs, values)

    def take_streams(self, keep) -> "StreamMatrix":
        return StreamMatrix(self.t0, self.fs, self.values[np.asarray(keep)])


@dataclass(frozen=True, eq=False)
class Window:
    """Trailing ``duration`` seconds of ``source`` ending at ``t_end``."""

    source: StreamMatrix
    t_end: float
    duration: float = 30.0
    start: int = field(init=False)
    stop: int = field(init=False)

    def __post_init__(self):
        m = self.source
        n = round_half_up(self.duration * m.fs)
        if n < 1:
            raise ValueError(f"window of {self.duration} s holds no samples at {m.fs} Hz")
        last = round_half_up((self.t_end - m.t0) * m.fs)
        first = last - n + 1
        if first < 0 or last > m.n_samples - 1:
            raise IndexError(
                f"window ({self.t_end - self.duration:.3f}, {self.t_end:.3f}] s lies outside "
                f"the matrix span [{m.t0:.3f}, {m.t_end:.3f}] s")
        object.__setattr__(self, "start", first)
        object.__setattr__(self, "stop", last + 1)

    @property
    def values(self) -> np.ndarray:
        return self.source.values[:, self.start:self.stop]

    @property
    def fs(self) -> float:
        return self.source.fs

    @property
    def n_samples(self) -> int:
        return self.stop - self.start

    def __len__(self):
        return self.n_samples


def extract_window(m: StreamMatrix, t_end: float, duration: float = 30.0) -> Window:
    return Window(m, t_end, duration)


@dataclass(frozen=True)
class RateEstimate:
    t: float
    f_hat: Optional[float]
    method: str = "psd"
    suppressed_by_motion: bool = False

    @property
    def absent(self) -> bool:
        return self.f_hat is None


@dataclass(frozen=True)
class RateSeries:
    """Time-ordered respiration-rate estimates, one per tick."""

    estimates: tuple = ()
    tick: float = 5.0

    def __post_init__(self):
        est = tuple(self.estimates)
        ts = [e.t for e in est]
        if any(b < a for a, b in zip(ts, ts[1:])):
            raise ValueError("estimates must be time ordered")
        object.__setattr__(self, "estimates", est)

    def __len__(self):
        return len(self.estimates)

    def __iter__(self) -> Iterator[RateEstimate]:
        return iter(self.estimates)

    def __getitem__(self, i):
        return self.estimates[i]

    @property
    def times(self) -> np.ndarray:
        return np.array([e.t for e in self.estimates], dtype=float)

    @property
    def rates(self) -> np.ndarray:
        """Estimates in Hz with NaN where absent."""
        return np.array([np.nan if e.f_hat is None else e.f_hat for e in self.estimates], dtype=float)

    @property
    def suppressed(self) -> np.ndarray:
        return np.array([e.suppressed_by_motion for e in self.estimates], dtype=bool)

    @classmethod
    def from_arrays(cls, times, rates, method="psd", suppressed=None, tick=5.0) -> "RateSeries":
        times = np.asarray(times, dtype=float)
        rates = np.asarray(rates, dtype=float)
        if suppressed is None:
            suppressed = np.zeros(times.size, dtype=bool)
        est = [RateEstimate(float(t), None if np.isnan(f) else float(f), method, bool(s))
               for t, f, s in zip(times, rates, suppressed)]
        return cls(tuple(est), tick)


@dataclass(frozen=True)
class AlignedPair:
    t: float
    f_gt: float
    f_hat: Optional[float]
    t_gt: float

    @property
    def absent(self) -> bool:
        return self.f_hat is None


def align_nearest(est: RateSeries, gt: RateSeries) -> list:
    """Pair every estimate tick with the nearest ground-truth tick.

    Ties go to the earlier ground-truth timestamp. Absent estimates are kept
    (``pair.absent`` is True) so callers can count them.
    """
    if len(est) == 0 or len(gt) == 0:
        raise ValueError("align_nearest needs two nonempty series")
    gt_t = gt.times
    out = []
    for e in est:
        j = int(np.searchsorted(gt_t, e.t, side="left"))
        if j == len(gt_t):
            j -= 1
        elif j > 0 and (e.t - gt_t[j - 1]) <= (gt_t[j] - e.t):
            j -= 1
        g = gt[j]
        out.append(AlignedPair(e.t, g.f_hat, e.f_hat, g.t))
    return out


def sample_times(fs: float, n: int, t0: float = 0.0) -> np.ndarray:
    return t0 + np.arange(n) / fs


def as_matrix(values: Sequence, fs: float, t0: float = 0.0) -> StreamMatrix:
    return StreamMatrix(t0, fs, np.atleast_2d(np.asarray(values, dtype=float)))
