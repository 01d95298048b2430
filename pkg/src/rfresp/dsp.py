"""Numerical kernels shared by the pipeline stages.

All kernels act on a ``StreamMatrix`` row by row (one row per stream) or on
plain vectors. Filter design and sample-domain interpolation lean on
``scipy.signal``; the selection/statistics kernels are numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage, signal

from .trace import StreamMatrix, Window, round_half_up


@dataclass(frozen=True)
class FrequencyGrid:
    f_min: float = 0.1
    f_max: float = 0.4
    f_step: float = 0.002

    def __post_init__(self):
        if not self.f_min < self.f_max:
            raise ValueError("f_min must be below f_max")
        if not self.f_step > 0:
            raise ValueError("f_step must be positive")

    @property
    def frequencies(self) -> np.ndarray:
        n = round_half_up((self.f_max - self.f_min) / self.f_step) + 1
        return self.f_min + self.f_step * np.arange(n)

    def __len__(self):
        return self.frequencies.size


DEFAULT_GRID = FrequencyGrid()


@dataclass(frozen=True, eq=False)
class BiquadCascade:
    """Butterworth filter as second-order sections.

    ``sos`` rows are ``(b0, b1, b2, 1, a1, a2)`` in scipy's layout.
    """

    sos: np.ndarray
    fs: float
    cutoff: float
    kind: str
    order: int

    @property
    def n_sections(self) -> int:
        return self.sos.shape[0]

    def poles(self) -> np.ndarray:
        return np.concatenate([np.roots(s[3:]) for s in self.sos])

    def is_stable(self) -> bool:
        return bool(np.all(np.abs(self.poles()) < 1.0))

    def response(self, freqs) -> np.ndarray:
        """Complex frequency response at ``freqs`` (Hz)."""
        freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
        _, h = signal.sosfreqz(self.sos, worN=freqs, fs=self.fs)
        return h

    def initial_state(self, x0) -> np.ndarray:
        """Section states equal to the steady-state response to constant ``x0``.

        Shape ``(n_sections, len(x0), 2)`` as expected by ``sosfilt`` along
        the last axis.
        """
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        zi = signal.sosfilt_zi(self.sos)
        return zi[:, None, :] * x0[None, :, None]


def design_butterworth(order: int, cutoff: float, fs: float, kind: str = "low") -> BiquadCascade:
    """Digital Butterworth low/high-pass filter.

    Analog prototype mapped with a prewarped bilinear transform, so the
    magnitude at ``cutoff`` is exactly 1/sqrt(2).
    """
    if kind not in ("low", "high"):
        raise ValueError(f"kind must be 'low' or 'high', got {kind!r}")
    if int(order) < 1:
        raise ValueError("order must be >= 1")
    if not 0 < cutoff < fs / 2:
        raise ValueError(f"cutoff {cutoff} Hz must lie in (0, {fs / 2}) for fs={fs} Hz")
    sos = signal.butter(int(order), cutoff, btype=kind, fs=fs, output="sos")
    return BiquadCascade(sos, float(fs), float(cutoff), kind, int(order))


def apply_filter(c: BiquadCascade, m: StreamMatrix) -> StreamMatrix:
    """Causal per-stream filtering starting from the steady state of sample 0."""
    if not math.isclose(c.fs, m.fs, rel_tol=1e-9):
        raise ValueError(f"filter designed for {c.fs} Hz applied to {m.fs} Hz data")
    if m.n_samples == 0:
        return m
    x = m.values
    y, _ = signal.sosfilt(c.sos, x, axis=-1, zi=c.initial_state(x[:, 0]))
    return m.with_values(y)


def median_window_length(window: float, fs: float) -> int:
    n = max(1, round_half_up(window * fs))
    return n + 1 if n % 2 == 0 else n


def median_filter(m: StreamMatrix, window: float) -> StreamMatrix:
    """Centered sliding median with replicate edges; odd window length."""
    if not window > 0:
        raise ValueError("median window must be positive")
    n = median_window_length(window, m.fs)
    if n == 1 or m.n_samples == 0:
        return m
    out = ndimage.median_filter(m.values, size=(1, n), mode="nearest")
    return m.with_values(out)


def moving_variance(m: StreamMatrix, window: float) -> StreamMatrix:
    """Trailing population variance over ``window`` seconds.

    The first ``n - 1`` outputs use every sample seen so far; the very first
    output is 0.
    """
    n = round_half_up(window * m.fs)
    if n < 2:
        raise ValueError("moving variance window must span at least 2 samples")
    x = m.values
    if x.shape[1] == 0:
        return m
    # centering keeps the running-sum formula well conditioned for dB offsets
    xc = x - x.mean(axis=1, keepdims=True)
    zero = np.zeros((x.shape[0], 1))
    s1 = np.concatenate([zero, np.cumsum(xc, axis=1)], axis=1)
    s2 = np.concatenate([zero, np.cumsum(xc * xc, axis=1)], axis=1)
    idx = np.arange(1, x.shape[1] + 1)
    lo = np.maximum(idx - n, 0)
    cnt = (idx - lo).astype(float)
    mean = (s1[:, idx] - s1[:, lo]) / cnt
    var = (s2[:, idx] - s2[:, lo]) / cnt - mean * mean
    return m.with_values(np.maximum(var, 0.0))


def window_variance(values: np.ndarray) -> np.ndarray:
    """Population variance of each row; the moving variance at the last sample."""
    return np.var(values, axis=-1)


def xcorr_lag(a, b, max_lag: int) -> int:
    """Lag in [-max_lag, max_lag] maximizing sum_n a[n] * b[n + lag].

    Positive lag means ``b`` is ``a`` delayed. Ties favour the smallest
    absolute lag, then the negative one.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("xcorr_lag needs two vectors of equal length")
    n = a.size
    max_lag = int(max_lag)
    if not 0 <= max_lag < n:
        raise ValueError("max_lag must lie in [0, len)")
    full = np.correlate(b, a, mode="full")  # full[k + n - 1] = sum a[i] b[i + k]
    # candidates in tie-break order 0, -1, 1, -2, 2, ...; argmax keeps the first
    k = np.arange(1, max_lag + 1)
    order = np.concatenate([[0], np.column_stack([-k, k]).ravel()])
    return int(order[int(np.argmax(full[order + n - 1]))])


def shift_zero_fill(x: np.ndarray, lag: int) -> np.ndarray:
    """Shift right by ``lag`` (left when negative); vacated slots become 0."""
    out = np.zeros_like(x)
    if lag > 0:
        out[lag:] = x[:-lag]
    elif lag < 0:
        out[:lag] = x[-lag:]
    else:
        out[:] = x
    return out


def optimal_rotation(ref, x) -> float:
    """Phase theta in (-pi, pi] minimizing ||ref - exp(j theta) x||."""
    z = np.vdot(np.asarray(x), np.asarray(ref))  # sum ref * conj(x)
    if z == 0:
        return 0.0
    theta = float(np.angle(z))
    return math.pi if theta <= -math.pi else theta


def upsample_complex(x, factor: int, axis: int = -1) -> np.ndarray:
    """Band-limited interpolation by spectral zero padding."""
    factor = int(factor)
    if factor < 1:
        raise ValueError("upsampling factor must be >= 1")
    x = np.asarray(x)
    if factor == 1:
        return x.copy()
    return signal.resample(x, x.shape[axis] * factor, axis=axis)


def band_powers(values: np.ndarray, fs: float, freqs) -> np.ndarray:
    """Periodogram |sum v[n] exp(-j 2 pi f n / fs)|^2 / N per row and frequency.

    Returns shape (streams, len(freqs)).
    """
    v = np.atleast_2d(np.asarray(values, dtype=float))
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    n = v.shape[1]
    if n == 0:
        return np.zeros((v.shape[0], freqs.size))
    cos, sin = _dft_basis(n, float(fs), freqs)
    return ((v @ cos) ** 2 + (v @ sin) ** 2) / n


_BASIS_CACHE: dict = {}


def _dft_basis(n: int, fs: float, freqs: np.ndarray) -> tuple:
    key = (n, fs, freqs.tobytes())
    hit = _BASIS_CACHE.get(key)
    if hit is None:
        if len(_BASIS_CACHE) > 64:
            _BASIS_CACHE.clear()
        arg = 2 * np.pi * np.outer(np.arange(n), freqs) / fs
        hit = _BASIS_CACHE[key] = (np.cos(arg), np.sin(arg))
    return hit


def band_power(w: Window, stream: int, f: float) -> float:
    if not f < w.fs / 2:
        raise ValueError("frequency must be below fs/2")
    return float(band_powers(w.values[stream], w.fs, [f])[0, 0])


def find_peaks(v, fs: float, min_dist: float, min_prom: float) -> np.ndarray:
    """Local maxima with enough prominence, thinned to ``min_dist`` spacing.

    ``min_prom`` is a fraction of the vector's peak-to-peak range. When two
    peaks are closer than ``min_dist`` seconds the higher one is kept.
    """
    if min_dist < 0:
        raise ValueError("min_dist must be nonnegative")
    v = np.asarray(v, dtype=float)
    if v.size < 3:
        return np.zeros(0, dtype=int)
    span = float(np.ptp(v))
    if span == 0:
        return np.zeros(0, dtype=int)
    idx, _ = signal.find_peaks(v, prominence=min_prom * span)
    gap = math.ceil(min_dist * fs - 1e-9)
    if gap <= 1 or idx.size < 2:
        return idx
    keep = np.zeros(idx.size, dtype=bool)
    taken = []
    for i in np.argsort(-v[idx], kind="stable"):
        p = idx[i]
        if all(abs(p - q) >= gap for q in taken):
            taken.append(p)
            keep[i] = True
    return idx[keep]
