"""Synthetic channel traces with known breathing rate and motion.

Every stream is a baseline plus a sinusoid following the breathing-rate
schedule, plus Gaussian noise at a given SNR. A configurable share of the
streams carries no breathing at all (coloured noise only), and motion
bursts add a bounded random walk to every stream at once. CIR traces are
built as complex taps whose phases carry the breathing, with a random
carrier rotation on every packet.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .selection import csi_rx_groups
from .trace import RateSeries, RawTrace, Tech, TechnologyProfile, ValueKind, profile_for

CIR_FIRST_PATH = 5


@dataclass(frozen=True)
class SynthScenario:
    """Breathing schedule, motion bursts and noise model for one trace.

    ``rate_schedule`` is a sequence of ``(t_start, f_hz)`` relative to the
    trace start; ``motion_bursts`` of ``(t_start, duration, magnitude)`` where
    ``magnitude`` multiplies each stream's breathing amplitude.
    ``noise_fraction`` of the streams carry only noise whose standard
    deviation is drawn log-uniformly from ``noise_stream_std`` (relative to
    the breathing amplitude).
    """

    duration: float = 300.0
    rate_schedule: tuple = ((0.0, 0.25),)
    motion_bursts: tuple = ()
    noise_snr_db: float = 20.0
    rss_quantization: str = "none"
    noise_fraction: float = 0.0
    noise_stream_std: tuple = (0.1, 10.0)
    noise_corr_time: float = 4.0
    gains: Optional[tuple] = None
    phases: Optional[tuple] = None
    seed: int = 0
    t0: float = 0.0

    def __post_init__(self):
        sched = tuple(sorted((float(t), float(f)) for t, f in self.rate_schedule))
        if not sched or sched[0][0] > 0:
            raise ValueError("rate_schedule must start at t=0")
        if any(f <= 0 for _, f in sched):
            raise ValueError("breathing frequencies must be positive")
        object.__setattr__(self, "rate_schedule", sched)
        bursts = tuple((float(s), float(d), float(m)) for s, d, m in self.motion_bursts)
        for s, d, m in bursts:
            if not 0 < d <= 30:
                raise ValueError("motion bursts last between 0 and 30 s")
            if m < 0:
                raise ValueError("burst magnitude must be nonnegative")
        object.__setattr__(self, "motion_bursts", bursts)
        if self.rss_quantization not in ("none", "1db"):
            raise ValueError("rss_quantization must be 'none' or '1db'")
        if not 0 <= self.noise_fraction < 1:
            raise ValueError("noise_fraction must lie in [0, 1)")
        if self.duration <= 0:
            raise ValueError("duration must be positive")

    def rate_at(self, t) -> np.ndarray:
        """Scheduled breathing frequency at times relative to the trace start."""
        t = np.asarray(t, dtype=float)
        starts = np.array([s for s, _ in self.rate_schedule])
        freqs = np.array([f for _, f in self.rate_schedule])
        return freqs[np.searchsorted(starts, t, side="right") - 1]

    @property
    def motion_intervals(self) -> list:
        return [(self.t0 + s, self.t0 + s + d) for s, d, _ in self.motion_bursts]

    def to_dict(self) -> dict:
        return {
            "duration": self.duration,
            "rate_schedule": [list(x) for x in self.rate_schedule],
            "motion_bursts": [list(x) for x in self.motion_bursts],
            "noise_snr_db": self.noise_snr_db,
            "rss_quantization": self.rss_quantization,
            "noise_fraction": self.noise_fraction,
            "noise_stream_std": list(self.noise_stream_std),
            "noise_corr_time": self.noise_corr_time,
            "gains": None if self.gains is None else list(self.gains),
            "phases": None if self.phases is None else list(self.phases),
            "seed": self.seed,
            "t0": self.t0,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SynthScenario":
        d = dict(d)
        for key in ("gains", "phases", "noise_stream_std"):
            if d.get(key) is not None:
                d[key] = tuple(d[key])
        for key in ("rate_schedule", "motion_bursts"):
            if key in d:
                d[key] = tuple(tuple(x) for x in d[key])
        return cls(**d)


@dataclass
class SynthOutput:
    trace: RawTrace
    ground_truth: RateSeries
    motion_intervals: list
    breathing_streams: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))


def _bounded_walk(rng, n: int, fs: float, cross_time: float = 1.0) -> np.ndarray:
    """Random walk reflected into [-1, 1], starting at 0."""
    step = rng.normal(0.0, 2.0 / np.sqrt(cross_time * fs), n)
    w = np.empty(n)
    x = 0.0
    for i in range(n):
        x += step[i]
        # fold back into [-1, 1]
        x = ((x + 1.0) % 4.0)
        x = (x if x <= 2.0 else 4.0 - x) - 1.0
        w[i] = x
    return w


def motion_waveform(scenario: SynthScenario, t: np.ndarray, fs: float, rng) -> np.ndarray:
    """Sum of the burst walks at relative times ``t``.

    During a burst the waveform is a bounded walk riding on a ramp towards
    a new level of size 0.5 to 1 (random sign), all scaled by the burst
    magnitude. The new level is held afterwards: the body settles in a
    different position, which shifts the channel.
    """
    out = np.zeros(t.size)
    for s, d, mag in scenario.motion_bursts:
        sel = (t >= s) & (t < s + d)
        k = int(sel.sum())
        level = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 1.0)
        if k:
            ramp = level * np.arange(1, k + 1) / k
            out[sel] += mag * 0.5 * (_bounded_walk(rng, k, fs) + ramp)
            out[t >= s + d] += mag * 0.5 * level
    return out


def _coloured_noise(rng, shape, fs: float, corr_time: float) -> np.ndarray:
    """Unit-variance AR(1) noise with the given correlation time (seconds)."""
    from scipy.signal import lfilter

    a = np.exp(-1.0 / (corr_time * fs))
    e = rng.standard_normal(shape) * np.sqrt(1 - a * a)
    x0 = rng.standard_normal(shape[:-1] + (1,))
    y, _ = lfilter([1.0], [1.0, -a], e, axis=-1, zi=a * x0)
    return y


def breathing_phase(scenario: SynthScenario, t: np.ndarray, fs: float) -> np.ndarray:
    """2*pi times the integral of the scheduled frequency."""
    f = scenario.rate_at(t)
    return 2 * np.pi * (np.cumsum(f) - f) / fs


def _noise_stream_mask(tech: Tech, n: int, fraction: float, rng) -> np.ndarray:
    """True for streams that carry breathing."""
    k = int(round(fraction * n))
    breathing = np.ones(n, dtype=bool)
    if k == 0:
        return breathing
    if tech is Tech.CSI:
        # the second receive antenna goes first, then random streams of the first
        groups = csi_rx_groups()
        order = np.concatenate([rng.permutation(np.flatnonzero(groups == 1)),
                                rng.permutation(np.flatnonzero(groups == 0))])
    else:
        order = rng.permutation(n)
    breathing[order[:k]] = False
    return breathing


def _gains(scenario, n, rng, lo, hi):
    if scenario.gains is not None:
        g = np.asarray(scenario.gains, dtype=float)
        if g.size != n:
            raise ValueError(f"scenario gives {g.size} gains for {n} streams")
        return g
    return rng.uniform(lo, hi, n)


def _phases(scenario, n, rng):
    if scenario.phases is not None:
        p = np.asarray(scenario.phases, dtype=float)
        if p.size != n:
            raise ValueError(f"scenario gives {p.size} phases for {n} streams")
        return p
    return rng.uniform(-np.pi, np.pi, n)


def _stream_signals(scenario, tech, n, fs, t, rng, amp_range, base_range):
    """Real stream model (streams, samples) plus the breathing mask."""
    breathing = _noise_stream_mask(tech, n, scenario.noise_fraction, rng)
    amp = _gains(scenario, n, rng, *amp_range)
    phi = _phases(scenario, n, rng)
    base = rng.uniform(*base_range, n)
    theta = breathing_phase(scenario, t, fs)
    x = base[:, None] + np.where(breathing, amp, 0.0)[:, None] * np.sin(theta[None, :] + phi[:, None])
    sigma = amp / np.sqrt(2) * 10 ** (-scenario.noise_snr_db / 20)
    x += sigma[:, None] * rng.standard_normal((n, t.size))
    if not breathing.all():
        lo, hi = scenario.noise_stream_std
        std = amp * np.exp(rng.uniform(np.log(lo), np.log(hi), n))
        idx = np.flatnonzero(~breathing)
        x[idx] += std[idx, None] * _coloured_noise(rng, (idx.size, t.size), fs, scenario.noise_corr_time)
    if scenario.motion_bursts:
        walk = motion_waveform(scenario, t, fs, rng)
        sign = rng.choice([-1.0, 1.0], n) * rng.uniform(0.5, 1.5, n)
        x += (amp * sign)[:, None] * walk[None, :]
    return x, breathing


def _cir_trace(scenario, profile, t, rng):
    n_taps, fs = profile.stream_count, profile.fs_nominal
    k = np.arange(n_taps)
    # taps ahead of the first path only ever hold the noise floor
    breathing = k >= CIR_FIRST_PATH
    extra = int(round(scenario.noise_fraction * n_taps)) - CIR_FIRST_PATH
    if extra > 0:
        cand = np.flatnonzero(k > CIR_FIRST_PATH)
        breathing[rng.permutation(cand)[:extra]] = False
    mag = np.where(k >= CIR_FIRST_PATH, np.exp(-(k - CIR_FIRST_PATH) / 6.0), 0.0)
    mag *= rng.uniform(0.6, 1.0, n_taps)
    mag[CIR_FIRST_PATH] = 1.0
    mag = np.where(breathing | (k == CIR_FIRST_PATH), mag, 0.0)
    base_phase = rng.uniform(-np.pi, np.pi, n_taps)
    amp = _gains(scenario, n_taps, rng, 0.1, 0.3)  # radians of phase swing
    phi = _phases(scenario, n_taps, rng)
    theta = breathing_phase(scenario, t, fs)
    swing = np.where(breathing, amp, 0.0)[:, None] * np.sin(theta[None, :] + phi[:, None])
    if scenario.motion_bursts:
        walk = motion_waveform(scenario, t, fs, rng)
        sign = rng.choice([-1.0, 1.0], n_taps) * rng.uniform(0.5, 1.5, n_taps)
        swing = swing + (amp * sign)[:, None] * walk[None, :]
    h = mag[:, None] * np.exp(1j * (base_phase[:, None] + swing))
    # additive noise sized so the phase SNR of a breathing tap matches the scenario
    sigma = mag * amp / np.sqrt(2) * 10 ** (-scenario.noise_snr_db / 20)
    floor = 0.05
    sigma = np.where(mag > 0, sigma, floor)
    h += (sigma[:, None] / np.sqrt(2)) * (rng.standard_normal(h.shape) + 1j * rng.standard_normal(h.shape))
    carrier = np.exp(1j * rng.uniform(-np.pi, np.pi, t.size))
    return (h * carrier[None, :]).T, breathing


def synth_trace(profile: TechnologyProfile, scenario: SynthScenario) -> SynthOutput:
    """Generate a raw trace, its 5 s ground-truth series and motion intervals."""
    if isinstance(profile, (str, Tech)):
        profile = profile_for(profile)
    rng = np.random.default_rng(scenario.seed)
    fs = profile.fs_nominal
    n = int(np.floor(scenario.duration * fs + 1e-9))
    t = np.arange(n) / fs
    tech = profile.tech
    if max(f for _, f in scenario.rate_schedule) >= fs / 2:
        raise ValueError("breathing frequency must be below fs/2")
    labels = None
    if tech is Tech.CIR:
        samples, breathing = _cir_trace(scenario, profile, t, rng)
    elif tech is Tech.CSI:
        x, breathing = _stream_signals(scenario, tech, profile.stream_count, fs, t, rng, (0.5, 1.5), (10.0, 30.0))
        carrier = np.exp(1j * rng.uniform(-np.pi, np.pi, x.shape))
        samples = (10 ** (x / 20) * carrier).T
        groups = csi_rx_groups()
        labels = tuple(f"tx{link // 2}-rx{g}-sc{i % 114:03d}"
                       for i, (link, g) in enumerate(zip(np.arange(456) // 114, groups)))
    elif tech is Tech.SUB:
        x, breathing = _stream_signals(scenario, tech, 1, fs, t, rng, (0.5, 1.0), (-70.0, -50.0))
        samples = (10 ** (x / 10)).T
    elif tech is Tech.RSS:
        x, breathing = _stream_signals(scenario, tech, profile.stream_count, fs, t, rng, (0.8, 1.5), (-75.0, -45.0))
        if scenario.rss_quantization == "1db":
            x = np.round(x)
        samples = x.T
        if scenario.rss_quantization == "none" and profile.value_kind is ValueKind.INTEGER:
            profile = TechnologyProfile(tech, fs, profile.stream_count, ValueKind.REAL)
    elif tech is Tech.POLY:
        x, breathing = _stream_signals(scenario, tech, profile.stream_count, fs, t, rng, (0.5, 1.5), (-1.0, 1.0))
        samples = x.T
    else:
        raise ValueError(f"no synthetic model for {tech}")
    trace = RawTrace(profile, scenario.t0 + t, samples, labels)
    return SynthOutput(trace, ground_truth_series(scenario), scenario.motion_intervals, breathing)


def ground_truth_series(scenario: SynthScenario, window: float = 30.0, tick: float = 5.0) -> RateSeries:
    """Scheduled rate sampled at the estimation ticks."""
    ticks = np.arange(window, scenario.duration + 1e-9, tick)
    return RateSeries.from_arrays(scenario.t0 + ticks, scenario.rate_at(ticks), method="truth", tick=tick)


def random_scenario(seed: int, duration: float = 300.0, bpm_range=(12.0, 24.0), **kw) -> SynthScenario:
    """Constant-rate scenario with a rate drawn uniformly from ``bpm_range``."""
    rng = np.random.default_rng(seed)
    f = rng.uniform(*bpm_range) / 60.0
    return SynthScenario(duration=duration, rate_schedule=((0.0, f),), seed=seed, **kw)


def periodic_bursts(duration: float, seed: int, period: float = 300.0, length=(3.0, 8.0),
                    magnitude: float = 20.0, first: float = 60.0) -> tuple:
    """One burst per ``period`` seconds, start jittered inside each period."""
    rng = np.random.default_rng(seed)
    out = []
    start = first
    while start < duration:
        d = float(rng.uniform(*length))
        s = start + float(rng.uniform(0, period - d - 30.0))
        if s + d < duration:
            out.append((s, d, magnitude))
        start += period
    return tuple(out)
