"""Error metric, summary statistics and the Mann-Whitney U test."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .trace import AlignedPair, RateSeries

CDF_STEP_BPM = 0.12
EXACT_LIMIT = 64


@dataclass(frozen=True)
class ErrorSample:
    t: float
    e: float


@dataclass(frozen=True)
class EvalReport:
    median_bpm: float
    p95_bpm: float
    cdf: tuple
    pct_removed: float
    n_samples: int
    n_ticks: int = 0
    errors: tuple = ()

    def cdf_at(self, bpm: float) -> float:
        """Fraction of errors at or below ``bpm`` (read off the gridded CDF)."""
        if not self.cdf:
            return float("nan")
        xs = np.array([c[0] for c in self.cdf])
        i = int(np.searchsorted(xs, bpm, side="left"))
        return float(self.cdf[min(i, len(self.cdf) - 1)][1])

    def to_dict(self) -> dict:
        return {
            "median_bpm": self.median_bpm,
            "p95_bpm": self.p95_bpm,
            "pct_removed": self.pct_removed,
            "n_samples": self.n_samples,
            "n_ticks": self.n_ticks,
            "cdf": [list(c) for c in self.cdf],
            "errors": list(self.errors),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        nan = float("nan")
        med = d.get("median_bpm")
        p95 = d.get("p95_bpm")
        return cls(nan if med is None else float(med), nan if p95 is None else float(p95),
                   tuple((float(a), float(b)) for a, b in d.get("cdf", [])),
                   float(d["pct_removed"]), int(d["n_samples"]), int(d.get("n_ticks", 0)),
                   tuple(float(x) for x in d.get("errors", [])))


def rr_error(pairs: Iterable[AlignedPair]) -> list:
    """Absolute error in breaths per minute for every pair with an estimate."""
    out = []
    for p in pairs:
        if p.f_hat is None or p.f_gt is None:
            continue
        out.append(ErrorSample(p.t, 60.0 * abs(p.f_gt - p.f_hat)))
    return out


def _values(errors) -> np.ndarray:
    errors = list(errors) if not isinstance(errors, np.ndarray) else errors
    if len(errors) and isinstance(errors[0], ErrorSample):
        return np.array([s.e for s in errors], dtype=float)
    return np.asarray(errors, dtype=float).reshape(-1)


def empirical_cdf(e: np.ndarray, step: float = CDF_STEP_BPM) -> tuple:
    """(bpm, fraction <= bpm) on a grid of ``step`` up to the largest error."""
    if e.size == 0:
        return ()
    n = max(1, int(math.ceil(e.max() / step - 1e-12)))
    xs = step * np.arange(n + 1)
    frac = np.searchsorted(np.sort(e), xs + 1e-12, side="right") / e.size
    frac[-1] = 1.0
    return tuple((float(x), float(f)) for x, f in zip(xs, frac))


def summarize(errors, total_ticks: int | None = None) -> EvalReport:
    """Median, 95th percentile, CDF and share of ticks without an estimate."""
    e = _values(errors)
    n = e.size
    total = n if total_ticks is None else int(total_ticks)
    if total < n:
        raise ValueError("total_ticks cannot be smaller than the number of errors")
    med = float(np.percentile(e, 50)) if n else float("nan")
    p95 = float(np.percentile(e, 95)) if n else float("nan")
    removed = (total - n) / total if total else 0.0
    return EvalReport(med, p95, empirical_cdf(e), removed, n, total, tuple(float(x) for x in e))


def evaluate_series(est: RateSeries, gt: RateSeries, intervals=None) -> EvalReport:
    """Pair, score and summarize an estimate series against ground truth."""
    from .trace import align_nearest

    if intervals is not None:
        est = slice_by_intervals(est, intervals)
    if len(est) == 0:
        return summarize([], 0)
    pairs = align_nearest(est, gt)
    return summarize(rr_error(pairs), len(pairs))


def _ranks(x: np.ndarray) -> np.ndarray:
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(x.size)
    xs = x[order]
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and xs[j + 1] == xs[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def u_distribution(n: int, m: int) -> np.ndarray:
    """Number of labelings giving each U in 0..n*m (no ties).

    Uses the recurrence f(n, m, u) = f(n-1, m, u-m) + f(n, m-1, u).
    """
    # table[j] holds the counts for (i, j) while sweeping i
    prev = [np.ones(1, dtype=object) for _ in range(m + 1)]  # i = 0
    for i in range(1, n + 1):
        cur = [np.ones(1, dtype=object)]  # j = 0
        for j in range(1, m + 1):
            size = i * j + 1
            f = np.zeros(size, dtype=object)
            a = prev[j]  # largest value drawn from a: it beats all j of b
            f[j:j + a.size] += a
            b = cur[j - 1]  # largest value drawn from b
            f[:b.size] += b
            cur.append(f)
        prev = cur
    return prev[m]


@dataclass(frozen=True)
class MannWhitneyResult:
    u: float
    p: float
    method: str
    alternative: str = "two-sided"

    def __iter__(self):
        return iter((self.u, self.p))


def mann_whitney_u(a: Sequence[float], b: Sequence[float], alternative: str = "two-sided") -> MannWhitneyResult:
    """Rank-sum U of ``a`` against ``b`` and its p-value.

    U counts pairs with a_i > b_j (ties count one half). The p-value is
    exact when there are no ties and ``len(a) * len(b) <= 64``; otherwise a
    normal approximation with tie and continuity corrections is used.
    ``alternative`` is "two-sided", "less" (a tends smaller) or "greater".
    """
    if alternative not in ("two-sided", "less", "greater"):
        raise ValueError(f"unknown alternative {alternative!r}")
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    n, m = a.size, b.size
    if n == 0 or m == 0:
        raise ValueError("both samples must be nonempty")
    pooled = np.concatenate([a, b])
    ranks = _ranks(pooled)
    u = float(ranks[:n].sum() - n * (n + 1) / 2.0)
    ties = np.unique(pooled).size < pooled.size
    if not ties and n * m <= EXACT_LIMIT:
        counts = u_distribution(n, m)
        total = sum(counts)
        k = int(round(u))
        p_le = float(sum(counts[:k + 1]) / total)
        p_ge = float(sum(counts[k:]) / total)
        if alternative == "less":
            p = p_le
        elif alternative == "greater":
            p = p_ge
        else:
            p = min(1.0, 2.0 * min(p_le, p_ge))
        return MannWhitneyResult(u, p, "exact", alternative)
    mu = n * m / 2.0
    _, tcounts = np.unique(pooled, return_counts=True)
    big_n = n + m
    var = n * m / 12.0 * ((big_n + 1) - np.sum(tcounts ** 3 - tcounts) / (big_n * (big_n - 1)))
    if var <= 0:
        return MannWhitneyResult(u, 1.0, "normal", alternative)
    sd = math.sqrt(var)
    if alternative == "two-sided":
        z = max(abs(u - mu) - 0.5, 0.0) / sd
        p = min(1.0, math.erfc(z / math.sqrt(2)))
    elif alternative == "less":
        z = (u - mu + 0.5) / sd
        p = 0.5 * math.erfc(-z / math.sqrt(2))
    else:
        z = (u - mu - 0.5) / sd
        p = 0.5 * math.erfc(z / math.sqrt(2))
    return MannWhitneyResult(u, p, "normal", alternative)


def slice_by_intervals(series, intervals):
    """Keep items whose time falls in any interval ``[t_start, t_end)``.

    Works on a ``RateSeries`` (returns a ``RateSeries``) or any sequence of
    objects with a ``t`` attribute (returns a list).
    """
    iv = [(float(s), float(e)) for s, e in intervals]

    def inside(t):
        return any(s <= t < e for s, e in iv)

    if isinstance(series, RateSeries):
        return RateSeries(tuple(x for x in series if inside(x.t)), series.tick)
    return [x for x in series if inside(x.t)]


def complement_intervals(intervals, t_start: float, t_end: float) -> list:
    """Gaps between sorted ``intervals`` inside [t_start, t_end]."""
    out, cur = [], t_start
    for s, e in sorted(intervals):
        if s > cur:
            out.append((cur, s))
        cur = max(cur, e)
    if cur < t_end:
        out.append((cur, t_end))
    return out
