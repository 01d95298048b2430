"""Stream selection rules, one per technology.

Each rule looks at a snapshot of per-stream variances (the 30 s moving
variance at the current estimation tick) and returns a ``StreamMask``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .trace import Tech

CSI_LINKS = 4
CSI_SUBCARRIERS = 114


@dataclass(frozen=True, eq=False)
class StreamMask:
    keep: np.ndarray
    basis_window: float = 30.0

    def __post_init__(self):
        keep = np.array(self.keep, dtype=bool).reshape(-1)
        if keep.size == 0 or not keep.any():
            raise ValueError("a stream mask must keep at least one stream")
        keep.setflags(write=False)
        object.__setattr__(self, "keep", keep)

    def __len__(self):
        return self.keep.size

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.keep)

    @property
    def n_kept(self) -> int:
        return int(self.keep.sum())

    @classmethod
    def all(cls, n: int) -> "StreamMask":
        return cls(np.ones(n, dtype=bool))

    def __eq__(self, other):
        return isinstance(other, StreamMask) and np.array_equal(self.keep, other.keep)


def select_cir(var) -> StreamMask:
    """Drop the streams whose variance exceeds the median variance."""
    var = np.asarray(var, dtype=float)
    return StreamMask(var <= np.percentile(var, 50))


def select_rss(var) -> StreamMask:
    """Keep streams between the 25th and 75th variance percentiles."""
    var = np.asarray(var, dtype=float)
    lo, hi = np.percentile(var, [25, 75])
    keep = (var >= lo) & (var <= hi)
    if keep.sum() < 2 and var.size >= 2:
        med = np.percentile(var, 50)
        near = np.argsort(np.abs(var - med), kind="stable")[:2]
        keep = np.zeros(var.size, dtype=bool)
        keep[near] = True
    return StreamMask(keep)


def select_sub(var=None) -> StreamMask:
    if var is not None and np.size(var) != 1:
        raise ValueError("sub-dB RSS carries a single stream")
    return StreamMask([True])


def _group_stats(v: np.ndarray) -> np.ndarray:
    return np.array([v.min(), v.mean(), np.median(v), v.max()])


def csi_scores(var, groups) -> tuple:
    """Points earned by groups 0 and 1: one per statistic strictly lower."""
    var = np.asarray(var, dtype=float)
    groups = np.asarray(groups)
    a = _group_stats(var[groups == 0])
    b = _group_stats(var[groups == 1])
    return int(np.sum(a < b)), int(np.sum(b < a))


def select_csi(var, groups, prev: Optional[int] = None) -> tuple:
    """Filter out the receive-antenna group with the higher variances.

    Returns ``(mask, filtered_group)``; pass ``filtered_group`` back as
    ``prev`` on the next tick so ties repeat the previous decision. A tie on
    the very first tick filters group 1.
    """
    groups = np.asarray(groups)
    if set(np.unique(groups)) != {0, 1}:
        raise ValueError("CSI selection needs exactly two stream groups labelled 0 and 1")
    pa, pb = csi_scores(var, groups)
    if pa > pb:
        filtered = 1
    elif pb > pa:
        filtered = 0
    else:
        filtered = 1 if prev is None else int(prev)
    return StreamMask(groups != filtered), filtered


_RX_LABEL = re.compile(r"rx(\d+)", re.IGNORECASE)


def csi_rx_groups(stream_labels: Optional[Sequence[str]] = None) -> np.ndarray:
    """Receive-antenna group (0/1) of every CSI stream.

    Labels like ``tx0-rx1-sc013`` are parsed when given. Otherwise streams
    are taken as 4 links of 114 subcarriers in the order
    (tx0,rx0), (tx0,rx1), (tx1,rx0), (tx1,rx1).
    """
    if stream_labels is not None:
        out = []
        for lab in stream_labels:
            mt = _RX_LABEL.search(lab)
            if mt is None:
                break
            out.append(int(mt.group(1)))
        else:
            g = np.asarray(out)
            uniq = np.unique(g)
            if uniq.size == 2:
                return (g == uniq[1]).astype(int)
    link = np.arange(CSI_LINKS * CSI_SUBCARRIERS) // CSI_SUBCARRIERS
    return link % 2


class StreamSelector:
    """Per-tick selection for one trace; holds the CSI tie token."""

    def __init__(self, tech, n_streams: int, enabled: bool = True, groups=None):
        self.tech = Tech(tech)
        self.n_streams = n_streams
        self.enabled = enabled
        self.groups = groups
        self.prev_filtered: Optional[int] = None
        if self.tech is Tech.CSI and enabled and groups is None:
            self.groups = csi_rx_groups()

    def __call__(self, var) -> StreamMask:
        if not self.enabled:
            return StreamMask.all(self.n_streams)
        if self.tech is Tech.CIR:
            return select_cir(var)
        if self.tech is Tech.RSS:
            return select_rss(var)
        if self.tech is Tech.SUB:
            return select_sub(var)
        if self.tech is Tech.CSI:
            mask, self.prev_filtered = select_csi(var, self.groups, self.prev_filtered)
            return mask
        # ground-truth channels are always averaged together
        return StreamMask.all(self.n_streams)
