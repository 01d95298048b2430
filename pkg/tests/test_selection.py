import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from oracles import percentile_linear
from rfresp.selection import (StreamMask, StreamSelector, csi_rx_groups, csi_scores, select_cir,
                              select_csi, select_rss, select_sub)

variances = hnp.arrays(float, st.integers(2, 64), elements=st.floats(1e-6, 1e6))


def test_cir_median_rule():
    np.testing.assert_array_equal(select_cir([1, 2, 3, 4]).keep, [True, True, False, False])


def test_cir_all_equal_keeps_all():
    assert select_cir(np.full(320, 0.3)).n_kept == 320


def test_cir_against_sort_oracle():
    rng = np.random.default_rng(0)
    for _ in range(50):
        v = rng.exponential(size=320)
        med = percentile_linear(list(v), 50)
        expected = [x <= med for x in v]
        np.testing.assert_array_equal(select_cir(v).keep, expected)


@settings(max_examples=100)
@given(variances)
def test_cir_keeps_about_half(v):
    if np.unique(v).size == v.size:
        frac = select_cir(v).n_kept / v.size
        assert 0.4 <= frac <= 0.6 or v.size < 10


def test_rss_interquartile_band():
    m = select_rss(np.arange(1.0, 9.0))
    np.testing.assert_array_equal(np.flatnonzero(m.keep), [2, 3, 4, 5])


def test_rss_all_equal_keeps_all():
    assert select_rss(np.ones(32)).n_kept == 32


def test_rss_against_sort_oracle():
    rng = np.random.default_rng(1)
    for _ in range(50):
        v = rng.exponential(size=32)
        lo, hi = percentile_linear(list(v), 25), percentile_linear(list(v), 75)
        np.testing.assert_array_equal(select_rss(v).keep, [lo <= x <= hi for x in v])


def test_rss_keeps_at_least_two():
    m = select_rss([0.0, 5.0, 100.0])
    assert m.n_kept >= 2


def test_sub_always_single_stream():
    assert select_sub().keep.tolist() == [True]
    assert select_sub([3.0]).keep.tolist() == [True]
    assert StreamSelector("sub", 1, enabled=False)([3.0]).keep.tolist() == [True]
    with pytest.raises(ValueError):
        select_sub([1.0, 2.0])


def _csi_groups():
    return csi_rx_groups()


def test_csi_clear_winner():
    g = _csi_groups()
    var = np.where(g == 0, 1.0, 5.0) + np.linspace(0, 0.1, g.size)
    mask, filtered = select_csi(var, g)
    assert filtered == 1
    np.testing.assert_array_equal(mask.keep, g == 0)


def test_csi_tie_repeats_previous_choice():
    g = np.array([0, 0, 0, 1, 1, 1])
    # group 0 has the lower min and median, group 1 the lower mean and max
    var = np.array([0.0, 1.0, 6.0, 0.5, 2.0, 2.1])
    a, b = csi_scores(var, g)
    assert a == b == 2
    _, f = select_csi(var, g, prev=0)
    assert f == 0
    _, f = select_csi(var, g, prev=1)
    assert f == 1
    _, f = select_csi(var, g, prev=None)
    assert f == 1


def test_csi_against_statistics_oracle():
    rng = np.random.default_rng(2)
    g = _csi_groups()
    for _ in range(30):
        var = rng.exponential(size=456) * np.where(g == 0, rng.uniform(0.5, 2), 1)
        stats = []
        for k in (0, 1):
            s = sorted(var[g == k])
            n = len(s)
            med = (s[n // 2 - 1] + s[n // 2]) / 2 if n % 2 == 0 else s[n // 2]
            stats.append([s[0], sum(s) / n, med, s[-1]])
        pa = sum(x < y for x, y in zip(stats[0], stats[1]))
        pb = sum(y < x for x, y in zip(stats[0], stats[1]))
        mask, f = select_csi(var, g, prev=0)
        expected = 1 if pa > pb else 0 if pb > pa else 0
        assert f == expected
        np.testing.assert_array_equal(mask.keep, g != expected)


def test_csi_groups_from_labels():
    labels = [f"tx{i // 228}-rx{(i // 114) % 2}-sc{i % 114:03d}" for i in range(456)]
    np.testing.assert_array_equal(csi_rx_groups(labels), (np.arange(456) // 114) % 2)


def test_csi_default_groups_are_halves():
    g = csi_rx_groups()
    assert np.sum(g == 0) == 228


@settings(max_examples=100)
@given(variances, st.floats(1e-3, 1e3))
def test_selection_is_scale_invariant(v, c):
    # guard against float rounding flipping exact ties
    v = np.round(v, 6)
    if np.unique(v).size != v.size:
        return
    np.testing.assert_array_equal(select_cir(v).keep, select_cir(v * c).keep)
    np.testing.assert_array_equal(select_rss(v).keep, select_rss(v * c).keep)


@settings(max_examples=50)
@given(hnp.arrays(float, 456, elements=st.floats(1e-3, 1e3)), st.sampled_from([None, 0, 1]))
def test_csi_removes_exactly_one_group(v, prev):
    g = _csi_groups()
    mask, f = select_csi(v, g, prev)
    np.testing.assert_array_equal(mask.keep, g != f)


def test_selector_bypass_keeps_all():
    for tech, n in (("cir", 320), ("csi", 456), ("rss", 32)):
        sel = StreamSelector(tech, n, enabled=False)
        assert sel(np.random.default_rng(3).random(n)).n_kept == n


def test_selector_carries_csi_tie_token():
    sel = StreamSelector("csi", 456)
    g = _csi_groups()
    sel(np.where(g == 1, 1.0, 5.0))
    assert sel.prev_filtered == 0
    sel(np.ones(456))
    assert sel.prev_filtered == 0


def test_mask_must_keep_something():
    with pytest.raises(ValueError):
        StreamMask([False, False])
