import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from oracles import (butter_impulse_response, dft_at, literal_band_power, sliding_median,
                     trailing_variance)
from rfresp import dsp
from rfresp.trace import StreamMatrix, Window

RATES = (18.9, 9.9, 16.25, 4.5, 25.0)


def _m(x, fs=10.0):
    return StreamMatrix(0.0, fs, np.atleast_2d(np.asarray(x, dtype=float)))


class TestButterworth:
    def test_dc_gain_and_cutoff(self):
        c = dsp.design_butterworth(5, 0.4, 9.9, "low")
        assert abs(c.response(0.0)[0]) == pytest.approx(1.0, abs=1e-12)
        assert abs(c.response(0.4)[0]) == pytest.approx(2 ** -0.5, abs=1e-6)

    def test_stopband_matches_impulse_response_oracle(self):
        c = dsp.design_butterworth(5, 0.4, 9.9, "low")
        h = butter_impulse_response(c.sos, 2 ** 16)
        assert abs(c.response(0.8)[0]) == pytest.approx(abs(dft_at(h, 0.8, 9.9)), abs=1e-9)

    @pytest.mark.parametrize("fs", RATES)
    @pytest.mark.parametrize("kind,fc", [("low", 0.4), ("high", 0.1)])
    def test_every_cascade_is_stable(self, fs, kind, fc):
        c = dsp.design_butterworth(5, fc, fs, kind)
        assert c.is_stable()
        assert c.n_sections == 3
        x = np.random.default_rng(1).uniform(-1, 1, 10 ** 6)
        y = dsp.apply_filter(c, _m(x, fs)).values
        assert np.max(np.abs(y)) <= 10

    def test_rejects_cutoff_above_nyquist(self):
        with pytest.raises(ValueError):
            dsp.design_butterworth(5, 3.0, 4.5, "low")
        with pytest.raises(ValueError):
            dsp.design_butterworth(5, 0.4, 9.9, "band")


class TestApplyFilter:
    def test_lowpass_passes_constant(self):
        c = dsp.design_butterworth(5, 0.4, 9.9, "low")
        y = dsp.apply_filter(c, _m(np.full(500, -63.0), 9.9)).values[0]
        np.testing.assert_allclose(y, -63.0, atol=1e-6)

    def test_highpass_removes_constant(self):
        c = dsp.design_butterworth(5, 0.1, 9.9, "high")
        y = dsp.apply_filter(c, _m(np.full(2000, 40.0), 9.9)).values[0]
        assert np.max(np.abs(y[500:])) < 1e-6

    def test_band_tone_amplitude_follows_response(self):
        fs = 9.9
        lp = dsp.design_butterworth(5, 0.4, fs, "low")
        hp = dsp.design_butterworth(5, 0.1, fs, "high")
        t = np.arange(4000) / fs
        y = dsp.apply_filter(hp, dsp.apply_filter(lp, _m(np.sin(2 * np.pi * 0.2 * t), fs))).values[0]
        expected = abs(dft_at(butter_impulse_response(lp.sos, 4096), 0.2, fs)
                       * dft_at(butter_impulse_response(hp.sos, 4096), 0.2, fs))
        steady = y[2000:]
        assert (steady.max() - steady.min()) / 2 == pytest.approx(expected, rel=2e-3)

    def test_rate_mismatch(self):
        c = dsp.design_butterworth(5, 0.4, 9.9, "low")
        with pytest.raises(ValueError):
            dsp.apply_filter(c, _m(np.zeros(10), 18.9))

    @settings(max_examples=25, deadline=None)
    @given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2 ** 31))
    def test_linearity(self, alpha, beta, seed):
        rng = np.random.default_rng(seed)
        x, z = rng.normal(size=300), rng.normal(size=300)
        c = dsp.design_butterworth(5, 0.1, 4.5, "high")
        f = lambda v: dsp.apply_filter(c, _m(v, 4.5)).values[0]
        np.testing.assert_allclose(f(alpha * x + beta * z), alpha * f(x) + beta * f(z), atol=1e-9)


class TestMedian:
    def test_constant_unchanged(self):
        x = np.full(50, 3.5)
        np.testing.assert_array_equal(dsp.median_filter(_m(x), 0.7).values[0], x)

    def test_short_spike_removed(self):
        y = dsp.median_filter(_m([0, 0, 10, 0, 0], 1.0), 3.0).values[0]
        np.testing.assert_array_equal(y, np.zeros(5))

    def test_random_against_sort_oracle(self):
        x = np.random.default_rng(2).normal(size=1000)
        y = dsp.median_filter(_m(x, 10.0), 0.7).values[0]
        np.testing.assert_array_equal(y, sliding_median(list(x), 7))

    def test_window_length_is_odd(self):
        assert dsp.median_window_length(0.7, 9.9) == 7
        assert dsp.median_window_length(0.45, 16.25) == 7
        assert dsp.median_window_length(0.4, 10.0) == 5

    def test_stream_permutation_equivariance(self):
        x = np.random.default_rng(3).normal(size=(4, 80))
        p = [2, 0, 3, 1]
        a = dsp.median_filter(_m(x), 0.7).values[p]
        b = dsp.median_filter(_m(x[p]), 0.7).values
        np.testing.assert_array_equal(a, b)


class TestMovingVariance:
    def test_constant_is_zero(self):
        np.testing.assert_array_equal(dsp.moving_variance(_m(np.full(40, -70.0)), 3.0).values, 0.0)

    def test_alternating_sign(self):
        x = np.tile([1.0, -1.0], 30)
        y = dsp.moving_variance(_m(x, 1.0), 4.0).values[0]
        np.testing.assert_allclose(y[3:], 1.0, atol=1e-12)

    def test_against_two_pass_oracle(self):
        x = np.random.default_rng(4).normal(-60, 5, 600)
        y = dsp.moving_variance(_m(x, 4.5), 30.0).values[0]
        assert np.max(np.abs(y - trailing_variance(list(x), 135))) < 1e-9

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            dsp.moving_variance(_m(np.zeros(10), 1.0), 1.0)

    def test_stream_permutation_equivariance(self):
        x = np.random.default_rng(5).normal(size=(3, 60))
        p = [1, 2, 0]
        np.testing.assert_allclose(dsp.moving_variance(_m(x), 2.0).values[p],
                                   dsp.moving_variance(_m(x[p]), 2.0).values, atol=0)


class TestXcorrLag:
    def test_identity(self):
        a = np.random.default_rng(6).random(64)
        assert dsp.xcorr_lag(a, a, 8) == 0

    def test_shift_right(self):
        a = np.zeros(64)
        a[20:26] = [1, 3, 5, 3, 1, 0.5]
        assert dsp.xcorr_lag(a, np.roll(a, 3), 8) == 3
        assert dsp.xcorr_lag(a, np.roll(a, -5), 8) == -5

    def test_noisy_shift_monte_carlo(self):
        rng = np.random.default_rng(7)
        ok = 0
        for _ in range(100):
            lag = int(rng.integers(-40, 41))
            a = rng.normal(size=320)
            sigma = np.sqrt(np.mean(a ** 2) / 10.0)  # 10 dB SNR
            b = np.roll(a, lag) + rng.normal(0, sigma, a.size)
            ok += dsp.xcorr_lag(a + rng.normal(0, sigma, a.size), b, 80) == lag
        assert ok >= 99

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            dsp.xcorr_lag(np.zeros(4), np.zeros(5), 1)
        with pytest.raises(ValueError):
            dsp.xcorr_lag(np.zeros(4), np.zeros(4), 4)


class TestRotation:
    def test_identity(self):
        ref = np.random.default_rng(8).normal(size=20) + 1j
        assert dsp.optimal_rotation(ref, ref) == pytest.approx(0.0, abs=1e-12)

    def test_known_rotation(self):
        ref = np.exp(1j * np.arange(20)) * np.linspace(1, 2, 20)
        assert dsp.optimal_rotation(ref, np.exp(-1j * np.pi / 3) * ref) == pytest.approx(np.pi / 3, abs=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-np.pi, np.pi, exclude_min=True))
    def test_recovers_any_phase(self, phi):
        ref = np.exp(1j * np.arange(16) * 0.7) * (1 + np.arange(16) / 4)
        got = dsp.optimal_rotation(ref, np.exp(-1j * phi) * ref)
        diff = np.angle(np.exp(1j * (got - phi)))
        assert abs(diff) < 1e-9
        assert -np.pi < got <= np.pi

    def test_grid_search_oracle(self):
        rng = np.random.default_rng(9)
        grid = np.linspace(-np.pi, np.pi, 10 ** 4, endpoint=False)
        for _ in range(20):
            ref = rng.normal(size=12) + 1j * rng.normal(size=12)
            x = rng.normal(size=12) + 1j * rng.normal(size=12)
            th = dsp.optimal_rotation(ref, x)
            best = np.min(np.linalg.norm(ref[None] - np.exp(1j * grid)[:, None] * x[None], axis=1))
            assert np.linalg.norm(ref - np.exp(1j * th) * x) <= best + 1e-12


class TestUpsample:
    def test_factor_one_copies(self):
        x = np.arange(5) + 1j
        y = dsp.upsample_complex(x, 1)
        np.testing.assert_array_equal(x, y)
        assert y is not x

    def test_cir_dimensions(self):
        assert dsp.upsample_complex(np.ones(20, complex), 16).shape == (320,)

    def test_decimation_returns_input(self):
        rng = np.random.default_rng(10)
        x = rng.normal(size=20) + 1j * rng.normal(size=20)
        np.testing.assert_allclose(dsp.upsample_complex(x, 16)[::16], x, atol=1e-9)


class TestBandPower:
    def test_pure_tone(self):
        fs, n, f, A = 10.0, 300, 0.2, 2.0
        v = A * np.sin(2 * np.pi * f * np.arange(n) / fs)
        p = dsp.band_powers(v, fs, [f])[0, 0]
        assert p == pytest.approx(n * A ** 2 / 4, rel=0.01)

    def test_zero_window(self):
        w = Window(_m(np.zeros((2, 300))), 29.9, 30.0)
        assert dsp.band_power(w, 1, 0.25) == 0.0

    def test_literal_sum_oracle(self):
        rng = np.random.default_rng(11)
        w = Window(_m(rng.normal(size=(3, 300)), 9.9), 30.0, 30.0)
        for f in (0.1, 0.173, 0.4):
            assert dsp.band_power(w, 2, f) == pytest.approx(literal_band_power(list(w.values[2]), 9.9, f),
                                                            abs=1e-9)

    def test_frequency_must_be_below_nyquist(self):
        w = Window(_m(np.zeros((1, 300)), 1.0), 299.0, 30.0)
        with pytest.raises(ValueError):
            dsp.band_power(w, 0, 0.5)


class TestFindPeaks:
    def test_tone_spacing(self):
        fs = 9.9
        v = np.sin(2 * np.pi * 0.25 * np.arange(round(30 * fs)) / fs)
        idx = dsp.find_peaks(v, fs, 2.5, 0.3)
        assert idx.size in (7, 8)
        np.testing.assert_allclose(np.diff(idx), 4 * fs, atol=1)

    def test_ramp_has_no_peaks(self):
        assert dsp.find_peaks(np.linspace(0, 1, 100), 10.0, 2.5, 0.3).size == 0

    def test_ripples_rejected(self):
        fs = 10.0
        t = np.arange(300) / fs
        v = np.sin(2 * np.pi * 0.2 * t) + 0.1 * np.sin(2 * np.pi * 2.0 * t)
        idx = dsp.find_peaks(v, fs, 2.5, 0.3)
        # one peak per 5 s breathing cycle and nothing from the 2 Hz ripple
        assert idx.size == 6
        assert np.all(np.diff(idx) >= 45)

    @settings(max_examples=40, deadline=None)
    @given(hnp.arrays(float, st.integers(3, 200), elements=st.floats(-1e3, 1e3)),
           st.floats(0, 5), st.floats(0, 1))
    def test_peaks_are_spaced(self, v, min_dist, prom):
        idx = dsp.find_peaks(v, 10.0, min_dist, prom)
        gap = int(np.ceil(min_dist * 10.0 - 1e-9))
        if idx.size > 1 and gap > 1:
            assert np.min(np.diff(np.sort(idx))) >= gap


def test_frequency_grid():
    g = dsp.DEFAULT_GRID
    assert len(g) == 151
    assert g.frequencies[0] == pytest.approx(0.1)
    assert g.frequencies[-1] == pytest.approx(0.4)
