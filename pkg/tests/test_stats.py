"""Welch's t-test against closed forms and a quadrature oracle."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from drivedae.stats import StatsError, samples_with_moments, welch_t_test


def _t_pdf(x: float, df: float) -> float:
    lognorm = math.lgamma((df + 1) / 2) - math.lgamma(df / 2) - 0.5 * math.log(df * math.pi)
    return math.exp(lognorm) * (1.0 + x * x / df) ** (-(df + 1) / 2)


def _two_sided_p_quadrature(t: float, df: float) -> float:
    tail, _ = quad(_t_pdf, abs(t), np.inf, args=(df,))
    return 2.0 * tail


class TestWelch:
    def test_identical_samples(self):
        r = welch_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert r.t == 0.0
        assert r.p == pytest.approx(1.0, abs=1e-12)

    def test_reference_moments(self):
        a = samples_with_moments(1.417, 0.212, 24, seed=0)
        b = samples_with_moments(1.268, 0.196, 24, seed=1)
        r = welch_t_test(a, b)
        assert r.t == pytest.approx(2.526, abs=0.01)
        assert r.df == pytest.approx(45.7, abs=0.1)
        assert r.p < 0.05

    def test_swap_symmetry(self):
        rng = np.random.default_rng(5)
        a, b = rng.normal(0, 1, 12), rng.normal(0.5, 2, 17)
        r1, r2 = welch_t_test(a, b), welch_t_test(b, a)
        assert r1.t == pytest.approx(-r2.t, rel=1e-12)
        assert r1.df == pytest.approx(r2.df, rel=1e-12)
        assert r1.p == pytest.approx(r2.p, rel=1e-12)

    def test_p_matches_quadrature_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            a = rng.normal(0, 1, int(rng.integers(5, 30)))
            b = rng.normal(rng.uniform(-1, 1), rng.uniform(0.5, 2),
                           int(rng.integers(5, 30)))
            r = welch_t_test(a, b)
            assert r.p == pytest.approx(_two_sided_p_quadrature(r.t, r.df), abs=1e-6)

    def test_degenerate_samples_rejected(self):
        with pytest.raises(StatsError):
            welch_t_test([1.0, 1.0, 1.0], [2.0, 2.0])
        with pytest.raises(StatsError):
            welch_t_test([1.0], [1.0, 2.0])

    def test_closed_form_statistic(self):
        # hand-computed: means 3 vs 1, variances 1 and 4, n 4 and 5
        a = [2.0, 3.0, 3.0, 4.0]  # mean 3, var 2/3
        b = [-1.0, 0.0, 1.0, 2.0, 3.0]  # mean 1, var 2.5
        va, vb = np.var(a, ddof=1), np.var(b, ddof=1)
        expect = (3.0 - 1.0) / math.sqrt(va / 4 + vb / 5)
        assert welch_t_test(a, b).t == pytest.approx(expect, rel=1e-12)


class TestSamplesWithMoments:
    def test_moments_exact(self):
        s = samples_with_moments(1.417, 0.212, 24)
        assert s.mean() == pytest.approx(1.417, abs=1e-12)
        assert s.std(ddof=1) == pytest.approx(0.212, abs=1e-12)

    def test_deterministic(self):
        np.testing.assert_array_equal(samples_with_moments(0, 1, 10),
                                      samples_with_moments(0, 1, 10))

    def test_small_n_rejected(self):
        with pytest.raises(StatsError):
            samples_with_moments(0.0, 1.0, 1)
