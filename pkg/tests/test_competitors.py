import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from paretogof.competitors import (
    allison_discrepancy,
    fitted_cdf,
    stat_allison,
    stat_edf,
    stat_me,
    stat_oj,
    stat_T,
    stat_zhang,
)
from paretogof.distributions import pareto_cdf, pareto_quantile
from paretogof.errors import DomainError
from paretogof.registry import STATISTICS

positive = st.lists(st.floats(0.05, 80.0), min_size=3, max_size=12)


def T_by_quadrature(x, alpha, kind, m=3, a=0.5):
    x = np.asarray(x, dtype=float)
    n = x.size
    u = x ** (1 / m)
    c = x ** (-alpha * (m - 1))

    def integrand(t):
        s = np.sum(np.exp(-1j * t * u) / m - c * np.exp(-1j * t * x)) / math.sqrt(n)
        w = math.exp(-a * abs(t)) if kind == "T1" else math.exp(-a * t * t)
        return abs(s) ** 2 * w

    # |S(t)|^2 is even in t
    val, _ = integrate.quad(integrand, 0, np.inf, limit=2000, epsabs=1e-13, epsrel=1e-11)
    return 2 * val


class TestT:
    def test_single_unit_observation(self):
        # S(t) = (1/m - 1) exp(-it), so T = (1 - 1/m)^2 * I_w(0)
        assert stat_T([1.0], 2.0, "T1") == pytest.approx((2 / 3) ** 2 * 4.0, rel=1e-14)
        assert stat_T([1.0], 2.0, "T2") == pytest.approx((2 / 3) ** 2 * math.sqrt(2 * math.pi), rel=1e-14)
        assert stat_T([1.0], 2.0, "T1") == pytest.approx(T_by_quadrature([1.0], 2.0, "T1"), rel=1e-6)

    @pytest.mark.parametrize("kind", ["T1", "T2"])
    @pytest.mark.parametrize("seed", range(4))
    def test_closed_form_matches_quadrature(self, kind, seed):
        rng = np.random.default_rng(seed)
        x = 1.0 + rng.pareto(2.0, 5)
        alpha = x.mean() / (x.mean() - 1)
        assert stat_T(x, alpha, kind) == pytest.approx(T_by_quadrature(x, alpha, kind), rel=1e-6)

    def test_other_tuning(self):
        x = [1.2, 1.9, 3.3, 8.0]
        assert stat_T(x, 1.5, "T1", m=2, a=1.0) == pytest.approx(
            T_by_quadrature(x, 1.5, "T1", m=2, a=1.0), rel=1e-6)

    def test_tuning_validation(self):
        with pytest.raises(DomainError):
            stat_T([2.0], 1.0, "T1", a=0.0)
        with pytest.raises(DomainError):
            stat_T([2.0], 1.0, "T1", m=1)
        with pytest.raises(DomainError):
            stat_T([-2.0, 3.0], 1.0, "T1")


class TestZhang:
    def test_single_median_observation(self):
        alpha = 3.0
        x = [2 ** (1 / alpha)]  # F(x) = 0.5
        assert stat_zhang(x, alpha, "ZA") == pytest.approx(4 * math.log(2))

    def test_hand_sample(self):
        x, alpha = [1.4, 2.2, 5.0], 1.3
        f = sorted(1 - v ** -alpha for v in x)
        n = 3
        za = -sum(math.log(f[j - 1]) / (n - j + 0.5) + math.log(1 - f[j - 1]) / (j - 0.5)
                  for j in range(1, n + 1))
        zb = sum(math.log((1 / f[j - 1] - 1) / ((n - 0.5) / (j - 0.75) - 1)) ** 2
                 for j in range(1, n + 1))
        assert stat_zhang(x, alpha, "ZA") == pytest.approx(za, rel=1e-12)
        assert stat_zhang(x, alpha, "ZB") == pytest.approx(zb, rel=1e-12)

    def test_clamped_below_support(self):
        assert math.isfinite(stat_zhang([0.5, 2.0, 3.0], 1.5, "ZA"))
        assert math.isfinite(stat_zhang([0.5, 2.0, 3.0], 1.5, "ZB"))


class TestME:
    def test_single_observation(self):
        alpha = 2.0
        x = [pareto_quantile(0.5, alpha)]
        expected = 2 * 0.5 / 0.25 - 4 * (math.atan(1) + math.atan(1)) + 2 * (2 * math.atan(2) - 0.5 * math.log(5))
        assert stat_me(x, alpha) == pytest.approx(expected, rel=1e-12)

    def test_reflection_symmetry(self):
        alpha = 1.7
        x = np.array([1.3, 2.0, 2.9, 6.5])
        reflected = pareto_quantile(1 - pareto_cdf(x, alpha), alpha)
        assert stat_me(reflected, alpha) == pytest.approx(stat_me(x, alpha), rel=1e-9)

    def test_hand_sample(self):
        x, alpha, a = [1.4, 2.2, 5.0], 1.3, 0.5
        u = [1 - v ** -alpha for v in x]
        first = sum(2 * a / ((p - q) ** 2 + a * a) for p in u for q in u) / 3
        second = 4 * sum(math.atan(p / a) + math.atan((1 - p) / a) for p in u)
        third = 2 * 3 * (2 * math.atan(1 / a) - a * math.log(1 + 1 / a ** 2))
        assert stat_me(x, alpha) == pytest.approx(first - second + third, rel=1e-12)


def oj_brute_force(x):
    x = sorted(x)
    n = len(x)
    pairs = [(i, j) for i in range(n) for j in range(i)]
    total = 0.0
    for rank, xi in enumerate(x, start=1):
        m_n = sum(max(x[i] / x[j], x[j] / x[i]) <= xi for i, j in pairs) / len(pairs)
        total += m_n - rank / n
    return total / n


class TestOJ:
    def test_two_equal_values(self):
        assert stat_oj([3.0, 3.0]) == pytest.approx(0.25)

    @given(st.lists(st.floats(1.0, 30.0), min_size=2, max_size=6))
    def test_brute_force(self, x):
        assert stat_oj(x) == pytest.approx(oj_brute_force(x), abs=1e-12)

    def test_nonpositive_raises(self):
        with pytest.raises(DomainError):
            stat_oj([0.0, 2.0])


def allison_enumeration(x, m, kind):
    x = np.asarray(x, dtype=float)
    n = x.size

    def disc(t):
        first = np.sum(x ** (1 / m) <= t) / n
        second = sum(min(c) <= t for c in itertools.product(x, repeat=m)) / n ** m
        return first - second

    vals = [disc(t) for t in x if t >= 1.0]
    return sum(vals) / n if kind == "Inm" else sum(v * v for v in vals) / n


class TestAllison:
    def test_saturation(self):
        x = [1.5, 2.0, 4.0]
        assert allison_discrepancy(x, [100.0], 2)[0] == 0.0

    @given(st.lists(st.floats(0.5, 20.0), min_size=2, max_size=6), st.sampled_from(["Inm", "Mnm"]))
    def test_enumeration_m2(self, x, kind):
        assert stat_allison(x, kind, 2) == pytest.approx(allison_enumeration(x, 2, kind), abs=1e-12)

    @given(st.lists(st.floats(0.5, 20.0), min_size=2, max_size=5), st.sampled_from(["Inm", "Mnm"]))
    def test_enumeration_m3(self, x, kind):
        assert stat_allison(x, kind, 3) == pytest.approx(allison_enumeration(x, 3, kind), abs=1e-12)


class TestEDF:
    def test_cvm_perfect_fit(self):
        n, alpha = 8, 2.0
        x = pareto_quantile((2 * np.arange(1, n + 1) - 1) / (2 * n), alpha)
        assert stat_edf(x, alpha, "CvM") == pytest.approx(1 / (12 * n), rel=1e-9)

    def test_ks_single(self):
        alpha = 1.0
        x = [pareto_quantile(0.3, alpha)]
        assert stat_edf(x, alpha, "KS") == pytest.approx(0.7)

    def test_ad_hand_sample(self):
        x, alpha = [1.4, 2.2, 5.0], 1.3
        f = sorted(1 - v ** -alpha for v in x)
        n = 3
        ad = -n - sum((2 * i - 1) * (math.log(f[i - 1]) + math.log(1 - f[n - i])) for i in range(1, n + 1)) / n
        assert stat_edf(x, alpha, "AD") == pytest.approx(ad, rel=1e-12)

    def test_fitted_cdf_clamped(self):
        f = fitted_cdf([0.2, 1e300], 3.0)
        assert f[0] == 1e-12 and f[1] == 1 - 1e-12


class TestAllStatistics:
    @given(positive, st.randoms(use_true_random=False))
    def test_permutation_invariance(self, x, r):
        y = list(x)
        r.shuffle(y)
        for name, spec in STATISTICS.items():
            if name.startswith("delta") and min(x) <= 0:
                continue
            assert spec(y, 1.7) == pytest.approx(spec(x, 1.7), rel=1e-9, abs=1e-12), name

    @given(positive)
    def test_finite_on_positive_samples(self, x):
        for name, spec in STATISTICS.items():
            assert math.isfinite(spec(x, 1.7)), name

    def test_thirteen_tests(self):
        assert len(STATISTICS) == 13
