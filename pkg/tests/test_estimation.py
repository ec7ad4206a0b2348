import numpy as np
import pytest
from hypothesis import given, strategies as st

from paretogof.errors import DomainError, EstimationError
from paretogof.estimation import (
    CLAMPED_MEAN,
    CensoredSample,
    CensoringSurvival,
    censoring_km,
    fit_alpha,
    fit_alpha_censored,
    ipcw_mean,
    ipcw_weights,
    moment_alpha,
    moment_alpha_censored,
)

HAND = CensoredSample(np.array([2.0, 4.0, 6.0]), np.array([1, 0, 1]))


def product_limit_oracle(times, events, t):
    """Censoring survival just before ``t`` by an explicit loop."""
    surv = 1.0
    for u in sorted(set(times[~events])):
        if u >= t:
            break
        at_risk = np.sum(times >= u)
        d = np.sum((times == u) & ~events)
        surv *= 1.0 - d / at_risk
    return surv


class TestMomentEstimator:
    def test_formula(self):
        assert moment_alpha([2.0, 4.0]).alpha == pytest.approx(3.0 / 2.0)

    @given(st.floats(1.01, 1e4))
    def test_constant_sample(self, c):
        assert moment_alpha([c, c, c]).alpha == pytest.approx(c / (c - 1.0))

    def test_mean_at_most_one_raises(self):
        with pytest.raises(EstimationError):
            moment_alpha([0.5, 1.5])

    def test_clamped_and_flagged(self):
        alpha, flagged = fit_alpha([0.5, 0.9], clamp=True)
        assert flagged and alpha == pytest.approx(CLAMPED_MEAN / (CLAMPED_MEAN - 1.0))

    def test_consistency(self, rng):
        x = 1.0 + rng.pareto(4.0, 200_000)
        assert moment_alpha(x).alpha == pytest.approx(4.0, rel=0.02)


class TestCensoredSample:
    def test_validation(self):
        with pytest.raises(DomainError):
            CensoredSample(np.array([1.0, 2.0]), np.array([1, 1, 0]))
        with pytest.raises(DomainError):
            CensoredSample(np.array([1.0, 2.0]), np.array([0, 0]))
        with pytest.raises(DomainError):
            CensoredSample(np.array([1.0, 2.0]), np.array([1, 2]))

    def test_fraction(self):
        assert HAND.censored_fraction == pytest.approx(1 / 3)
        assert HAND.n_events == 2


class TestKaplanMeier:
    def test_hand_example(self):
        sc = censoring_km(HAND)
        assert sc(3.9) == 1.0 and sc(4.0) == 0.5 and sc.left_limit(4.0) == 1.0
        assert np.allclose(ipcw_weights(HAND, sc), [1.0, 0.0, 2.0])
        assert ipcw_mean(HAND) == pytest.approx(14 / 3)
        assert moment_alpha_censored(HAND).alpha == pytest.approx(14 / 11)

    def test_tie_between_event_and_censoring(self):
        s = CensoredSample(np.array([2.0, 2.0, 5.0]), np.array([1, 0, 1]))
        assert np.allclose(ipcw_weights(s), [1.0, 0.0, 1.5])

    def test_uncensored_weights_are_one(self, rng):
        s = CensoredSample.uncensored(1.0 + rng.pareto(3.0, 30))
        assert np.array_equal(ipcw_weights(s), np.ones(30))
        assert fit_alpha_censored(s)[0] == pytest.approx(fit_alpha(s.times)[0], rel=1e-14)

    @given(st.integers(0, 10_000))
    def test_against_loop_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 25))
        times = np.round(rng.exponential(2.0, n), 1) + 0.1
        events = rng.random(n) < 0.6
        events[int(rng.integers(n))] = True
        s = CensoredSample(times, events)
        sc = censoring_km(s)
        for t in np.unique(times):
            assert sc.left_limit(t) == pytest.approx(product_limit_oracle(times, events, t), abs=1e-14)

    def test_censoring_tied_with_last_event(self):
        t = CensoredSample(np.array([2.0, 2.0, 3.0]), np.array([0, 0, 1]))
        assert ipcw_weights(t)[2] == pytest.approx(3.0)
        u = CensoredSample(np.array([2.0, 3.0, 3.5]), np.array([1, 0, 1]))
        assert ipcw_weights(u)[2] == pytest.approx(2.0)

    def test_zero_survival_at_event_raises(self):
        s = CensoredSample(np.array([2.0, 3.0]), np.array([1, 1]))
        exhausted = CensoringSurvival(np.array([1.0]), np.array([0.0]))
        with pytest.raises(EstimationError):
            ipcw_weights(s, exhausted)
