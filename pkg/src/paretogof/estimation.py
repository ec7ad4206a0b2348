"""Moment estimation of the Pareto shape for complete and right-censored
samples, and the product-limit estimator of the censoring survival function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import ParetoShape
from .errors import DomainError, EstimationError

#: Sample means at or below 1 are replaced by this value when clamping.
CLAMPED_MEAN = 1.0 + 1e-9


def as_sample(values, min_size: int = 2) -> np.ndarray:
    """Validate a complete sample and return it as a float array."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size < min_size:
        raise DomainError(f"sample needs at least {min_size} observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DomainError("sample contains non-finite values")
    return x


@dataclass(frozen=True)
class CensoredSample:
    """Right-censored observations ``Y = min(X, C)`` with ``event = (X <= C)``."""

    times: np.ndarray
    events: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).ravel()
        d = np.asarray(self.events).ravel()
        if t.shape != d.shape:
            raise DomainError("times and events must have equal length")
        if t.size < 2:
            raise DomainError("censored sample needs at least 2 observations")
        if not np.all(np.isfinite(t)):
            raise DomainError("censored sample contains non-finite times")
        if d.dtype != bool:
            if not np.all(np.isin(d, (0, 1))):
                raise DomainError("event indicators must be 0 or 1")
            d = d.astype(bool)
        if not d.any():
            raise DomainError("censored sample has no uncensored observation")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "events", d)

    @classmethod
    def uncensored(cls, values) -> "CensoredSample":
        x = np.asarray(values, dtype=float)
        return cls(x, np.ones(x.shape, dtype=bool))

    @property
    def n(self) -> int:
        return self.times.size

    @property
    def n_events(self) -> int:
        return int(self.events.sum())

    @property
    def censored_fraction(self) -> float:
        return 1.0 - self.n_events / self.n


@dataclass(frozen=True)
class CensoringSurvival:
    """Step function estimate of ``P(C > t)``.

    ``survival_values[k]`` is the value on ``[jump_times[k], jump_times[k+1])``.
    """

    jump_times: np.ndarray
    survival_values: np.ndarray

    def __call__(self, t):
        idx = np.searchsorted(self.jump_times, t, side="right")
        return self._lookup(idx)

    def left_limit(self, t):
        """Value just before ``t``, excluding any jump located at ``t``."""
        idx = np.searchsorted(self.jump_times, t, side="left")
        return self._lookup(idx)

    def _lookup(self, idx):
        table = np.concatenate(([1.0], self.survival_values))
        out = table[idx]
        return out[()] if np.ndim(out) == 0 else out


def censoring_km(sample: CensoredSample) -> CensoringSurvival:
    """Product-limit estimator of the censoring survival function.

    Censored observations are the events of this process; the risk set at
    ``t`` counts all observations with ``Y >= t``.
    """
    y = sample.times
    cens_times = np.unique(y[~sample.events])
    if cens_times.size == 0:
        return CensoringSurvival(np.empty(0), np.empty(0))
    ys = np.sort(y)
    at_risk = ys.size - np.searchsorted(ys, cens_times, side="left")
    yc = np.sort(y[~sample.events])
    deaths = np.searchsorted(yc, cens_times, side="right") - np.searchsorted(yc, cens_times, side="left")
    surv = np.cumprod(1.0 - deaths / at_risk)
    return CensoringSurvival(cens_times, surv)


def ipcw_weights(sample: CensoredSample, sc: CensoringSurvival | None = None) -> np.ndarray:
    """``delta_i / S_c(Y_i-)``; censored observations get weight zero."""
    if sc is None:
        sc = censoring_km(sample)
    w = np.zeros(sample.n)
    ev = sample.events
    s_left = np.asarray(sc.left_limit(sample.times[ev]), dtype=float)
    if np.any(s_left <= 0):
        raise EstimationError("censoring survival estimate is zero at an uncensored time")
    w[ev] = 1.0 / s_left
    return w


def ipcw_mean(sample: CensoredSample, sc: CensoringSurvival | None = None) -> float:
    """IPCW estimate of the lifetime mean, ``(1/n) sum Y_i w_i``."""
    w = ipcw_weights(sample, sc)
    if not np.any(w):
        raise EstimationError("all IPCW weights are zero")
    return float(np.sum(sample.times * w)) / sample.n


def _alpha_from_mean(mean: float, clamp: bool) -> tuple[float, bool]:
    if not math.isfinite(mean):
        raise EstimationError(f"sample mean is not finite ({mean})")
    if mean <= 1.0:
        if not clamp:
            raise EstimationError(
                f"moment estimator undefined: mean {mean:.6g} <= 1 (requires alpha > 1)")
        return CLAMPED_MEAN / (CLAMPED_MEAN - 1.0), True
    return mean / (mean - 1.0), False


def moment_alpha(sample, *, clamp: bool = False) -> ParetoShape:
    """Moment estimator ``mean / (mean - 1)`` of the Pareto shape.

    With ``clamp=True`` a mean at or below one is replaced by
    :data:`CLAMPED_MEAN` instead of raising :class:`EstimationError`; use
    :func:`fit_alpha` to learn whether that happened.
    """
    alpha, _ = fit_alpha(sample, clamp=clamp)
    return ParetoShape(alpha)


def fit_alpha(sample, *, clamp: bool = True) -> tuple[float, bool]:
    """Return ``(alpha_hat, flagged)`` where ``flagged`` marks a clamped mean."""
    x = np.asarray(sample, dtype=float)
    return _alpha_from_mean(float(np.mean(x)), clamp)


def moment_alpha_censored(sample: CensoredSample, sc: CensoringSurvival | None = None,
                          *, clamp: bool = False) -> ParetoShape:
    alpha, _ = fit_alpha_censored(sample, sc, clamp=clamp)
    return ParetoShape(alpha)


def fit_alpha_censored(sample: CensoredSample, sc: CensoringSurvival | None = None,
                       *, clamp: bool = True) -> tuple[float, bool]:
    return _alpha_from_mean(ipcw_mean(sample, sc), clamp)
