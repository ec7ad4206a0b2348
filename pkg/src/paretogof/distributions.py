"""Pareto type-I model, the alternative families used in power studies, and
exponential censoring calibrated to a target censoring fraction.

All samplers take an explicit :class:`numpy.random.Generator` so that callers
control the random stream.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .errors import CalibrationError, DomainError


@dataclass(frozen=True)
class ParetoShape:
    """Shape parameter of the Pareto type-I law ``F(x) = 1 - x**-alpha``."""

    alpha: float

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise DomainError(f"Pareto shape must be positive and finite, got {self.alpha}")

    @property
    def has_finite_mean(self) -> bool:
        return self.alpha > 1


def _shape_value(shape) -> float:
    if isinstance(shape, ParetoShape):
        return shape.alpha
    alpha = float(shape)
    if not alpha > 0:
        raise DomainError(f"Pareto shape must be positive, got {alpha}")
    return alpha


def pareto_cdf(x, shape):
    """CDF of the Pareto type-I law; zero at and below the support boundary 1."""
    alpha = _shape_value(shape)
    x = np.asarray(x, dtype=float)
    out = np.where(x > 1, -np.expm1(-alpha * np.log(np.maximum(x, 1.0))), 0.0)
    return out[()] if out.ndim == 0 else out


def pareto_sf(x, shape):
    alpha = _shape_value(shape)
    x = np.asarray(x, dtype=float)
    out = np.where(x > 1, np.exp(-alpha * np.log(np.maximum(x, 1.0))), 1.0)
    return out[()] if out.ndim == 0 else out


def pareto_quantile(u, shape):
    """Inverse CDF ``(1 - u) ** (-1 / alpha)`` for ``0 <= u < 1``."""
    alpha = _shape_value(shape)
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u >= 1)) or np.any(np.isnan(u)):
        raise DomainError("pareto_quantile requires 0 <= u < 1")
    out = np.exp(-np.log1p(-u) / alpha)
    return out[()] if out.ndim == 0 else out


def sample_pareto(alpha: float, n: int, rng: np.random.Generator) -> np.ndarray:
    return pareto_quantile(rng.random(n), alpha)


class Family(str, enum.Enum):
    PARETO = "P"
    GAMMA = "Gamma"
    LINEAR_FAILURE_RATE = "LF"
    BETA_EXPONENTIAL = "BE"
    TILTED_PARETO = "TP"
    INVERSE_BETA = "IB"
    BENINI = "B"
    EXTREME_VALUE = "EV"

    @classmethod
    def parse(cls, name: str) -> "Family":
        key = name.strip()
        for fam in cls:
            if key.lower() in (fam.value.lower(), fam.name.lower(), fam.name.replace("_", "").lower()):
                return fam
        aliases = {"pareto": cls.PARETO, "gamma": cls.GAMMA, "g": cls.GAMMA, "benini": cls.BENINI}
        try:
            return aliases[key.lower()]
        except KeyError:
            raise DomainError(f"unknown distribution family {name!r}") from None


@dataclass(frozen=True)
class AlternativeSpec:
    """A named distribution family with its single parameter.

    For :attr:`Family.PARETO` the parameter is the shape ``alpha``; for the
    others it is the family parameter ``lambda``.
    """

    family: Family
    lam: float

    def __post_init__(self):
        if not isinstance(self.family, Family):
            object.__setattr__(self, "family", Family.parse(str(self.family)))
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError(f"family parameter must be positive, got {self.lam}")

    @classmethod
    def parse(cls, text: str) -> "AlternativeSpec":
        """Parse labels such as ``"P(5)"``, ``"Gamma(0.5)"`` or ``"TP(1)"``."""
        text = text.strip()
        if not text.endswith(")") or "(" not in text:
            raise DomainError(f"cannot parse alternative {text!r}; expected e.g. 'TP(0.5)'")
        name, _, rest = text.partition("(")
        try:
            lam = float(rest[:-1])
        except ValueError:
            raise DomainError(f"bad parameter in {text!r}") from None
        return cls(Family.parse(name), lam)

    @property
    def label(self) -> str:
        return f"{self.family.value}({self.lam:g})"

    @property
    def is_null(self) -> bool:
        return self.family is Family.PARETO

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return sample_alternative(self, n, rng)

    def sf(self, x):
        return survival_function(self, x)

    def cdf(self, x):
        return 1.0 - survival_function(self, x)


def _sample_extreme_value(lam, n, rng):
    out = -lam * np.log(-np.log(rng.random(n)))
    # zero (or u == 0 giving inf) is redrawn; both have probability ~0
    bad = (out == 0) | ~np.isfinite(out)
    while bad.any():
        out[bad] = -lam * np.log(-np.log(rng.random(int(bad.sum()))))
        bad = (out == 0) | ~np.isfinite(out)
    return out


def sample_alternative(spec: AlternativeSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` values from ``spec``.

    Gamma, linear failure rate and beta exponential are drawn in their
    standard form and shifted by one. The remaining families on ``[1, inf)``
    use closed-form inversion (inverse beta through a reciprocal Beta draw).
    The extreme value family is a Gumbel on the whole real line.
    """
    if n < 1:
        raise DomainError("sample size must be at least 1")
    lam = spec.lam
    fam = spec.family
    if fam is Family.PARETO:
        return sample_pareto(lam, n, rng)
    if fam is Family.GAMMA:
        return 1.0 + rng.gamma(lam, 1.0, n)
    if fam is Family.EXTREME_VALUE:
        return _sample_extreme_value(lam, n, rng)
    u = rng.random(n)
    if fam is Family.LINEAR_FAILURE_RATE:
        # integrated hazard y + lam*y^2/2 = E, solved in cancellation-free form
        e = -np.log1p(-u)
        return 1.0 + 2.0 * e / (1.0 + np.sqrt(1.0 + 2.0 * lam * e))
    if fam is Family.BETA_EXPONENTIAL:
        return 1.0 - np.log1p(-(u ** (1.0 / lam)))
    if fam is Family.TILTED_PARETO:
        return (1.0 + lam) / (1.0 - u) - lam
    if fam is Family.INVERSE_BETA:
        return 1.0 / rng.beta(1.0, lam + 1.0, n)
    if fam is Family.BENINI:
        e = -np.log1p(-u)
        return np.exp(2.0 * e / (1.0 + np.sqrt(1.0 + 4.0 * lam * e)))
    raise DomainError(f"no sampler for {fam}")  # pragma: no cover


def survival_function(spec: AlternativeSpec, x):
    """Closed-form ``P(X > x)`` for every supported family."""
    lam = spec.lam
    fam = spec.family
    x = np.asarray(x, dtype=float)
    if fam is Family.EXTREME_VALUE:
        out = -np.expm1(-np.exp(-x / lam))
        return out[()] if out.ndim == 0 else out
    y = np.maximum(x - 1.0, 0.0)
    lx = np.log(np.maximum(x, 1.0))
    if fam is Family.PARETO:
        out = np.exp(-lam * lx)
    elif fam is Family.GAMMA:
        out = special.gammaincc(lam, y)
    elif fam is Family.LINEAR_FAILURE_RATE:
        with np.errstate(over="ignore"):  # far tail underflows to 0
            out = np.exp(-y - 0.5 * lam * y * y)
    elif fam is Family.BETA_EXPONENTIAL:
        out = 1.0 - (-np.expm1(-y)) ** lam
    elif fam is Family.TILTED_PARETO:
        out = (1.0 + lam) / (np.maximum(x, 1.0) + lam)
    elif fam is Family.INVERSE_BETA:
        out = 1.0 - (1.0 - 1.0 / np.maximum(x, 1.0)) ** (lam + 1.0)
    elif fam is Family.BENINI:
        out = np.exp(-lx - lam * lx * lx)
    else:  # pragma: no cover
        raise DomainError(f"no survival function for {fam}")
    out = np.where(x > 1.0, out, 1.0)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class CensoringPlan:
    """Exponential censoring ``C ~ Exp(rate_b)`` aimed at ``P(X > C) = target_fraction``."""

    rate_b: float
    target_fraction: float
    achieved_fraction: float = float("nan")

    def __post_init__(self):
        if not self.rate_b > 0:
            raise DomainError("censoring rate must be positive")
        if not 0 < self.target_fraction < 1:
            raise DomainError("target censoring fraction must lie in (0, 1)")

    def sample_times(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.exponential(1.0 / self.rate_b, n)

    def censor(self, lifetimes: np.ndarray, rng: np.random.Generator):
        """Return observed times ``min(X, C)`` and event flags ``X <= C``."""
        c = self.sample_times(len(lifetimes), rng)
        return np.minimum(lifetimes, c), lifetimes <= c


def censoring_probability(spec: AlternativeSpec, rate_b: float) -> float:
    """``P(X > C)`` for exponential ``C`` with rate ``rate_b``.

    Evaluates ``E[S_X(C)]`` after the change of variables ``c = -log(v)/b``,
    which maps the integral onto ``v`` in ``(0, 1]``.
    """
    if rate_b <= 0:
        return 0.0

    def integrand(v):
        if v <= 0.0:
            return 0.0
        return float(survival_function(spec, -math.log(v) / rate_b))

    # S_X(c) == 1 for c <= 1 on [1, inf) families, i.e. v >= exp(-b)
    if spec.family is Family.EXTREME_VALUE:
        val, _ = integrate.quad(integrand, 0.0, 1.0, limit=200, epsabs=1e-12, epsrel=1e-10)
        return val
    v1 = math.exp(-rate_b)
    val, _ = integrate.quad(integrand, 0.0, v1, limit=200, epsabs=1e-12, epsrel=1e-10)
    return val + (1.0 - v1)


def calibrate_censoring(spec: AlternativeSpec, target: float, *, xtol: float = 1e-8,
                        tolerance: float = 0.005) -> CensoringPlan:
    """Find the exponential censoring rate giving ``P(X > C) = target``.

    The censoring probability increases with the rate, so the root is
    bracketed by doubling and then located by bisection.
    """
    if not 0 < target < 1:
        raise DomainError("target censoring fraction must lie in (0, 1)")

    def gap(b):
        return censoring_probability(spec, b) - target

    lo, hi = 0.0, 1.0
    while gap(hi) < 0:
        lo, hi = hi, hi * 2.0
        if hi > 1e12:
            raise CalibrationError(f"censoring fraction {target} unattainable for {spec.label}")
    lo_for_search = lo if lo > 0 else min(hi, 1.0) * 1e-300
    if gap(lo_for_search) > 0:
        raise CalibrationError(f"censoring fraction {target} unattainable for {spec.label}")
    b = optimize.bisect(gap, lo_for_search, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)
    achieved = censoring_probability(spec, b)
    if abs(achieved - target) > tolerance:
        raise CalibrationError(
            f"calibration for {spec.label} reached {achieved:.4f}, target {target}")
    return CensoringPlan(rate_b=b, target_fraction=target, achieved_fraction=achieved)
