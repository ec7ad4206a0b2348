"""Competing goodness-of-fit statistics for the Pareto type-I family.

Every statistic that needs the hypothesised CDF evaluates it at the fitted
shape ``alpha``; the fitted CDF values are clamped to ``[1e-12, 1 - 1e-12]``
so that logarithms and ratios stay finite for data outside the support.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .distributions import ParetoShape, pareto_cdf
from .errors import DomainError

F_CLAMP = 1e-12


class CompetitorKind(str, enum.Enum):
    T1 = "T1"
    T2 = "T2"
    ZA = "ZA"
    ZB = "ZB"
    ME = "ME"
    OJ = "OJ"
    INM = "Inm"
    MNM = "Mnm"
    CVM = "CvM"
    AD = "AD"
    KS = "KS"


def _alpha(alpha) -> float:
    return alpha.alpha if isinstance(alpha, ParetoShape) else float(alpha)


def _values(sample, min_size=1) -> np.ndarray:
    x = np.asarray(sample, dtype=float).ravel()
    if x.size < min_size:
        raise DomainError(f"need at least {min_size} observations")
    if not np.all(np.isfinite(x)):
        raise DomainError("sample contains non-finite values")
    return x


def _require_positive(x, name):
    if np.any(x <= 0):
        raise DomainError(f"{name} is undefined for non-positive observations")


def fitted_cdf(sample, alpha) -> np.ndarray:
    """Sorted fitted CDF values ``F(X_(1)) <= ... <= F(X_(n))``, clamped."""
    x = np.sort(_values(sample))
    return np.clip(pareto_cdf(x, _alpha(alpha)), F_CLAMP, 1.0 - F_CLAMP)


# -- characteristic-function statistics ------------------------------------------

def laplace_weight_transform(b, a):
    """``integral exp(-i t b) exp(-a |t|) dt``."""
    return 2.0 * a / (a * a + b * b)


def normal_weight_transform(b, a):
    """``integral exp(-i t b) exp(-a t^2) dt``."""
    return math.sqrt(math.pi / a) * np.exp(-b * b / (4.0 * a))


def stat_T(sample, alpha, kind="T1", m: int = 3, a: float = 0.5) -> float:
    """Weighted L2 distance between the two sides of the ``X**(1/m)`` vs
    ``min(X_1..X_m)`` characterisation, in closed form.

    ``kind="T1"`` uses the Laplace weight ``exp(-a|t|)``, ``"T2"`` the normal
    weight ``exp(-a t^2)``.
    """
    kind = CompetitorKind(kind)
    if kind not in (CompetitorKind.T1, CompetitorKind.T2):
        raise DomainError(f"stat_T handles T1/T2, not {kind.value}")
    if a <= 0 or m < 2:
        raise DomainError("stat_T needs a > 0 and m >= 2")
    x = _values(sample)
    _require_positive(x, "T statistic")
    transform = laplace_weight_transform if kind is CompetitorKind.T1 else normal_weight_transform
    u = x ** (1.0 / m)
    c = x ** (-_alpha(alpha) * (m - 1))
    uu = transform(u[:, None] - u[None, :], a)
    ux = transform(u[:, None] - x[None, :], a)
    xx = transform(x[:, None] - x[None, :], a)
    total = uu.sum() / (m * m) - 2.0 * (ux @ c).sum() / m + c @ xx @ c
    return float(total) / x.size


# -- likelihood-ratio statistics ----------------------------------------------

def stat_zhang(sample, alpha, kind="ZA") -> float:
    """Zhang's likelihood-ratio statistics ``ZA`` and ``ZB``."""
    kind = CompetitorKind(kind)
    f = fitted_cdf(sample, alpha)
    n = f.size
    j = np.arange(1, n + 1)
    if kind is CompetitorKind.ZA:
        return float(-np.sum(np.log(f) / (n - j + 0.5) + np.log1p(-f) / (j - 0.5)))
    if kind is CompetitorKind.ZB:
        num = 1.0 / f - 1.0
        den = (n - 0.5) / (j - 0.75) - 1.0
        return float(np.sum(np.log(num / den) ** 2))
    raise DomainError(f"stat_zhang handles ZA/ZB, not {kind.value}")


def stat_me(sample, alpha, a: float = 0.5) -> float:
    """Meintanis' weighted-L2 statistic on the probability-integral transform."""
    if a <= 0:
        raise DomainError("ME tuning parameter must be positive")
    uhat = fitted_cdf(sample, alpha)
    n = uhat.size
    diff = uhat[:, None] - uhat[None, :]
    first = np.sum(2.0 * a / (diff * diff + a * a)) / n
    second = 4.0 * np.sum(np.arctan(uhat / a) + np.arctan((1.0 - uhat) / a))
    third = 2.0 * n * (2.0 * math.atan(1.0 / a) - a * math.log1p(1.0 / (a * a)))
    return float(first - second + third)


# -- characterisation-based, parameter free ------------------------------------

def stat_oj(sample) -> float:
    """Obradović-Jovanović-Milošević integral statistic ``int (M_n - F_n) dF_n``.

    ``M_n`` is the empirical CDF of ``max(X_i/X_j, X_j/X_i)`` over pairs; the
    empirical CDF at the ``k``-th order statistic is taken as ``k/n``.
    """
    x = np.sort(_values(sample, 2))
    _require_positive(x, "OJ")
    n = x.size
    i, j = np.triu_indices(n, k=1)
    ratios = np.sort(x[j] / x[i])  # x sorted, so x[j] >= x[i]
    m_n = np.searchsorted(ratios, x, side="right") / ratios.size
    f_n = np.arange(1, n + 1) / n
    return float(np.mean(m_n - f_n))


def allison_discrepancy(sample, points, m: int = 2) -> np.ndarray:
    """``Delta_{n,m}(t)``: empirical CDF of ``X**(1/m)`` minus that of ``min`` of ``m`` draws.

    The ``n**m`` enumeration of minima collapses to ``1 - (#{X_j > t}/n)**m``.
    """
    x = np.sort(_values(sample, 2))
    t = np.asarray(points, dtype=float)
    n = x.size
    root_cdf = np.searchsorted(x ** (1.0 / m), t, side="right") / n
    above = n - np.searchsorted(x, t, side="right")
    return root_cdf - (1.0 - (above / n) ** m)


def stat_allison(sample, kind="Inm", m: int = 2) -> float:
    """Allison et al. integral (``Inm``) and squared (``Mnm``) statistics."""
    kind = CompetitorKind(kind)
    if m < 2:
        raise DomainError("m must be at least 2")
    x = _values(sample, 2)
    _require_positive(x, "Allison statistic")
    pts = x[x >= 1.0]
    disc = allison_discrepancy(x, pts, m)
    if kind is CompetitorKind.INM:
        return float(np.sum(disc)) / x.size
    if kind is CompetitorKind.MNM:
        return float(np.sum(disc * disc)) / x.size
    raise DomainError(f"stat_allison handles Inm/Mnm, not {kind.value}")


# -- classical EDF statistics --------------------------------------------------

def stat_edf(sample, alpha, kind="CvM") -> float:
    kind = CompetitorKind(kind)
    f = fitted_cdf(sample, alpha)
    n = f.size
    i = np.arange(1, n + 1)
    if kind is CompetitorKind.CVM:
        return float(np.sum((f - (2 * i - 1) / (2.0 * n)) ** 2) + 1.0 / (12.0 * n))
    if kind is CompetitorKind.AD:
        return float(-n - np.sum((2 * i - 1) * (np.log(f) + np.log1p(-f[::-1]))) / n)
    if kind is CompetitorKind.KS:
        return float(np.max(np.maximum(i / n - f, f - (i - 1) / n)))
    raise DomainError(f"stat_edf handles CvM/AD/KS, not {kind.value}")
