"""IPCW versions of the Stein statistics for right-censored samples.

Uncensored observations are reweighted by ``1 / S_c(Y_i-)``, where ``S_c`` is
the product-limit estimate of the censoring survival function. The statistic
is standardised by a reweighted variance estimate and compared with normal
quantiles: two-sided for the integral statistic and upper one-sided for the
Cramér-von Mises type statistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import DomainError
from .estimation import (
    CensoredSample,
    censoring_km,
    fit_alpha_censored,
    ipcw_weights,
)
from .stein_complete import (
    StatisticKind,
    _check_nonzero,
    _pair_sum_naive,
    _pair_sum_sorted,
    _sorted_with_weights,
    _triple_sums_naive,
    _triple_sums_sorted,
    assemble_delta_I,
    assemble_delta_M,
)


@dataclass(frozen=True)
class CensoredTestOutcome:
    statistic: float
    sigma_hat: float
    z_value: float
    alpha_hat_c: float
    reject: bool
    level: float
    kind: StatisticKind
    n: int
    flagged: bool = False

    @property
    def p_value(self) -> float:
        if self.kind is StatisticKind.INTEGRAL:
            return float(2.0 * norm.sf(abs(self.z_value)))
        return float(norm.sf(self.z_value))


def normal_decision(statistic: float, sigma_hat: float, n: int, level: float,
                    kind: StatisticKind) -> tuple[float, bool]:
    """Return ``(z, reject)`` for ``z = sqrt(n) * statistic / sigma_hat``."""
    if not 0 < level < 1:
        raise DomainError("level must lie in (0, 1)")
    if not sigma_hat > 0:
        return math.copysign(math.inf, statistic) if statistic else 0.0, statistic != 0
    z = math.sqrt(n) * statistic / sigma_hat
    if kind is StatisticKind.INTEGRAL:
        return z, abs(z) > norm.isf(level / 2.0)
    return z, z > norm.isf(level)


def _prepare(sample: CensoredSample, min_events: int):
    if not isinstance(sample, CensoredSample):
        raise DomainError("expected a CensoredSample")
    if sample.n_events < min_events:
        raise DomainError(f"need at least {min_events} uncensored observations, got {sample.n_events}")
    _check_nonzero(sample.times)
    sc = censoring_km(sample)
    w = ipcw_weights(sample, sc)
    alpha, flagged = fit_alpha_censored(sample, sc, clamp=True)
    return w, alpha, flagged


def delta_I_censored_value(sample: CensoredSample, *, method: str = "fast"):
    """Return ``(statistic, alpha_hat_c, weights, flagged)`` for the IPCW integral statistic."""
    w, alpha, flagged = _prepare(sample, 2)
    y = sample.times
    if method == "naive":
        pair = _pair_sum_naive(y, w)
    else:
        ys, ws = _sorted_with_weights(y, w)
        pair = _pair_sum_sorted(ys, ws)
    return assemble_delta_I(pair, sample.n, alpha), alpha, w, flagged


def delta_M_censored_value(sample: CensoredSample, *, method: str = "fast"):
    """Return ``(statistic, alpha_hat_c, weights, flagged)`` for the IPCW CvM-type statistic."""
    w, alpha, flagged = _prepare(sample, 3)
    y = sample.times
    if method == "naive":
        s1, s2 = _triple_sums_naive(y, w)
        recip = math.fsum(w / y)
    else:
        ys, ws = _sorted_with_weights(y, w)
        s1, s2 = _triple_sums_sorted(ys, ws)
        recip = math.fsum(ws / ys)
    return assemble_delta_M(s1, s2, recip, sample.n, alpha), alpha, w, flagged


# -- reweighted variance estimators ----------------------------------------------

def _reweighted_sigma2(y, events, eps, factor, *, squared_risk_mean: bool):
    n = y.size
    later = y[None, :] > y[:, None]          # later[i, j] = Y_j > Y_i
    n_later = later.sum(axis=1)
    risk_sum = later @ eps
    with np.errstate(invalid="ignore", divide="ignore"):
        w_hat = np.where(n_later > 0, risk_sum / n_later, 0.0)
    if squared_risk_mean:
        w_hat = w_hat * w_hat
    beta = w_hat * (~events)
    at_risk = n - np.searchsorted(np.sort(y), y, side="left")   # #{l : Y_l >= Y_j}
    comp = (later.T.astype(float) @ (beta / at_risk))           # sum_j beta_j I(Y_i > Y_j) / R(Y_j)
    n_corrections = 2 if squared_risk_mean else 1
    v = eps + beta - n_corrections * comp
    return factor / (n - 1) * float(np.sum((v - v.mean()) ** 2))


def conditional_kernel_I(y, w, alpha):
    """``h1_hat(Y_i) = (1/n) sum_j h(Y_i, Y_j) w_j`` with the full integral-statistic kernel."""
    a, b = y[:, None], y[None, :]
    ratio = np.where(b < a, b / a, np.where(a < b, a / b, 0.0))
    h = 0.5 * (alpha + 1.0) * (ratio - 1.0 / a - 1.0 / b) + 0.5 * alpha
    return h @ w / y.size


def conditional_kernel_M(y, w, alpha):
    """``h2_hat(Y_i) = (1/n^2) sum_{j,k} h(Y_i, Y_j, Y_k) w_j w_k``, evaluated in O(n^2).

    The double sum runs over all ``j, k`` including the diagonal and ``i``
    itself; it is split into matrix-vector products of the separate kernel
    terms.
    """
    n = y.size
    total_w = math.fsum(w)
    phi = (np.minimum.outer(y, y) - 1.0) / y[:, None]      # phi[p, c] = (min(y_p, y_c) - 1) / y_p
    rho = w @ phi                                          # rho_k = sum_j w_j phi[j, k]
    prod_terms = 2.0 * (phi @ (w * rho)) + rho ** 2

    le = y[:, None] <= y[None, :]                          # le[i, k] = y_i <= y_k
    w_le = le.T.astype(float) @ w                          # sum_j w_j I(y_j <= y_i)
    wy_le = le.T.astype(float) @ (w * y)                   # sum_j w_j y_j I(y_j <= y_i)
    lt = y[:, None] < y[None, :]
    w_lt = lt.T.astype(float) @ w
    w_eq = w_le - w_lt
    inv = w / y
    upper_inv = le.astype(float) @ inv                     # sum_{k: y_k >= y_i} w_k / y_k
    upper_inv_p = le.astype(float) @ (inv * wy_le)
    centre_other = (y * w_le - wy_le) * upper_inv + upper_inv_p
    m = y * w * (2.0 * w_lt + w_eq)
    centre_self = (le.T.astype(float) @ m) / y
    recip = math.fsum(inv)
    max_terms = 2.0 * centre_other + centre_self - total_w ** 2 / y - 2.0 * total_w * recip

    out = ((alpha + 1.0) ** 2 / 3.0 * prod_terms - (alpha + 1.0) / 3.0 * max_terms
           - (2.0 * alpha + 1.0) / 3.0 * total_w ** 2)
    return out / (n * n)


def variance_I_censored(sample: CensoredSample, *, alpha=None, weights=None) -> float:
    """Reweighted estimate of the asymptotic variance of ``sqrt(n) * D_Ic`` (factor 4 included)."""
    if sample.n < 3:
        raise DomainError("variance estimate needs n >= 3")
    if weights is None or alpha is None:
        weights_, alpha_, _ = _prepare(sample, 2)
        weights = weights_ if weights is None else weights
        alpha = alpha_ if alpha is None else alpha
    y = sample.times
    eps = conditional_kernel_I(y, weights, alpha) * weights
    return _reweighted_sigma2(y, sample.events, eps, 4.0, squared_risk_mean=False)


def variance_M_censored(sample: CensoredSample, *, alpha=None, weights=None) -> float:
    """Reweighted estimate of the asymptotic variance of ``sqrt(n) * D_Mc`` (factor 9 included)."""
    if sample.n < 3:
        raise DomainError("variance estimate needs n >= 3")
    if weights is None or alpha is None:
        weights_, alpha_, _ = _prepare(sample, 3)
        weights = weights_ if weights is None else weights
        alpha = alpha_ if alpha is None else alpha
    y = sample.times
    eps = conditional_kernel_M(y, weights, alpha) * weights
    return _reweighted_sigma2(y, sample.events, eps, 9.0, squared_risk_mean=True)


def delta_I_censored(sample: CensoredSample, level: float = 0.05) -> CensoredTestOutcome:
    """IPCW integral statistic with its two-sided normal rejection rule."""
    stat, alpha, w, flagged = delta_I_censored_value(sample)
    sigma = math.sqrt(variance_I_censored(sample, alpha=alpha, weights=w))
    z, reject = normal_decision(stat, sigma, sample.n, level, StatisticKind.INTEGRAL)
    return CensoredTestOutcome(stat, sigma, z, alpha, bool(reject), level,
                               StatisticKind.INTEGRAL, sample.n, flagged)


def delta_M_censored(sample: CensoredSample, level: float = 0.05) -> CensoredTestOutcome:
    """IPCW Cramér-von Mises type statistic with its upper one-sided normal rule."""
    stat, alpha, w, flagged = delta_M_censored_value(sample)
    sigma = math.sqrt(variance_M_censored(sample, alpha=alpha, weights=w))
    z, reject = normal_decision(stat, sigma, sample.n, level, StatisticKind.CVM)
    return CensoredTestOutcome(stat, sigma, z, alpha, bool(reject), level,
                               StatisticKind.CVM, sample.n, flagged)
