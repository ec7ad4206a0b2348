"""Stein fixed-point test statistics for complete samples.

Two statistics are provided. The integral type statistic

    D_I = (alpha + 1) * U + alpha / 2

averages the pair kernel ``h1`` over all pairs, and the Cramér-von Mises type
statistic

    D_M = (alpha + 1)**2 * U1 - (alpha + 1) * (U2 - U3) - (2 * alpha + 1) / 3

combines two degree-3 U-statistics with the sample mean of ``1/X``. Both are
zero in expectation when the data are Pareto type-I with shape ``alpha``.

Each statistic has a direct enumeration (``delta_I``, ``delta_M``) and an
accelerated sorted path (``delta_I_fast``, ``delta_M_fast``). The private
kernels accept optional observation weights so that the IPCW versions in
:mod:`paretogof.stein_censored` share the exact same arithmetic.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .distributions import ParetoShape
from .errors import DomainError
from .estimation import as_sample, moment_alpha


class StatisticKind(str, enum.Enum):
    INTEGRAL = "delta_I"
    CVM = "delta_M"


@dataclass(frozen=True)
class SteinStatistic:
    value: float
    alpha_hat: float
    n: int
    kind: StatisticKind

    def __float__(self):
        return self.value


def _alpha_value(sample, alpha) -> float:
    if alpha is None:
        return moment_alpha(sample).alpha
    if isinstance(alpha, ParetoShape):
        return alpha.alpha
    return float(alpha)


def _check_nonzero(x):
    if np.any(x == 0):
        raise DomainError("kernel undefined at zero")


def kernel_h1_pair(x1: float, x2: float) -> float:
    """Symmetric pair kernel of the integral statistic (strict inequalities)."""
    if x1 == 0 or x2 == 0:
        raise DomainError("kernel undefined at zero")
    ratio = 0.0
    if x2 < x1:
        ratio = x2 / x1
    elif x1 < x2:
        ratio = x1 / x2
    return 0.5 * (ratio - 1.0 / x1 - 1.0 / x2)


def kernel_h1_triple(x1, x2, x3):
    """Symmetrised product kernel estimating ``E[(min(X1,X3)-1)(min(X2,X3)-1)/(X1 X2)]``."""
    m12, m13, m23 = np.minimum(x1, x2) - 1, np.minimum(x1, x3) - 1, np.minimum(x2, x3) - 1
    return (m13 * m23 / (x1 * x2) + m12 * m23 / (x1 * x3) + m12 * m13 / (x2 * x3)) / 3.0


def kernel_h2_triple(x1, x2, x3):
    """Symmetrised ``max(Xa,Xb)/Xc * I(max(Xa,Xb) <= Xc)`` kernel (non-strict)."""
    a, b, c = np.maximum(x1, x2), np.maximum(x1, x3), np.maximum(x2, x3)
    return (np.where(a <= x3, a / x3, 0.0) + np.where(b <= x2, b / x2, 0.0)
            + np.where(c <= x1, c / x1, 0.0)) / 3.0


# -- weighted sums over index subsets ---------------------------------------
#
# For weights w, the pair routines return sum_{i<j} h1(x_i, x_j) w_i w_j and
# the triple routines return (sum h1_3 w w w, sum h2_3 w w w) over i<j<k.

def _pair_sum_naive(x, w):
    n = x.size
    xi, xj = np.triu_indices(n, k=1)
    a, b = x[xi], x[xj]
    ratio = np.where(b < a, b / a, np.where(a < b, a / b, 0.0))
    terms = 0.5 * (ratio - 1.0 / a - 1.0 / b) * w[xi] * w[xj]
    return math.fsum(terms)


def _pair_sum_sorted(xs, ws):
    # xs ascending; ratio terms pair each value with all strictly smaller ones
    below = np.searchsorted(xs, xs, side="left")
    prefix = np.concatenate(([0.0], np.cumsum(xs * ws)))
    ratio_part = math.fsum(ws * prefix[below] / xs)
    total_w = math.fsum(ws)
    recip_part = math.fsum(ws / xs * (total_w - ws))
    return 0.5 * (ratio_part - recip_part)


def _triple_indices(n):
    idx = np.array(list(itertools.combinations(range(n), 3)), dtype=np.intp)
    return idx[:, 0], idx[:, 1], idx[:, 2]


def _triple_sums_naive(x, w):
    i, j, k = _triple_indices(x.size)
    a, b, c = x[i], x[j], x[k]
    ww = w[i] * w[j] * w[k]
    return (math.fsum(kernel_h1_triple(a, b, c) * ww),
            math.fsum(kernel_h2_triple(a, b, c) * ww))


def _triple_sums_sorted(xs, ws):
    n = xs.size
    # product kernel: sum over (centre c, unordered pair {a, b} of others) of
    # phi(a, c) phi(b, c) with phi(a, c) = (min(x_a, x_c) - 1) / x_a
    phi = (np.minimum.outer(xs, xs) - 1.0) / xs[:, None]
    np.fill_diagonal(phi, 0.0)
    wphi = phi * ws[:, None]
    r = wphi.sum(axis=0)
    q = (wphi * wphi).sum(axis=0)
    s1 = 0.5 * math.fsum(ws * (r * r - q)) / 3.0

    # max kernel: for centre c, pairs drawn from {a != c : x_a <= x_c}
    excl = np.concatenate(([0.0], np.cumsum(ws)))[:-1]
    vw = xs * ws
    pair_prefix = np.concatenate(([0.0], np.cumsum(vw * excl)))
    val_prefix = np.concatenate(([0.0], np.cumsum(vw)))
    pos = np.arange(n)
    upto = np.searchsorted(xs, xs, side="right")
    pairs = pair_prefix[upto] - ws * (xs * excl + val_prefix[upto] - val_prefix[pos + 1])
    s2 = math.fsum(ws / xs * pairs) / 3.0
    return s1, s2


def _sorted_with_weights(x, w):
    order = np.argsort(x, kind="stable")
    return x[order], w[order]


def _ones(x):
    return np.ones(x.size)


# -- statistic assembly -------------------------------------------------------

def assemble_delta_I(pair_sum: float, n: int, alpha: float) -> float:
    u = 2.0 * pair_sum / (n * (n - 1))
    return (alpha + 1.0) * u + alpha / 2.0


def assemble_delta_M(s1: float, s2: float, recip_sum: float, n: int, alpha: float) -> float:
    ntrip = n * (n - 1) * (n - 2) / 6.0
    u1, u2, u3 = s1 / ntrip, s2 / ntrip, recip_sum / n
    return (alpha + 1.0) ** 2 * u1 - (alpha + 1.0) * (u2 - u3) - (2.0 * alpha + 1.0) / 3.0


def delta_I(sample, alpha=None) -> SteinStatistic:
    """Integral-type statistic by direct enumeration over all pairs.

    ``alpha`` defaults to the moment estimate of the sample.
    """
    x = as_sample(sample, 2)
    _check_nonzero(x)
    a = _alpha_value(x, alpha)
    value = assemble_delta_I(_pair_sum_naive(x, _ones(x)), x.size, a)
    return SteinStatistic(value, a, x.size, StatisticKind.INTEGRAL)


def delta_I_fast(sample, alpha=None) -> SteinStatistic:
    """Integral-type statistic in O(n log n) via sorting and prefix sums."""
    x = as_sample(sample, 2)
    _check_nonzero(x)
    a = _alpha_value(x, alpha)
    xs = np.sort(x)
    value = assemble_delta_I(_pair_sum_sorted(xs, _ones(xs)), xs.size, a)
    return SteinStatistic(value, a, x.size, StatisticKind.INTEGRAL)


def delta_M(sample, alpha=None) -> SteinStatistic:
    """Cramér-von Mises type statistic by enumeration of all index triples."""
    x = as_sample(sample, 3)
    _check_nonzero(x)
    a = _alpha_value(x, alpha)
    w = _ones(x)
    s1, s2 = _triple_sums_naive(x, w)
    value = assemble_delta_M(s1, s2, math.fsum(w / x), x.size, a)
    return SteinStatistic(value, a, x.size, StatisticKind.CVM)


def delta_M_fast(sample, alpha=None) -> SteinStatistic:
    """Cramér-von Mises type statistic in O(n^2) time and memory."""
    x = as_sample(sample, 3)
    _check_nonzero(x)
    a = _alpha_value(x, alpha)
    xs = np.sort(x)
    w = _ones(xs)
    s1, s2 = _triple_sums_sorted(xs, w)
    value = assemble_delta_M(s1, s2, math.fsum(w / xs), xs.size, a)
    return SteinStatistic(value, a, x.size, StatisticKind.CVM)
