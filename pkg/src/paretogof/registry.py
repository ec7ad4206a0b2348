"""Name-indexed catalogue of the thirteen complete-data test statistics.

Each entry knows how to compute its statistic from a raw sample and a fitted
shape, and which tail of its null distribution leads to rejection.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import competitors as comp
from .errors import DomainError
from .stein_complete import delta_I_fast, delta_M_fast


class Sidedness(str, enum.Enum):
    TWO_SIDED = "two-sided"
    UPPER = "upper"


@dataclass(frozen=True)
class StatisticSpec:
    name: str
    compute: Callable[[np.ndarray, float], float]
    sidedness: Sidedness
    label: str = ""

    @property
    def two_sided(self) -> bool:
        return self.sidedness is Sidedness.TWO_SIDED

    def __call__(self, x, alpha) -> float:
        return float(self.compute(np.asarray(x, dtype=float), float(alpha)))


def _entry(name, fn, side, label):
    return name, StatisticSpec(name, fn, side, label)


_TWO, _UP = Sidedness.TWO_SIDED, Sidedness.UPPER

STATISTICS: dict[str, StatisticSpec] = dict([
    _entry("delta_I", lambda x, a: delta_I_fast(x, a).value, _TWO, "Delta_I"),
    _entry("delta_M", lambda x, a: delta_M_fast(x, a).value, _UP, "Delta_M"),
    _entry("T1", lambda x, a: comp.stat_T(x, a, "T1"), _UP, "T1(3,0.5)"),
    _entry("T2", lambda x, a: comp.stat_T(x, a, "T2"), _UP, "T2(3,0.5)"),
    _entry("ZA", lambda x, a: comp.stat_zhang(x, a, "ZA"), _UP, "ZA"),
    _entry("ZB", lambda x, a: comp.stat_zhang(x, a, "ZB"), _UP, "ZB"),
    _entry("ME", lambda x, a: comp.stat_me(x, a), _UP, "ME"),
    _entry("OJ", lambda x, a: comp.stat_oj(x), _TWO, "OJ"),
    _entry("Inm", lambda x, a: comp.stat_allison(x, "Inm"), _TWO, "I(n,2)"),
    _entry("Mnm", lambda x, a: comp.stat_allison(x, "Mnm"), _UP, "M(n,2)"),
    _entry("CvM", lambda x, a: comp.stat_edf(x, a, "CvM"), _UP, "CvM"),
    _entry("AD", lambda x, a: comp.stat_edf(x, a, "AD"), _UP, "AD"),
    _entry("KS", lambda x, a: comp.stat_edf(x, a, "KS"), _UP, "KS"),
])

#: Statistics that have an IPCW version for right-censored data.
CENSORED_STATISTICS = ("delta_I", "delta_M")

_ALIASES = {"deltai": "delta_I", "di": "delta_I", "deltam": "delta_M", "dm": "delta_M"}


def resolve(name) -> StatisticSpec:
    if isinstance(name, StatisticSpec):
        return name
    key = str(name).strip()
    if key in STATISTICS:
        return STATISTICS[key]
    folded = {k.lower(): k for k in STATISTICS}
    low = key.lower().replace("_", "")
    if key.lower() in folded:
        return STATISTICS[folded[key.lower()]]
    if low in _ALIASES:
        return STATISTICS[_ALIASES[low]]
    raise DomainError(f"unknown test statistic {name!r}; known: {', '.join(STATISTICS)}")
