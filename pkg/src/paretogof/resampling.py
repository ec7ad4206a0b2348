"""Critical values by resampling.

Three routes are provided:

* ``DataBootstrap``: resample the observed data with replacement and keep the
  shape estimate of the original sample fixed.
* ``ParametricBootstrap``: draw fresh Pareto samples at the fitted shape and
  re-estimate the shape on each.
* ``FixedNullMonteCarlo``: simulate at a fixed null shape, independently of
  any observed sample, for use in power studies.

Replicate ``k`` always draws from its own stream, seeded by
``SeedSequence(seed, spawn_key=(stream, ..., k))``. Results therefore do not
depend on how replicates are split across worker processes.
"""

from __future__ import annotations

import csv
import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distributions import sample_pareto
from .errors import DomainError, ParetoGofError, ResamplingError
from .estimation import as_sample, fit_alpha
from .registry import STATISTICS, StatisticSpec, resolve

#: Largest tolerated fraction of failed replicates.
MAX_FAILURE_RATE = 0.01
MIN_REPLICATES = 100
MIN_NULL_REPLICATES = 1000
BLOCK_SIZE = 64

# spawn-key stream tags keep the replicate streams of different uses apart
STREAM_DATA_BOOTSTRAP = 1
STREAM_PARAMETRIC_BOOTSTRAP = 2
STREAM_FIXED_NULL = 3

#: Null shapes at which the adaptive critical-value curves are tabulated.
DEFAULT_ALPHA_GRID = (1.0, 1.1, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 4.0, 5.0, 6.5,
                      8.0, 10.0, 15.0, 20.0, 30.0, 50.0)


class CriticalKind(str, enum.Enum):
    TWO_SIDED = "TwoSidedC1C2"
    ONE_SIDED = "OneSidedC3"


class Method(str, enum.Enum):
    DATA_BOOTSTRAP = "DataBootstrap"
    PARAMETRIC_BOOTSTRAP = "ParametricBootstrap"
    FIXED_NULL = "FixedNullMonteCarlo"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("_", "").replace("-", "")
        for m in cls:
            if key in (m.value.lower(), m.name.lower().replace("_", "")):
                return m
        short = {"data": cls.DATA_BOOTSTRAP, "parametric": cls.PARAMETRIC_BOOTSTRAP,
                 "fixednull": cls.FIXED_NULL, "null": cls.FIXED_NULL}
        if key in short:
            return short[key]
        raise DomainError(f"unknown resampling method {value!r}")


@dataclass(frozen=True)
class CriticalValues:
    """Acceptance region ``[lower, upper]`` (two-sided) or ``(-inf, upper]``."""

    kind: CriticalKind
    lower: float | None
    upper: float
    level: float
    replications: int
    method: Method
    seed: int

    def __post_init__(self):
        if not 0 < self.level < 1:
            raise DomainError("level must lie in (0, 1)")
        if self.replications < MIN_REPLICATES:
            raise DomainError(f"need at least {MIN_REPLICATES} replications")
        if self.kind is CriticalKind.TWO_SIDED:
            if self.lower is None or self.lower > self.upper:
                raise DomainError("two-sided critical values need lower <= upper")
        elif self.lower is not None:
            raise DomainError("one-sided critical values have no lower bound")

    @property
    def two_sided(self) -> bool:
        return self.kind is CriticalKind.TWO_SIDED

    def rejects(self, value: float) -> bool:
        if self.two_sided:
            return bool(value < self.lower or value > self.upper)
        return bool(value > self.upper)


def empirical_critical_values(values, level: float, two_sided: bool):
    """Return ``(lower, upper)`` empirical quantiles with linear interpolation.

    ``lower`` is ``None`` in the one-sided case.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ResamplingError("no replicate values")
    if two_sided:
        lo, hi = np.quantile(v, [level / 2.0, 1.0 - level / 2.0], method="linear")
        return float(lo), float(hi)
    return None, float(np.quantile(v, 1.0 - level, method="linear"))


def replicate_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent stream for one replicate, a pure function of ``(seed, key)``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def resolve_seed(rng) -> int:
    if rng is None:
        return 0
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(0, 2**63))
    if isinstance(rng, np.random.SeedSequence):
        return int(rng.generate_state(2, np.uint64).view(np.uint64)[0] >> np.uint64(1))
    return int(rng)


def resolve_workers(parallelism) -> int:
    if parallelism in (None, "auto"):
        return os.cpu_count() or 1
    return max(1, int(parallelism))


def blocks(count: int, size: int = BLOCK_SIZE):
    return [(start, min(start + size, count)) for start in range(0, count, size)]


def parallel_map(fn, tasks, workers: int = 1):
    """Order-preserving map, in-process for one worker."""
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


def _portable(spec: StatisticSpec):
    """Registry entries travel to worker processes by name."""
    return spec.name if STATISTICS.get(spec.name) is spec else spec


def _safe_eval(spec: StatisticSpec, x, alpha) -> float:
    try:
        with np.errstate(all="ignore"):
            value = spec(x, alpha)
    except (ParetoGofError, ArithmeticError):
        return math.nan
    return value if math.isfinite(value) else math.nan


def _finite_or_raise(values: np.ndarray, what: str) -> np.ndarray:
    bad = int(np.count_nonzero(~np.isfinite(values)))
    if bad > MAX_FAILURE_RATE * values.size:
        raise ResamplingError(f"{what}: statistic failed in {bad} of {values.size} replicates")
    return values[np.isfinite(values)]


# -- bootstrap on an observed sample ----------------------------------------------

def _bootstrap_block(task):
    x, alpha, item, method, seed, start, stop = task
    spec = resolve(item)
    n = x.size
    out = np.empty(stop - start)
    for i, k in enumerate(range(start, stop)):
        if method is Method.DATA_BOOTSTRAP:
            rng = replicate_rng(seed, STREAM_DATA_BOOTSTRAP, k)
            out[i] = _safe_eval(spec, x[rng.integers(0, n, n)], alpha)
        else:
            rng = replicate_rng(seed, STREAM_PARAMETRIC_BOOTSTRAP, k)
            xb = sample_pareto(alpha, n, rng)
            out[i] = _safe_eval(spec, xb, fit_alpha(xb, clamp=True)[0])
    return out


def bootstrap_replicates(sample, statistic, B: int = 1000, method=Method.DATA_BOOTSTRAP,
                         rng=None, *, alpha=None, workers: int = 1) -> np.ndarray:
    """Raw bootstrap statistic values; ``NaN`` marks a failed replicate."""
    x = as_sample(sample, 2)
    spec = resolve(statistic)
    method = Method.parse(method)
    if method is Method.FIXED_NULL:
        raise DomainError("use fixed_null_critvals for the fixed-null method")
    if alpha is None:
        alpha = fit_alpha(x, clamp=True)[0]
    seed = resolve_seed(rng)
    tasks = [(x, float(alpha), _portable(spec), method, seed, a, b) for a, b in blocks(B)]
    return np.concatenate(parallel_map(_bootstrap_block, tasks, workers))


def bootstrap_critvals(sample, statistic, level: float = 0.05, B: int = 1000,
                       method=Method.DATA_BOOTSTRAP, rng=None, *, workers: int = 1) -> CriticalValues:
    """Bootstrap critical values for a statistic evaluated on ``sample``.

    With ``DataBootstrap`` the shape estimate of ``sample`` is reused in every
    replicate; with ``ParametricBootstrap`` it is re-estimated on each fresh
    Pareto draw.
    """
    if B < MIN_REPLICATES:
        raise DomainError(f"B must be at least {MIN_REPLICATES}")
    if not 0 < level < 1:
        raise DomainError("level must lie in (0, 1)")
    spec = resolve(statistic)
    method = Method.parse(method)
    seed = resolve_seed(rng)
    values = bootstrap_replicates(sample, spec, B, method, seed, workers=workers)
    values = _finite_or_raise(values, f"{method.value} for {spec.name}")
    lower, upper = empirical_critical_values(values, level, spec.two_sided)
    kind = CriticalKind.TWO_SIDED if spec.two_sided else CriticalKind.ONE_SIDED
    return CriticalValues(kind, lower, upper, level, B, method, seed)


# -- fixed-null Monte Carlo ---------------------------------------------------------

def _null_block(task):
    n, items, seed, null_alpha, start, stop = task
    specs = [resolve(item) for item in items]
    out = np.empty((stop - start, len(specs)))
    for i, k in enumerate(range(start, stop)):
        # the null shape is deliberately absent from the key: samples at
        # different shapes share their uniforms, which smooths the
        # critical-value curves across the shape grid
        x = sample_pareto(null_alpha, n, replicate_rng(seed, STREAM_FIXED_NULL, n, k))
        alpha = fit_alpha(x, clamp=True)[0]
        for j, spec in enumerate(specs):
            out[i, j] = _safe_eval(spec, x, alpha)
    return out


def null_statistic_values(n: int, statistics, reps: int, seed: int = 0, *,
                          null_alpha: float = 1.0, workers: int = 1) -> dict[str, np.ndarray]:
    """Simulate every statistic on the same ``reps`` Pareto(``null_alpha``) samples."""
    if n < 3:
        raise DomainError("fixed-null simulation needs n >= 3")
    specs = [resolve(s) for s in statistics]
    items = [_portable(spec) for spec in specs]
    tasks = [(n, items, int(seed), float(null_alpha), a, b) for a, b in blocks(reps)]
    table = np.vstack(parallel_map(_null_block, tasks, workers))
    return {spec.name: table[:, j] for j, spec in enumerate(specs)}


def cache_key(name: str, null_alpha: float = 1.0) -> str:
    return name if null_alpha == 1.0 else f"{name}@alpha={null_alpha!r}"


def fixed_null_critvals_many(n: int, statistics, level: float = 0.05, reps: int = 10_000,
                             seed: int = 0, *, null_alpha: float = 1.0, cache=None,
                             workers: int = 1) -> dict[str, CriticalValues]:
    """Fixed-null critical values for several statistics from shared samples."""
    if reps < MIN_NULL_REPLICATES:
        raise DomainError(f"reps must be at least {MIN_NULL_REPLICATES}")
    if not 0 < level < 1:
        raise DomainError("level must lie in (0, 1)")
    specs = [resolve(s) for s in statistics]
    seed = resolve_seed(seed)
    result: dict[str, CriticalValues] = {}
    missing = []
    for spec in specs:
        hit = cache.get(cache_key(spec.name, null_alpha), n, level, reps, seed) if cache else None
        if hit is None:
            missing.append(spec)
        else:
            result[spec.name] = _as_critvals(spec, hit, level, reps, seed)
    if missing:
        sims = null_statistic_values(n, missing, reps, seed, null_alpha=null_alpha, workers=workers)
        for spec in missing:
            values = _finite_or_raise(sims[spec.name], f"fixed null for {spec.name}")
            bounds = empirical_critical_values(values, level, spec.two_sided)
            result[spec.name] = _as_critvals(spec, bounds, level, reps, seed)
            if cache is not None:
                cache.put(cache_key(spec.name, null_alpha), n, level, reps, seed, *bounds)
    return {spec.name: result[spec.name] for spec in specs}


def fixed_null_critvals(n: int, statistic, level: float = 0.05, reps: int = 10_000,
                        rng=0, *, null_alpha: float = 1.0, cache=None,
                        workers: int = 1) -> CriticalValues:
    """Critical values from ``reps`` Pareto(``null_alpha``) samples of size ``n``.

    The shape is re-estimated on every simulated sample before the statistic
    is evaluated.
    """
    spec = resolve(statistic)
    out = fixed_null_critvals_many(n, [spec], level, reps, rng, null_alpha=null_alpha,
                                   cache=cache, workers=workers)
    return out[spec.name]


def _as_critvals(spec, bounds, level, reps, seed):
    lower, upper = bounds
    kind = CriticalKind.TWO_SIDED if spec.two_sided else CriticalKind.ONE_SIDED
    return CriticalValues(kind, lower if spec.two_sided else None, upper, level, reps,
                          Method.FIXED_NULL, seed)


# -- shape-adaptive critical values ------------------------------------------------

@dataclass(frozen=True)
class AdaptiveCriticalValues:
    """Fixed-null critical values tabulated over a grid of null shapes.

    :meth:`at` interpolates the bounds linearly in ``log(alpha)`` at a fitted
    shape, holding them constant beyond the ends of the grid. This amounts to
    a parametric bootstrap whose replicates are shared across samples.
    """

    statistic: str
    n: int
    level: float
    reps: int
    seed: int
    alphas: tuple
    lowers: tuple | None
    uppers: tuple
    _log_alphas: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_log_alphas", np.log(np.asarray(self.alphas, dtype=float)))

    @property
    def two_sided(self) -> bool:
        return self.lowers is not None

    def bounds(self, alpha_hat: float):
        t = math.log(alpha_hat) if alpha_hat > 0 else -math.inf
        upper = float(np.interp(t, self._log_alphas, self.uppers))
        lower = float(np.interp(t, self._log_alphas, self.lowers)) if self.two_sided else None
        return lower, upper

    def rejects(self, value: float, alpha_hat: float) -> bool:
        lower, upper = self.bounds(alpha_hat)
        if lower is not None and value < lower:
            return True
        return bool(value > upper)


def adaptive_null_critvals(n: int, statistics, level: float = 0.05, reps: int = 10_000,
                           seed: int = 0, *, grid=DEFAULT_ALPHA_GRID, cache=None,
                           workers: int = 1) -> dict[str, AdaptiveCriticalValues]:
    if len(grid) < 2 or any(a <= 0 for a in grid) or list(grid) != sorted(set(grid)):
        raise DomainError("alpha grid must hold at least two increasing positive values")
    specs = [resolve(s) for s in statistics]
    per_alpha = [fixed_null_critvals_many(n, specs, level, reps, seed, null_alpha=a,
                                          cache=cache, workers=workers) for a in grid]
    out = {}
    for spec in specs:
        cvs = [table[spec.name] for table in per_alpha]
        lowers = tuple(cv.lower for cv in cvs) if spec.two_sided else None
        out[spec.name] = AdaptiveCriticalValues(spec.name, n, level, reps, resolve_seed(seed),
                                                tuple(float(a) for a in grid), lowers,
                                                tuple(cv.upper for cv in cvs))
    return out


# -- persistent cache ----------------------------------------------------------------

CACHE_HEADER = ["statistic", "n", "level", "reps", "seed", "lower", "upper"]
CACHE_FILENAME = "critvals-v1.csv"


def default_cache_dir() -> Path:
    env = os.environ.get("PARETO_GOF_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "paretogof"


class CriticalValueCache:
    """CSV-backed table of critical values keyed by ``(statistic, n, level, reps, seed)``."""

    def __init__(self, directory=None):
        self.directory = Path(directory) if directory is not None else default_cache_dir()
        self.path = self.directory / CACHE_FILENAME
        self._rows: dict[tuple, tuple] | None = None

    @staticmethod
    def _key(statistic, n, level, reps, seed):
        return (str(statistic), int(n), repr(float(level)), int(reps), int(seed))

    def _load(self):
        if self._rows is not None:
            return self._rows
        self._rows = {}
        if self.path.exists():
            with self.path.open(newline="") as fh:
                reader = csv.DictReader(fh)
                if reader.fieldnames != CACHE_HEADER:
                    raise ResamplingError(f"unrecognised cache header in {self.path}")
                for row in reader:
                    key = self._key(row["statistic"], row["n"], float(row["level"]),
                                    row["reps"], row["seed"])
                    lower = float(row["lower"]) if row["lower"] else None
                    self._rows[key] = (lower, float(row["upper"]))
        return self._rows

    def get(self, statistic, n, level, reps, seed):
        return self._load().get(self._key(statistic, n, level, reps, seed))

    def put(self, statistic, n, level, reps, seed, lower, upper):
        rows = self._load()
        key = self._key(statistic, n, level, reps, seed)
        if key in rows:
            return
        rows[key] = (lower, upper)
        self.directory.mkdir(parents=True, exist_ok=True)
        new = not self.path.exists()
        with self.path.open("a", newline="") as fh:
            writer = csv.writer(fh)
            if new:
                writer.writerow(CACHE_HEADER)
            writer.writerow([statistic, int(n), repr(float(level)), int(reps), int(seed),
                             "" if lower is None else repr(float(lower)), repr(float(upper))])

    def __len__(self):
        return len(self._load())
