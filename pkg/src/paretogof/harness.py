"""Monte Carlo size and power studies for complete and right-censored data.

Work is split into cells ``(alternative, n, censoring)`` and each cell into
replication blocks of 64. Replicate ``k`` of a cell draws from a stream that
depends only on the seed, the cell and ``k``, so a study gives identical
results for any number of worker processes.
"""

from __future__ import annotations

import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distributions import AlternativeSpec, Family, calibrate_censoring
from .errors import CalibrationError, ConfigError, ParetoGofError
from .estimation import CensoredSample, fit_alpha
from .registry import CENSORED_STATISTICS, STATISTICS, resolve
from .resampling import (
    DEFAULT_ALPHA_GRID,
    MIN_NULL_REPLICATES,
    adaptive_null_critvals,
    blocks,
    fixed_null_critvals_many,
    parallel_map,
    replicate_rng,
    resolve_workers,
)
from .stein_censored import delta_I_censored, delta_M_censored

STREAM_POWER = 4
STREAM_CENSORED = 5

CSV_HEADER = "alternative,lambda,n,test,censoring,rejection_rate,flagged,reps,seed"
CRITICAL_MODES = ("adaptive", "fixed")

_FIELDS = ("sample_sizes", "alternatives", "tests", "level", "replications", "censoring",
           "seed", "parallelism", "critical_reps", "critical_values", "null_alpha", "alpha_grid")


# -- configuration -------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """Grid of a size/power study.

    ``critical_values`` selects how complete-data tests are calibrated:
    ``"adaptive"`` interpolates fixed-null critical values tabulated over
    ``alpha_grid`` at each sample's fitted shape, ``"fixed"`` uses a single
    null shape ``null_alpha``.
    """

    sample_sizes: tuple
    alternatives: tuple
    tests: tuple
    level: float = 0.05
    replications: int = 1000
    censoring: dict | None = None
    seed: int = 0
    parallelism: int | str = 1
    critical_reps: int = 10_000
    critical_values: str = "adaptive"
    null_alpha: float = 1.0
    alpha_grid: tuple = DEFAULT_ALPHA_GRID

    @property
    def censoring_fractions(self) -> tuple:
        if not self.censoring:
            return ()
        return tuple(float(f) for f in self.censoring.get("fractions", ()))

    @property
    def is_censored(self) -> bool:
        return bool(self.censoring_fractions)

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentConfig":
        """Build and validate a config, reporting every problem at once."""
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a mapping")
        problems = [f"unknown field {k!r}" for k in data if k not in _FIELDS]
        kwargs = {k: data[k] for k in _FIELDS if k in data}
        for key in ("sample_sizes", "alternatives", "tests", "alpha_grid"):
            value = kwargs.get(key, ())
            if isinstance(value, (list, tuple)):
                kwargs[key] = tuple(value)
            elif key in kwargs:
                problems.append(f"{key} must be a list")
                kwargs[key] = ()
        alternatives = []
        for item in kwargs.get("alternatives", ()):
            try:
                alternatives.append(item if isinstance(item, AlternativeSpec)
                                    else AlternativeSpec.parse(str(item)))
            except ParetoGofError as exc:
                problems.append(f"alternatives: {exc}")
        kwargs["alternatives"] = tuple(alternatives)
        names = []
        for t in kwargs.get("tests", ()):
            try:
                names.append(resolve(t).name)
            except ParetoGofError as exc:
                problems.append(f"tests: {exc}")
        kwargs["tests"] = tuple(names)
        if "alpha_grid" not in data:
            kwargs.pop("alpha_grid")
        config = cls(**kwargs)
        problems.extend(config.problems())
        if problems:
            raise ConfigError(problems)
        return config

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
        try:
            if path.suffix.lower() == ".toml":
                import tomli
                data = tomli.loads(text)
            else:
                data = json.loads(text)
        except ValueError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        return cls.from_mapping(data)

    def problems(self) -> list[str]:
        out = []
        sizes = self.sample_sizes
        if not isinstance(sizes, tuple) or not sizes:
            out.append("sample_sizes must be a non-empty list")
        elif not all(isinstance(n, int) and not isinstance(n, bool) and n >= 3 for n in sizes):
            out.append("sample_sizes must be integers >= 3")
        if not self.alternatives:
            out.append("alternatives must be a non-empty list")
        if not isinstance(self.tests, tuple) or not self.tests:
            out.append("tests must be a non-empty list")
        else:
            unknown = [t for t in self.tests if t not in STATISTICS]
            if unknown:
                out.append(f"unresolvable tests {unknown}")
        if not _is_real(self.level) or not 0 < self.level < 1:
            out.append("level must lie in (0, 1)")
        if not _is_int(self.replications) or self.replications < 100:
            out.append("replications must be an integer >= 100")
        if not _is_int(self.critical_reps) or self.critical_reps < MIN_NULL_REPLICATES:
            out.append(f"critical_reps must be an integer >= {MIN_NULL_REPLICATES}")
        if not _is_int(self.seed) or not 0 <= self.seed < 2**64:
            out.append("seed must be a 64-bit non-negative integer")
        if self.parallelism != "auto" and (not _is_int(self.parallelism) or self.parallelism < 1):
            out.append("parallelism must be a positive integer or 'auto'")
        if self.critical_values not in CRITICAL_MODES:
            out.append(f"critical_values must be one of {CRITICAL_MODES}")
        if not _is_real(self.null_alpha) or not self.null_alpha > 0:
            out.append("null_alpha must be positive")
        grid = self.alpha_grid
        if (not isinstance(grid, tuple) or len(grid) < 2 or not all(_is_real(a) and a > 0 for a in grid)
                or list(grid) != sorted(set(grid))):
            out.append("alpha_grid must list at least two increasing positive shapes")
        if self.censoring is not None:
            if not isinstance(self.censoring, dict) or set(self.censoring) - {"fractions"}:
                out.append("censoring must be a mapping with the single key 'fractions'")
            else:
                fr = self.censoring.get("fractions")
                if not isinstance(fr, (list, tuple)) or not fr:
                    out.append("censoring.fractions must be a non-empty list")
                elif not all(_is_real(f) and 0 < f < 1 for f in fr):
                    out.append("censoring fractions must lie in (0, 1)")
                if isinstance(self.tests, tuple):
                    bad = [t for t in self.tests if t in STATISTICS and t not in CENSORED_STATISTICS]
                    if bad:
                        out.append(f"tests {bad} have no censored-data version")
        return out

    def validate(self) -> None:
        problems = self.problems()
        if problems:
            raise ConfigError(problems)

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in _FIELDS}
        d["alternatives"] = [a.label for a in self.alternatives]
        for key in ("sample_sizes", "tests", "alpha_grid"):
            d[key] = list(d[key])
        return d


def _is_int(v) -> bool:
    return isinstance(v, (int, np.integer)) and not isinstance(v, bool)


def _is_real(v) -> bool:
    return isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) \
        and math.isfinite(v)


# -- results ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CellKey:
    alternative: str
    n: int
    test: str
    censoring: float | None = None


@dataclass(frozen=True)
class Cell:
    rejections: int
    replications: int
    flagged_reps: int
    failed: bool = False
    note: str = ""

    @property
    def rejection_rate(self) -> float:
        if self.failed or self.replications == 0:
            return math.nan
        return self.rejections / self.replications


@dataclass
class PowerTable:
    cells: dict
    config: ExperimentConfig
    wall_time: float = 0.0
    metadata: dict = field(default_factory=dict)

    def cell(self, alternative, n, test, censoring=None) -> Cell:
        label = alternative.label if isinstance(alternative, AlternativeSpec) else \
            AlternativeSpec.parse(alternative).label
        return self.cells[CellKey(label, int(n), resolve(test).name,
                                  None if censoring is None else float(censoring))]

    def rejection_rate(self, alternative, n, test, censoring=None) -> float:
        return self.cell(alternative, n, test, censoring).rejection_rate

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for key, cell in self.cells.items():
            alt = AlternativeSpec.parse(key.alternative)
            cens = "" if key.censoring is None else repr(key.censoring)
            buf.write(f"{alt.family.value},{alt.lam!r},{key.n},{key.test},{cens},"
                      f"{cell.rejection_rate!r},{cell.flagged_reps},{cell.replications},"
                      f"{self.config.seed}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_text(self) -> str:
        tests = list(self.config.tests)
        rows = []
        for key, cell in self.cells.items():
            rows.append(((key.censoring, key.alternative, key.n), key.test, cell))
        groups: dict = {}
        for group, test, cell in rows:
            groups.setdefault(group, {})[test] = cell
        head = ["censoring", "alternative", "n"] + [STATISTICS[t].label for t in tests]
        lines = [head]
        for (cens, alt, n), cells in groups.items():
            line = ["-" if cens is None else f"{cens:.6g}", alt, str(n)]
            for t in tests:
                c = cells.get(t)
                line.append("failed" if c is None or c.failed else f"{c.rejection_rate:.6g}")
            lines.append(line)
        widths = [max(len(row[i]) for row in lines) for i in range(len(head))]
        out = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in lines]
        out.insert(1, "  ".join("-" * w for w in widths))
        flagged = sum(c.flagged_reps for c in self.cells.values())
        out.append("")
        out.append(f"level {self.config.level:.6g}, {self.config.replications} replications, "
                   f"seed {self.config.seed}, flagged replicates {flagged}, "
                   f"wall time {self.wall_time:.6g} s")
        return "\n".join(out) + "\n"


# -- decision rules --------------------------------------------------------------------

@dataclass(frozen=True)
class _FixedRule:
    cv: object

    def rejects(self, value, alpha_hat):
        return self.cv.rejects(value)


def critical_rules(config: ExperimentConfig, n: int, cache=None, workers: int = 1) -> dict:
    """Decision rule per complete-data test at sample size ``n``."""
    if config.critical_values == "adaptive":
        return adaptive_null_critvals(n, config.tests, config.level, config.critical_reps,
                                      config.seed, grid=config.alpha_grid, cache=cache,
                                      workers=workers)
    cvs = fixed_null_critvals_many(n, config.tests, config.level, config.critical_reps,
                                   config.seed, null_alpha=config.null_alpha, cache=cache,
                                   workers=workers)
    return {name: _FixedRule(cv) for name, cv in cvs.items()}


def _alt_key(alt: AlternativeSpec):
    return list(Family).index(alt.family), int(np.float64(alt.lam).view(np.uint64))


def _float_key(v: float) -> int:
    return int(np.float64(v).view(np.uint64))


def _power_block(task):
    alt, n, tests, rules, seed, start, stop = task
    specs = [STATISTICS[t] for t in tests]
    rejections = np.zeros(len(specs), dtype=np.int64)
    flagged = np.zeros(len(specs), dtype=np.int64)
    for k in range(start, stop):
        rng = replicate_rng(seed, STREAM_POWER, *_alt_key(alt), n, k)
        x = alt.sample(n, rng)
        alpha, clamped = fit_alpha(x, clamp=True)
        for j, spec in enumerate(specs):
            try:
                with np.errstate(all="ignore"):
                    value = spec(x, alpha)
            except (ParetoGofError, ArithmeticError):
                value = math.nan
            if not math.isfinite(value):
                # statistic undefined on this sample: counted as evidence against the null
                rejections[j] += 1
                flagged[j] += 1
                continue
            rejections[j] += rules[spec.name].rejects(value, alpha)
            flagged[j] += clamped
    return rejections, flagged


def _censored_block(task):
    alt, n, fraction, plan, tests, level, seed, start, stop = task
    rejections = np.zeros(len(tests), dtype=np.int64)
    flagged = np.zeros(len(tests), dtype=np.int64)
    runners = {"delta_I": delta_I_censored, "delta_M": delta_M_censored}
    for k in range(start, stop):
        rng = replicate_rng(seed, STREAM_CENSORED, *_alt_key(alt), n, _float_key(fraction), k)
        x = alt.sample(n, rng)
        y, events = plan.censor(x, rng)
        for j, test in enumerate(tests):
            try:
                with np.errstate(all="ignore"):
                    outcome = runners[test](CensoredSample(y, events), level)
            except (ParetoGofError, ArithmeticError):
                rejections[j] += 1
                flagged[j] += 1
                continue
            rejections[j] += outcome.reject
            flagged[j] += outcome.flagged
    return rejections, flagged


def _reduce(results):
    rej = sum(r for r, _ in results)
    flg = sum(f for _, f in results)
    return rej, flg


# -- studies ---------------------------------------------------------------------------

def run_power_study(config: ExperimentConfig, *, cache=None) -> PowerTable:
    """Empirical size and power of the complete-data tests."""
    config.validate()
    workers = resolve_workers(config.parallelism)
    started = time.perf_counter()
    rules = {n: critical_rules(config, n, cache, workers) for n in config.sample_sizes}
    tasks, index = [], []
    for alt in config.alternatives:
        for n in config.sample_sizes:
            for a, b in blocks(config.replications):
                tasks.append((alt, n, config.tests, rules[n], int(config.seed), a, b))
                index.append((alt.label, n))
    results = parallel_map(_power_block, tasks, workers)
    cells = {}
    for alt in config.alternatives:
        for n in config.sample_sizes:
            rej, flg = _reduce([r for r, key in zip(results, index) if key == (alt.label, n)])
            for j, test in enumerate(config.tests):
                cells[CellKey(alt.label, n, test)] = Cell(int(rej[j]), config.replications,
                                                          int(flg[j]))
    return PowerTable(cells, config, time.perf_counter() - started,
                      {"config": config.to_dict(), "workers": workers})


def run_censored_power_study(config: ExperimentConfig) -> PowerTable:
    """Empirical size and power of the IPCW tests under exponential censoring.

    A cell whose censoring rate cannot be calibrated is marked failed and the
    remaining cells still run.
    """
    config.validate()
    if not config.is_censored:
        raise ConfigError("censored study requires censoring.fractions")
    workers = resolve_workers(config.parallelism)
    started = time.perf_counter()
    plans, notes = {}, {}
    for alt in config.alternatives:
        for frac in config.censoring_fractions:
            try:
                plans[(alt.label, frac)] = calibrate_censoring(alt, frac)
            except (CalibrationError, ArithmeticError) as exc:
                notes[(alt.label, frac)] = str(exc)
    tasks, index = [], []
    for alt in config.alternatives:
        for frac in config.censoring_fractions:
            plan = plans.get((alt.label, frac))
            if plan is None:
                continue
            for n in config.sample_sizes:
                for a, b in blocks(config.replications):
                    tasks.append((alt, n, frac, plan, config.tests, config.level,
                                  int(config.seed), a, b))
                    index.append((alt.label, frac, n))
    results = parallel_map(_censored_block, tasks, workers)
    cells = {}
    for alt in config.alternatives:
        for frac in config.censoring_fractions:
            for n in config.sample_sizes:
                if (alt.label, frac) in notes:
                    for test in config.tests:
                        cells[CellKey(alt.label, n, test, frac)] = Cell(
                            0, config.replications, 0, failed=True, note=notes[(alt.label, frac)])
                    continue
                rej, flg = _reduce([r for r, key in zip(results, index)
                                    if key == (alt.label, frac, n)])
                for j, test in enumerate(config.tests):
                    cells[CellKey(alt.label, n, test, frac)] = Cell(
                        int(rej[j]), config.replications, int(flg[j]))
    achieved = {f"{k[0]}@{k[1]}": p.achieved_fraction for k, p in plans.items()}
    return PowerTable(cells, config, time.perf_counter() - started,
                      {"config": config.to_dict(), "workers": workers,
                       "achieved_fractions": achieved, "failures": notes})


def run_study(config: ExperimentConfig, *, cache=None) -> PowerTable:
    if config.is_censored:
        return run_censored_power_study(config)
    return run_power_study(config, cache=cache)
