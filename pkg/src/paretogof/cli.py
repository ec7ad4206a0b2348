"""Command-line front end.

Exit codes: 0 when the null hypothesis is not rejected (or a command without
a decision succeeds), 1 when it is rejected, 2 on any error.
"""

from __future__ import annotations

import argparse
import csv
import secrets
import sys
from pathlib import Path

import numpy as np

from . import datasets
from .errors import ConfigError, DomainError, ParetoGofError
from .estimation import CensoredSample, as_sample, fit_alpha, fit_alpha_censored
from .harness import ExperimentConfig, run_study
from .registry import CENSORED_STATISTICS, STATISTICS, resolve
from .resampling import (
    CriticalValueCache,
    Method,
    bootstrap_critvals,
    fixed_null_critvals,
)
from .stein_censored import delta_I_censored, delta_M_censored

EXIT_ACCEPT, EXIT_REJECT, EXIT_ERROR = 0, 1, 2


def fmt(value) -> str:
    return "NA" if value is None else f"{value:.6g}"


# -- data ingestion --------------------------------------------------------------------

def read_complete_file(path) -> np.ndarray:
    """One value per line, or a single-column CSV with an optional header."""
    values = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row if c.strip()]
            if not cells:
                continue
            if len(cells) != 1:
                raise DomainError(f"{path}:{lineno}: expected a single column")
            try:
                values.append(float(cells[0]))
            except ValueError:
                if values or lineno > 1:
                    raise DomainError(f"{path}:{lineno}: not a number: {cells[0]!r}") from None
    return as_sample(values, 1)


def read_censored_file(path) -> CensoredSample:
    """CSV with header ``time,event``; ``event`` is 1 for an observed lifetime."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["time", "event"]:
            raise DomainError(f"{path}: censored data needs the header 'time,event'")
        times, events = [], []
        for lineno, row in enumerate(reader, start=2):
            try:
                times.append(float(row["time"]))
                event = int(row["event"])
            except (TypeError, ValueError):
                raise DomainError(f"{path}:{lineno}: malformed row") from None
            if event not in (0, 1):
                raise DomainError(f"{path}:{lineno}: event must be 0 or 1")
            events.append(event)
    return CensoredSample(np.array(times), np.array(events, dtype=bool))


def load_data(ref: str, censored: bool):
    kind, _, rest = ref.partition(":")
    if kind == "builtin":
        if censored:
            raise DomainError("builtin datasets are complete samples")
        return datasets.load(rest)
    if kind == "file" and rest:
        return read_censored_file(rest) if censored else read_complete_file(rest)
    raise DomainError(f"bad data reference {ref!r}; use builtin:wheaton, builtin:wind or file:PATH")


def _advise_support(values, out):
    below = int(np.count_nonzero(np.asarray(values) < 1.0))
    if below:
        print(f"note: {below} observation(s) lie below the Pareto support [1, inf); "
              f"proceeding", file=out)


def _seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(63)
        print(f"seed: {args.seed} (generated)", file=sys.stderr)
    return args.seed


# -- commands --------------------------------------------------------------------------

def cmd_fit(args) -> int:
    data = load_data(args.data, args.censored)
    if args.censored:
        alpha, flagged = fit_alpha_censored(data, clamp=True)
        _advise_support(data.times, sys.stderr)
        print(f"n: {data.n}")
        print(f"events: {data.n_events}")
        print(f"alpha_hat_c: {fmt(alpha)}")
    else:
        alpha, flagged = fit_alpha(data, clamp=True)
        _advise_support(data, sys.stderr)
        print(f"n: {data.size}")
        print(f"alpha_hat: {fmt(alpha)}")
    if flagged:
        print("note: sample mean <= 1, shape estimate clamped", file=sys.stderr)
    return EXIT_ACCEPT


def cmd_test(args) -> int:
    data = load_data(args.data, args.censored)
    spec = resolve(args.stat)
    if args.censored:
        if spec.name not in CENSORED_STATISTICS:
            raise DomainError(f"{spec.name} has no censored-data version")
        _advise_support(data.times, sys.stderr)
        run = delta_I_censored if spec.name == "delta_I" else delta_M_censored
        out = run(data, args.level)
        print(f"statistic: {spec.name}")
        print(f"value: {fmt(out.statistic)}")
        print(f"alpha_hat_c: {fmt(out.alpha_hat_c)}")
        print(f"sigma_hat: {fmt(out.sigma_hat)}")
        print(f"z: {fmt(out.z_value)}")
        print(f"p_value: {fmt(out.p_value)}")
        reject = out.reject
    else:
        _advise_support(data, sys.stderr)
        alpha, _ = fit_alpha(data, clamp=True)
        value = spec(data, alpha)
        cv = bootstrap_critvals(data, spec, args.level, args.B, Method.parse(args.method), _seed(args))
        print(f"statistic: {spec.name}")
        print(f"value: {fmt(value)}")
        print(f"alpha_hat: {fmt(alpha)}")
        if cv.two_sided:
            print(f"C1: {fmt(cv.lower)}")
            print(f"C2: {fmt(cv.upper)}")
        else:
            print(f"C3: {fmt(cv.upper)}")
        print(f"method: {cv.method.value}, B = {cv.replications}, seed = {cv.seed}")
        reject = cv.rejects(value)
    print(f"decision: {'reject' if reject else 'fail to reject'} at level {fmt(args.level)}")
    return EXIT_REJECT if reject else EXIT_ACCEPT


def cmd_critvals(args) -> int:
    spec = resolve(args.stat)
    cache = CriticalValueCache()
    cv = fixed_null_critvals(args.n, spec, args.level, args.reps, _seed(args),
                             null_alpha=args.null_alpha, cache=cache)
    print(f"statistic: {spec.name}")
    print(f"n: {args.n}, level: {fmt(cv.level)}, reps: {cv.replications}, seed: {cv.seed}")
    if cv.two_sided:
        print(f"C1: {fmt(cv.lower)}")
        print(f"C2: {fmt(cv.upper)}")
    else:
        print(f"C3: {fmt(cv.upper)}")
    print(f"cache: {cache.path}")
    return EXIT_ACCEPT


def cmd_power(args) -> int:
    config = ExperimentConfig.load(args.config)
    overrides = {}
    if args.parallelism is not None:
        p = args.parallelism
        overrides["parallelism"] = int(p) if p.isdigit() else p
    if args.replications is not None:
        overrides["replications"] = args.replications
    if overrides:
        config = ExperimentConfig.from_mapping({**config.to_dict(), **overrides})
    table = run_study(config, cache=CriticalValueCache())
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.config).stem
    csv_path, txt_path = out_dir / f"{stem}.csv", out_dir / f"{stem}.txt"
    table.to_csv(csv_path)
    report = table.to_text()
    txt_path.write_text(report)
    print(report, end="")
    print(f"wrote {csv_path} and {txt_path}")
    return EXIT_ACCEPT


def cmd_export_data(args) -> int:
    kind, _, name = args.data.partition(":")
    if kind != "builtin":
        raise DomainError("export-data takes builtin:wheaton or builtin:wind")
    values = datasets.load(name)
    text = "".join(f"{v!r}\n" for v in values.tolist())
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
        print(f"wrote {values.size} values to {args.out} (sha256 {datasets.checksum(values)})")
    return EXIT_ACCEPT


# -- parser ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="paretogof",
                                     description="Stein-type goodness-of-fit tests for the Pareto type-I law")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_args(p):
        p.add_argument("--data", required=True, help="builtin:wheaton, builtin:wind or file:PATH")
        p.add_argument("--censored", action="store_true", help="file holds 'time,event' rows")

    p = sub.add_parser("fit", help="moment estimate of the Pareto shape")
    data_args(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("test", help="goodness-of-fit test on a dataset")
    data_args(p)
    p.add_argument("--stat", default="delta_I", help=f"one of {', '.join(STATISTICS)}")
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--B", type=int, default=1000, help="bootstrap replicates")
    p.add_argument("--method", default="data", choices=["data", "parametric"])
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("critvals", help="fixed-null Monte Carlo critical values")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--stat", default="delta_I")
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--null-alpha", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_critvals)

    p = sub.add_parser("power", help="run a size/power study from a JSON or TOML config")
    p.add_argument("--config", required=True)
    p.add_argument("--output-dir", default=".")
    p.add_argument("--parallelism", default=None, help="worker processes or 'auto'")
    p.add_argument("--replications", type=int, default=None,
                   help="override the configured count, e.g. 10000 for full scale")
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("export-data", help="write a builtin dataset, one value per line")
    p.add_argument("--data", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_export_data)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_ACCEPT
    try:
        return args.func(args)
    except ConfigError as exc:
        print("error: invalid configuration:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  - {problem}", file=sys.stderr)
        return EXIT_ERROR
    except (ParetoGofError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
