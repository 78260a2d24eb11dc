"""Command-line front end: pmf dumps, simulation, fitting, Fisher tables, benchmarks.

Exit codes: 0 success, 1 usage error (bad flags, malformed inputs,
precondition violations), 2 computation or fit error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from .bench import BenchGrid, fit_scaling_exponents, records_to_csv, run_grid, scaling_to_json
from .errors import ConfigError, DomainError, FitError
from .fitting import fit_multi, fit_single
from .formatting import sig12
from .model import PhaseModel, RegisterSpec
from .pmf import fisher_information, pmf_vector
from .simulate import ShotHistogram, SimUnitary, histogram_to_probs, sample_shots, simulate_distribution

ENV_THREADS = "QPECF_THREADS"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage failures exit 1 instead of 2."""

    def error(self, message: str):
        raise _UsageError(f"{self.prog}: {message}")


def parse_phase(text: str) -> float:
    """Parse a phase flag: decimal or exact rational 'p/q', in [0, 1).

    '1/3' parses to the nearest representable real of one third.
    """
    try:
        value = float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse {text!r} as a number") from exc
    if not 0.0 <= value < 1.0:
        raise ConfigError(f"phase must lie in [0, 1), got {text!r}")
    return value


def parse_weight(text: str) -> float:
    try:
        value = float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse {text!r} as a number") from exc
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"weight must lie in [0, 1], got {text!r}")
    return value


def _parse_component(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"component must look like 'theta:weight', got {text!r}")
    return parse_phase(parts[0]), parse_weight(parts[1])


def _model_from_args(args) -> PhaseModel:
    if args.theta is not None and args.component:
        raise ConfigError("give either --theta or --component, not both")
    if args.theta is not None:
        return PhaseModel.single(parse_phase(args.theta))
    if args.component:
        return PhaseModel.from_pairs(_parse_component(c) for c in args.component)
    raise ConfigError("one of --theta or --component is required")


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _add_model_flags(sub) -> None:
    sub.add_argument("--theta", help="single eigenphase, decimal or 'p/q'")
    sub.add_argument(
        "--component",
        action="append",
        metavar="THETA:WEIGHT",
        help="mixture component, repeatable; weights must sum to 1",
    )


def _cmd_pmf(args) -> int:
    reg = RegisterSpec(args.n)
    probs = pmf_vector(reg, _model_from_args(args))
    lines = ["y,probability"]
    lines += [f"{y},{sig12(p)}" for y, p in enumerate(probs)]
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_simulate(args) -> int:
    reg = RegisterSpec(args.n)
    dist = simulate_distribution(reg, SimUnitary.from_model(_model_from_args(args)))
    hist = sample_shots(dist, args.shots, args.seed)
    _write_text(args.out, json.dumps(hist.to_json_dict()) + "\n")
    return 0


def _cmd_fit(args) -> int:
    try:
        with open(args.counts) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.counts}: invalid JSON: {exc}") from exc
    hist = ShotHistogram.from_json_dict(data)
    dist = histogram_to_probs(hist)
    if args.phases == 1:
        result = fit_single(dist)
    else:
        result = fit_multi(dist, args.phases)
    _write_text(args.out, json.dumps(result.to_json_dict()) + "\n")
    return 0


def _cmd_fisher(args) -> int:
    if args.n_min > args.n_max:
        raise ConfigError(f"--n-min {args.n_min} exceeds --n-max {args.n_max}")
    lines = ["n,M,fisher_information,crlb_rmse"]
    for n in range(args.n_min, args.n_max + 1):
        reg = RegisterSpec(n)
        fi = fisher_information(reg)
        lines.append(f"{n},{reg.M},{sig12(fi)},{sig12(1.0 / np.sqrt(fi))}")
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _default_threads() -> int:
    value = os.environ.get(ENV_THREADS)
    if value is None:
        return 1
    try:
        return max(1, int(value))
    except ValueError as exc:
        raise ConfigError(f"{ENV_THREADS} must be an integer, got {value!r}") from exc


def _cmd_bench(args) -> int:
    try:
        with open(args.config) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.config}: invalid JSON: {exc}") from exc
    grid = BenchGrid.from_json_dict(data)
    workers = args.threads if args.threads is not None else _default_threads()
    records = run_grid(grid, workers=workers)
    _write_text(args.out_csv, records_to_csv(records))
    if args.out_scaling is not None:
        try:
            summary = fit_scaling_exponents(records)
        except DomainError as exc:
            # Well-formed inputs that cannot support the regression are a
            # computation-level failure, not a usage error.
            raise FitError(f"scaling fit failed: {exc}") from exc
        _write_text(args.out_scaling, scaling_to_json(summary))
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="qpecf", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("pmf", help="dump the analytic outcome distribution as CSV")
    sub.add_argument("--n", type=int, required=True, help="recording qubits")
    _add_model_flags(sub)
    sub.add_argument("--out", default="-", help="output path, '-' for stdout")
    sub.set_defaults(handler=_cmd_pmf)

    sub = subs.add_parser("simulate", help="simulate the circuit and sample shot counts")
    sub.add_argument("--n", type=int, required=True, help="recording qubits")
    _add_model_flags(sub)
    sub.add_argument("--shots", type=int, required=True, help="number of circuit executions")
    sub.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    sub.add_argument("--out", default="-", help="output path, '-' for stdout")
    sub.set_defaults(handler=_cmd_simulate)

    sub = subs.add_parser("fit", help="fit phases to a saved shot histogram")
    sub.add_argument("--counts", required=True, help="histogram JSON path")
    sub.add_argument("--phases", type=int, default=1, help="number of phases to fit")
    sub.add_argument("--out", default="-", help="output path, '-' for stdout")
    sub.set_defaults(handler=_cmd_fit)

    sub = subs.add_parser("fisher", help="tabulate Fisher information and CRLB per register size")
    sub.add_argument("--n-min", type=int, default=1, help="smallest recording-qubit count")
    sub.add_argument("--n-max", type=int, default=8, help="largest recording-qubit count")
    sub.add_argument("--out", default="-", help="output path, '-' for stdout")
    sub.set_defaults(handler=_cmd_fisher)

    sub = subs.add_parser("bench", help="run a Monte Carlo campaign from a grid config")
    sub.add_argument("--config", required=True, help="grid config JSON path")
    sub.add_argument("--out-csv", required=True, help="per-cell CSV output path")
    sub.add_argument("--out-scaling", help="scaling-exponent JSON output path")
    sub.add_argument(
        "--threads",
        type=int,
        help=f"worker process count (default: ${ENV_THREADS} or 1)",
    )
    sub.set_defaults(handler=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FitError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
