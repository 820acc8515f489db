"""Command line: ``affinelag analyze`` and ``affinelag integrate``.

Exit codes: 0 success, 2 input error, 3 verification failure, 4 dynamics
not integrable (not Type I), 5 numeric failure.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .analysis import TYPE_I, TYPE_II3, classify, eta_field, holonomic_sector
from .flow import FlowDomainError, NonFiniteStateError, drift_report, integrate_reduced, write_csv
from .geometry import LagrangianError, build_lagrangian, structure_matrices
from .problem import ProblemError, load_problem
from .report import analyze, dumps
from .symexpr import ParseError, ProbeConfig, SymbolTableError, ZeroOracle, simplify

EXIT_OK, EXIT_INPUT, EXIT_VERIFY, EXIT_NOT_TYPE_I, EXIT_NUMERIC = 0, 2, 3, 4, 5

INPUT_ERRORS = (ProblemError, LagrangianError, ParseError, SymbolTableError)


def _assignments(text: str, what: str) -> dict[str, float]:
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        name, sep, value = part.partition("=")
        if not sep:
            raise ProblemError(f"{what} entry {part!r} is not of the form name=value")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise ProblemError(f"{what} value for {name.strip()!r} is not a number: {value!r}") from None
    return out


def _fail(code: int, msg: str) -> int:
    print(f"affinelag: {msg}", file=sys.stderr)
    return code


def _analyze_one(path: str, config: ProbeConfig):
    try:
        spec = load_problem(path)
        result = analyze(spec, config)
    except INPUT_ERRORS as exc:
        return EXIT_INPUT, None, str(exc)
    if not result.ok:
        return EXIT_VERIFY, result, "verification failed: " + "; ".join(result.failures)
    return EXIT_OK, result, None


def cmd_analyze(args) -> int:
    paths = args.paths
    configs = [ProbeConfig(args.seed + i, args.probe_points, args.tol) for i in range(len(paths))]
    if len(paths) == 1:
        outcomes = [_analyze_one(paths[0], configs[0])]
    else:
        with ThreadPoolExecutor() as pool:
            outcomes = list(pool.map(_analyze_one, paths, configs))
    code = EXIT_OK
    many = len(paths) > 1
    if many and args.report:
        Path(args.report).mkdir(parents=True, exist_ok=True)
    for path, (status, result, msg) in zip(paths, outcomes):
        if msg:
            print(f"affinelag: {path}: {msg}", file=sys.stderr)
        code = max(code, status)
        if result is None or status == EXIT_INPUT:
            continue
        text = dumps(result.report)
        if args.report:
            target = Path(args.report) / f"{Path(path).stem}.json" if many else Path(args.report)
            target.write_text(text)
        else:
            sys.stdout.write(text)
        if status == EXIT_OK:
            print(f"{path}: {result.report['classification']['tag']}", file=sys.stderr)
    return code


def cmd_integrate(args) -> int:
    try:
        spec = load_problem(args.path)
        L = build_lagrangian(spec)
        params = spec.parameter_values()
        if args.params:
            params.update(_assignments(args.params, "--params"))
        initial = _assignments(args.initial, "--initial")
        table = L.table
        observables = {}
        for text in args.observe or []:
            label, sep, body = text.partition("=")
            if sep and label.strip().isidentifier():
                observables[label.strip()] = table.parse(body)
            else:
                e = table.parse(text)
                oracle = ZeroOracle(table.sampler())
                observables["H" if oracle.is_zero(simplify(e - L.V)) else text] = e
    except INPUT_ERRORS as exc:
        return _fail(EXIT_INPUT, str(exc))
    config = ProbeConfig(args.seed, args.probe_points, args.tol)
    S = structure_matrices(L)
    oracle = ZeroOracle(table.sampler(), config)
    C = classify(S, holonomic_sector(S, oracle), oracle)
    if C.tag != TYPE_I:
        if C.tag == TYPE_II3:
            return _fail(EXIT_NOT_TYPE_I, f"constrained dynamics are not integrated numerically ({C.tag})")
        return _fail(EXIT_NOT_TYPE_I, f"dynamics underdetermined ({C.tag})")
    try:
        traj = integrate_reduced(eta_field(S, oracle), table, initial, args.t0, args.t1, args.step, params)
    except ValueError as exc:
        return _fail(EXIT_INPUT, str(exc))
    except (FlowDomainError, NonFiniteStateError, ArithmeticError) as exc:
        return _fail(EXIT_NUMERIC, str(exc))
    if args.csv:
        write_csv(traj, args.csv)
    try:
        report = drift_report(traj, observables, L)
    except ArithmeticError as exc:
        return _fail(EXIT_NUMERIC, f"observable evaluation failed: {exc}")
    for name, value in report.observables.items():
        print(f"{name}: {value:.6e}")
    for name, value in report.constraints.items():
        print(f"{name}: {value:.6e}")
    return EXIT_OK


def _probe_flags(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0, help="seed for probabilistic zero tests (default 0)")
    p.add_argument("--probe-points", type=int, default=16, help="probe points per zero test (default 16)")
    p.add_argument("--tol", type=float, default=1e-9, help="relative zero tolerance (default 1e-9)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="affinelag", description="Analyze Lagrangians affine in the velocities.")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="classify a problem and write a JSON report")
    a.add_argument("paths", nargs="+", help="problem files (or names of bundled problems)")
    a.add_argument("--report", help="report file; a directory when several problems are given")
    _probe_flags(a)
    a.set_defaults(func=cmd_analyze)

    i = sub.add_parser("integrate", help="integrate the reduced flow of a Type I problem")
    i.add_argument("path")
    i.add_argument("--initial", required=True, help='initial state, e.g. "x=1,y=1"')
    i.add_argument("--t0", type=float, default=0.0)
    i.add_argument("--t1", type=float, default=10.0)
    i.add_argument("--step", type=float, default=1e-3)
    i.add_argument("--observe", action="append", help="observable EXPR or NAME=EXPR (repeatable)")
    i.add_argument("--csv", help="write the trajectory here")
    i.add_argument("--params", help='override parameter values, e.g. "a=2,b=1"')
    _probe_flags(i)
    i.set_defaults(func=cmd_integrate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
