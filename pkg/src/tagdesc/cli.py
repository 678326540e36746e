"""Command-line front end.

Subcommands: solve (anneal the compiled model), exact (enumeration oracle),
eval (score a user-supplied solution), sweep (solve across several
modularity weights), fixture (write the bundled toy instance).

Exit codes are part of the interface: 0 feasible result, 1 error,
2 infeasible result, 3 infeasible problem. All reports go to stdout (or
--output) as JSON; wall-clock time lives in the isolated "timing" field so
the rest of the document is byte-reproducible.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

from . import oracle, qubo, solver, toy
from .instance import (Instance, InstanceError, dump_edge_csv, dump_json,
                       load_instance)
from .metrics import make_report, report_json
from .model import (DegenerateInstanceError, DescriptorSolution,
                    InfeasibleSpecError, ProblemSpec)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE_RESULT = 2
EXIT_INFEASIBLE_SPEC = 3

ENUM_BUDGET_ENV = "TMCD_ENUM_BUDGET"


class _Parser(argparse.ArgumentParser):
    # usage errors are ordinary errors in the exit-code taxonomy
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def coverage_targets(inst: Instance, spec: str) -> tuple[int, ...]:
    """Parse a coverage request: `full`, `pct:<p>`, or explicit `m1,m2,...`.

    Percentages round up, preserving at-least semantics.
    """
    sizes = inst.cluster_sizes
    if spec == "full":
        return sizes
    if spec.startswith("pct:"):
        try:
            p = float(spec[4:])
        except ValueError:
            raise ValueError(f"bad percentage in coverage spec {spec!r}") from None
        if not 0 <= p <= 100:
            raise ValueError(f"coverage percentage {p} outside 0..100")
        return tuple(math.ceil(p / 100.0 * s) for s in sizes)
    try:
        targets = tuple(int(f) for f in spec.split(","))
    except ValueError:
        raise ValueError(f"bad coverage spec {spec!r}; expected full, pct:<p>, "
                         "or comma-separated integers") from None
    return targets


def _load(args) -> Instance:
    fmt = "edge_csv" if args.format == "csv" else args.format
    with open(args.input, "rb") as fh:
        inst = load_instance(fh, fmt)
    for w in inst.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return inst


def _emit(args, text: str) -> None:
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _penalties(args, spec: ProblemSpec) -> tuple[float, float, float]:
    a, b, c = qubo.default_penalties(spec)
    if args.penalty_A is not None:
        a = args.penalty_A
    if args.penalty_B is not None:
        b = args.penalty_B
    if args.penalty_C is not None:
        c = args.penalty_C
    return a, b, c


def _solver_config(args, seed=None) -> solver.SolverConfig:
    return solver.SolverConfig(
        sweeps=args.sweeps,
        restarts=args.restarts,
        seed=args.seed if seed is None else seed,
        time_budget=args.time_budget,
    )


def _run_solve(inst: Instance, targets, p: float, args) -> tuple[dict, int]:
    spec = ProblemSpec(inst, targets, p)
    penalties = _penalties(args, spec)
    t0 = time.monotonic()
    model = qubo.build_qubo(spec, *penalties)
    if getattr(args, "export_qubo", None):
        with open(args.export_qubo, "w") as fh:
            qubo.export_qubo(model, fh)
    result = solver.anneal(model, _solver_config(args))
    elapsed = time.monotonic() - t0
    report = make_report(spec, result, penalties)
    report["timing"] = {"elapsed_seconds": elapsed}
    code = EXIT_OK if report["feasible"] else EXIT_INFEASIBLE_RESULT
    return report, code


def cmd_solve(args) -> int:
    inst = _load(args)
    report, code = _run_solve(inst, coverage_targets(inst, args.coverage), args.P, args)
    _emit(args, report_json(report))
    return code


def cmd_exact(args) -> int:
    inst = _load(args)
    spec = ProblemSpec(inst, coverage_targets(inst, args.coverage), args.P)
    budget = int(os.environ.get(ENUM_BUDGET_ENV, oracle.DEFAULT_BUDGET))
    t0 = time.monotonic()
    result = oracle.exact_descriptors(spec, budget)
    elapsed = time.monotonic() - t0
    report = make_report(spec, result)
    report["timing"] = {"elapsed_seconds": elapsed}
    _emit(args, report_json(report))
    return EXIT_OK if result.feasible else EXIT_INFEASIBLE_SPEC


def cmd_eval(args) -> int:
    import json
    inst = _load(args)
    spec = ProblemSpec(inst, coverage_targets(inst, args.coverage), args.P)
    with open(args.solution) as fh:
        doc = json.load(fh)
    groups = doc["descriptors"] if isinstance(doc, dict) else doc
    try:
        sol = DescriptorSolution.from_names(inst, groups)
    except KeyError as e:
        raise ValueError(f"solution references {e.args[0]}") from e
    if len(sol.descriptors) != inst.k:
        raise ValueError(f"solution has {len(sol.descriptors)} descriptors, expected {inst.k}")
    report = make_report(spec, sol)
    report["timing"] = {"elapsed_seconds": 0.0}
    _emit(args, report_json(report))
    return EXIT_OK if report["feasible"] else EXIT_INFEASIBLE_RESULT


def cmd_sweep(args) -> int:
    inst = _load(args)
    targets = coverage_targets(inst, args.coverage)
    try:
        p_values = [float(p) for p in args.P.split(",")]
    except ValueError:
        raise ValueError(f"bad modularity weight list {args.P!r}") from None
    if any(p < 0 for p in p_values):
        raise ValueError("modularity weights must be >= 0")

    reports, codes = [], []
    for p in p_values:
        report, code = _run_solve(inst, targets, p, args)
        reports.append(report)
        codes.append(code)

    import json
    _emit(args, json.dumps([_strip_timing(r) for r in map(_rounded, reports)], indent=2) + "\n")

    header = f"{'P':>8}  {'tags':>5}  {'TM':>10}  {'avg BR':>8}  {'objective':>10}  feasible"
    print(header, file=sys.stderr)
    for p, rep in zip(p_values, reports):
        obj = rep["objective"] or {}
        br = rep["balance_ratio"]["average"]
        print(f"{p:>8g}  {obj.get('tag_count', '-'):>5}  "
              f"{_fmt(obj.get('tag_modularity')):>10}  {_fmt(br):>8}  "
              f"{_fmt(obj.get('total')):>10}  {rep['feasible']}", file=sys.stderr)

    if EXIT_ERROR in codes:
        return EXIT_ERROR
    if EXIT_INFEASIBLE_RESULT in codes:
        return EXIT_INFEASIBLE_RESULT
    return EXIT_OK


def _fmt(v) -> str:
    return "-" if v is None else f"{v:.4g}"


def _rounded(report: dict) -> dict:
    from .metrics import _round_floats
    return _round_floats(report)


def _strip_timing(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timing"}


def cmd_fixture(args) -> int:
    inst = toy.toy_instance()
    _emit(args, toy.toy_json() if args.format == "json" else dump_edge_csv(inst))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tagdesc",
                     description="Disjoint tag descriptors for clustered data "
                                 "via quadratic binary optimization.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", required=True, help="instance file")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--output", default=None, help="write the report here instead of stdout")

    def add_problem(p):
        p.add_argument("--coverage", default="full",
                       help="full, pct:<p>, or m1,m2,... (default: full)")

    def add_solver(p):
        p.add_argument("--penalty-A", type=float, default=None, dest="penalty_A")
        p.add_argument("--penalty-B", type=float, default=None, dest="penalty_B")
        p.add_argument("--penalty-C", type=float, default=None, dest="penalty_C")
        p.add_argument("--sweeps", type=int, default=2000)
        p.add_argument("--restarts", type=int, default=8)
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--time-budget", type=float, default=None, dest="time_budget")
        p.add_argument("--export-qubo", default=None, dest="export_qubo",
                       help="also write the compiled model in sparse text form")

    p = sub.add_parser("solve", help="compile and anneal")
    add_io(p)
    add_problem(p)
    p.add_argument("--P", type=float, default=0.0, help="modularity weight")
    add_solver(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("exact", help="exact optimum by enumeration")
    add_io(p)
    add_problem(p)
    p.add_argument("--P", type=float, default=0.0)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("eval", help="evaluate a given solution")
    add_io(p)
    add_problem(p)
    p.add_argument("--P", type=float, default=0.0)
    p.add_argument("--solution", required=True,
                   help="JSON file listing descriptors by tag name")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="solve for several modularity weights")
    add_io(p)
    add_problem(p)
    p.add_argument("--P", default="0,1,5",
                   help="comma-separated modularity weights (default: 0,1,5)")
    add_solver(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fixture", help="write the bundled toy instance")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_fixture)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleSpecError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE_SPEC
    except (InstanceError, DegenerateInstanceError, oracle.BudgetExceededError,
            solver.TooManyVariablesError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
