"""Command-line entry point: ``entsearch {solve,detect,copies,grid,bench}``.

Every JSON document carries the tool version, the echoed configuration and
the seed.  ``--canonical`` drops the wall-clock field so that repeated runs
are byte-identical.

Exit codes: 0 success, 1 I/O error, 2 parse error, 3 cap exceeded or
unsupported route, 4 budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time

from . import __version__
from .copies import copies_required, overlap_grid, grid_csv, ratio_table
from .entdetect import (
    CopyEstimatorConfig,
    analytic_test,
    ppt_test,
    purity_test,
    spa_test_estimated,
    spa_test_exact,
    transpose_spa,
)
from .errors import CapExceededError, ParseError
from .formula import Formula, load_dimacs, parse_expr, planted_formula
from .hsearch import BUDGET_EXHAUSTED, SearchConfig, classical_baseline, cost_model, search
from .oracle import post_oracle_state
from .qsim import DensityOp, PureState, RegisterLayout, density_from_state, from_json

EXIT_OK, EXIT_IO, EXIT_PARSE, EXIT_CAP, EXIT_BUDGET = 0, 1, 2, 3, 4

ROUTE_ALIASES = {
    "analytic": "analytic",
    "purity": "purity",
    "ppt": "ppt",
    "spa": "spa-exact",
    "spa-exact": "spa-exact",
    "spa-est": "spa-estimated",
    "spa-estimated": "spa-estimated",
}


class UnsupportedRoute(Exception):
    pass


def write_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, path: str | None):
    if path:
        write_atomic(path, text)
    else:
        sys.stdout.write(text)


def _envelope(args, result: dict, started: float) -> str:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "canonical")}
    doc = {
        "tool": "entsearch",
        "version": __version__,
        "command": args.command,
        "config": config,
        "seed": getattr(args, "seed", None),
        "result": result,
    }
    if not args.canonical:
        doc["wall_clock_s"] = time.perf_counter() - started
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _formula(args) -> Formula:
    if args.expr is not None:
        return parse_expr(args.expr)
    if args.cnf is not None:
        return load_dimacs(args.cnf)
    raise ParseError("give a formula with --expr or --cnf")


def _estimator(args, route):
    if route != "spa-estimated":
        return None
    return CopyEstimatorConfig(args.copies, args.seed, args.reps)


# --------------------------------------------------------------------------- #
# commands
# --------------------------------------------------------------------------- #

def cmd_solve(args) -> int:
    started = time.perf_counter()
    f = _formula(args)
    route = ROUTE_ALIASES[args.route]
    cfg = SearchConfig(
        route=route,
        mode=args.mode,
        estimator=_estimator(args, route),
        infer_complement=not args.no_infer,
        multi_solution=args.all,
        max_solutions=args.max_solutions,
        max_detector_calls=args.budget,
    )
    outcome = search(f, cfg)
    result = outcome.to_dict()
    result["formula"] = {"n": f.n, "m": f.m, "expr": f.to_expr()}
    result["cost"] = cost_model(outcome.trace, f.n, f.m, args.copies)
    _emit(_envelope(args, result, started), args.out)
    if args.csv:
        write_atomic(args.csv, outcome.trace.to_csv())
    return EXIT_BUDGET if outcome.status == BUDGET_EXHAUSTED else EXIT_OK


def _load_state(path: str):
    with open(path) as fh:
        return from_json(json.load(fh))


def cmd_detect(args) -> int:
    started = time.perf_counter()
    route = ROUTE_ALIASES[args.route]
    source = {}
    if args.state is not None:
        obj = _load_state(args.state)
        if route == "analytic":
            raise UnsupportedRoute("the analytic route needs a formula, not a state file")
        psi = obj if isinstance(obj, PureState) else None
        rho = obj if isinstance(obj, DensityOp) else None
        source["state"] = args.state
    else:
        f = _formula(args)
        lo = 0 if args.range is None else args.range[0]
        hi = (1 << f.n) - 1 if args.range is None else args.range[1]
        source.update(expr=f.to_expr(), n=f.n, lo=lo, hi=hi)
        if route == "analytic":
            verdict = analytic_test(f, lo, hi)
            _emit(_envelope(args, {"source": source, "verdict": verdict.to_dict()}, started), args.out)
            return EXIT_OK
        psi = post_oracle_state(f, lo, hi, RegisterLayout.for_mode(f.n, args.mode))
        rho = None
    if rho is None:
        if route == "purity":
            verdict = purity_test(psi)
            _emit(_envelope(args, {"source": source, "verdict": verdict.to_dict()}, started), args.out)
            return EXIT_OK
        rho = density_from_state(psi)
    if len(rho.dims) != 2:
        raise UnsupportedRoute(f"state dims {rho.dims} are not bipartite")
    if route == "purity":
        raise UnsupportedRoute("the purity route needs a pure state")
    if route == "ppt":
        verdict = ppt_test(rho)
    else:
        da, db = rho.dims
        if da != db:
            raise UnsupportedRoute(f"SPA routes need a d⊗d state, got {da}⊗{db}")
        spa = transpose_spa(da)
        if route == "spa-exact":
            verdict = spa_test_exact(rho, spa)
        else:
            verdict = spa_test_estimated(rho, spa, CopyEstimatorConfig(args.copies, args.seed, args.reps))
    _emit(_envelope(args, {"source": source, "verdict": verdict.to_dict()}, started), args.out)
    return EXIT_OK


def cmd_copies(args) -> int:
    started = time.perf_counter()
    result = {}
    if args.L is not None:
        result["copies_required"] = {"L": args.L, "c": args.c, "N": copies_required(args.L, args.c)}
    if args.check_ratio:
        result["ratio_table"] = ratio_table(c=args.c)
    if args.csv:
        points = overlap_grid(points=args.points)
        write_atomic(args.csv, grid_csv(points))
        result["grid"] = {"path": args.csv, "rows": len(points)}
    _emit(_envelope(args, result, started), args.out)
    return EXIT_OK


def cmd_grid(args) -> int:
    points = overlap_grid(tuple(args.L_range), tuple(args.N_range), args.points)
    _emit(grid_csv(points), args.csv)
    return EXIT_OK


def cmd_bench(args) -> int:
    started = time.perf_counter()
    route = ROUTE_ALIASES[args.route]
    rows = []
    for n in range(args.n_min, args.n_max + 1):
        index = (args.seed * 2654435761 + n) % (1 << n)     # deterministic planted position
        f = planted_formula(n, index)
        for infer in (True, False):
            cfg = SearchConfig(route=route, mode=args.mode, estimator=_estimator(args, route),
                               infer_complement=infer)
            outcome = search(f, cfg)
            baseline = classical_baseline(f)
            cost = cost_model(outcome.trace, n, f.m, args.copies)
            rows.append({
                "n": n,
                "planted_index": index,
                "infer_complement": infer,
                "status": outcome.status,
                "detector_calls": outcome.trace.detector_calls,
                "classical_evaluations": baseline.trace.classical_evaluations,
                "detection_cost": cost["detection_cost"],
                "total_cost": cost["total_cost"],
                "classical_worst_case": cost["classical_worst_case"],
            })
    if args.csv:
        header = list(rows[0])
        lines = [",".join(header)] + [",".join(str(r[h]) for h in header) for r in rows]
        write_atomic(args.csv, "\n".join(lines) + "\n")
    _emit(_envelope(args, {"rows": rows}, started), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------- #
# argument parsing
# --------------------------------------------------------------------------- #

def _add_common(p, formula=True):
    if formula:
        src = p.add_mutually_exclusive_group()
        src.add_argument("--expr", help="infix formula, e.g. '(x1 & x2) | x3'")
        src.add_argument("--cnf", help="DIMACS CNF file")
    p.add_argument("--route", choices=sorted(ROUTE_ALIASES), default="analytic")
    p.add_argument("--mode", choices=("minimal", "dxd"), default="minimal")
    p.add_argument("--copies", type=int, default=1 << 14, help="copies N per estimate")
    p.add_argument("--reps", type=int, default=5, help="majority-vote repetitions (odd)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the JSON result here instead of stdout")
    p.add_argument("--canonical", action="store_true", help="omit wall-clock time from the output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entsearch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="branch-and-bound search for satisfying assignments")
    _add_common(p)
    p.add_argument("--all", action="store_true", help="enumerate every solution")
    p.add_argument("--no-infer", action="store_true", help="test both halves at every level")
    p.add_argument("--max-solutions", type=int)
    p.add_argument("--budget", type=int, help="maximum number of detector calls")
    p.add_argument("--csv", help="write the trace events as CSV")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("detect", help="run one separability test")
    _add_common(p)
    p.add_argument("--state", help="JSON state/density file ([re, im] pairs, row-major)")
    p.add_argument("--range", nargs=2, type=int, metavar=("LO", "HI"))
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("copies", help="copies needed to separate one-solution from no-solution states")
    p.add_argument("--L", type=int, help="search-space dimension")
    p.add_argument("--c", type=float, default=0.5, help="target overlap")
    p.add_argument("--check-ratio", action="store_true", help="tabulate N*/L against ln(1/c)")
    p.add_argument("--csv", help="also write the overlap grid CSV here")
    p.add_argument("--points", type=int, default=64)
    p.add_argument("--out")
    p.add_argument("--canonical", action="store_true")
    p.set_defaults(func=cmd_copies)

    p = sub.add_parser("grid", help="overlap grid CSV over (L, N)")
    p.add_argument("--L-range", nargs=2, type=int, default=(2, 1 << 30), metavar=("LO", "HI"))
    p.add_argument("--N-range", nargs=2, type=int, default=(2, 1 << 30), metavar=("LO", "HI"))
    p.add_argument("--points", type=int, default=64)
    p.add_argument("--csv", help="output path (stdout if omitted)")
    p.add_argument("--canonical", action="store_true")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("bench", help="detector calls vs classical scan on planted instances")
    _add_common(p, formula=False)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (CapExceededError, UnsupportedRoute) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
