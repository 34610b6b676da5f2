"""Command line front end.

Subcommands:
    solve   solve a problem file, optionally writing a JSON report and a
            per-iteration trace CSV
    check   re-verify a solution against a problem at a tolerance
    gen     write a random problem file with a planted solution
    oracle  run the active-set enumeration on a small problem

Exit codes: 0 success (solve: status Solved; check: within tolerance;
oracle: optimum found), 1 usage or input errors (including invalid
problems and oversized oracle calls), 2 honest negative outcomes
(non-convergence, failed check, infeasible or unbounded).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io as qpio
from .ncp import NcpConfig
from .oracle import OracleStatus, active_set_solve
from .problem import GeneratorSpec, Iterate, kkt_error, random_problem
from .solver import SolveStatus, SolverConfig, solve

__all__ = ["build_parser", "cli_main", "main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad arguments; route that to our own
    # error handling (usage problems are exit code 1 here).
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fbqp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p_solve = sub.add_parser("solve", help="solve a problem file")
    p_solve.add_argument("problem", help="problem file (JSON)")
    p_solve.add_argument("--tol", type=float, default=1e-8, help="KKT tolerance")
    p_solve.add_argument("--alpha", type=float, default=0.95,
                         help="complementarity function weight in (0, 1)")
    p_solve.add_argument("--sigma0", type=float, default=1e-3,
                         help="initial proximal weight")
    p_solve.add_argument("--sigma-shrink", type=float, default=0.1,
                         help="per-stage shrink factor for the proximal weight")
    p_solve.add_argument("--max-outer", type=int, default=30)
    p_solve.add_argument("--max-inner", type=int, default=50)
    p_solve.add_argument("--prox", choices=("recenter", "zero"), default="recenter",
                         help="proximal center policy per stage")
    p_solve.add_argument("--warm-start", metavar="FILE",
                         help="start from the solution in FILE")
    p_solve.add_argument("--trace", metavar="FILE",
                         help="write per-iteration trace CSV to FILE")
    p_solve.add_argument("--json", action="store_true", help="JSON report on stdout")
    p_solve.set_defaults(func=_cmd_solve)

    p_check = sub.add_parser("check", help="re-verify a solution")
    p_check.add_argument("problem", help="problem file (JSON)")
    p_check.add_argument("--solution", metavar="FILE",
                         help="solution file; defaults to the problem's own solution block")
    p_check.add_argument("--tol", type=float, default=1e-8)
    p_check.add_argument("--json", action="store_true")
    p_check.set_defaults(func=_cmd_check)

    p_gen = sub.add_parser("gen", help="generate a random problem with planted solution")
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--p", type=int, default=0)
    p_gen.add_argument("--q", type=int, default=0)
    p_gen.add_argument("--active-frac", type=float, default=0.5,
                       help="fraction of inequality rows active at the planted solution")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("-o", "--output", required=True, metavar="FILE")
    p_gen.set_defaults(func=_cmd_gen)

    p_oracle = sub.add_parser("oracle", help="brute-force active-set enumeration")
    p_oracle.add_argument("problem", help="problem file (JSON)")
    p_oracle.add_argument("--json", action="store_true")
    p_oracle.set_defaults(func=_cmd_oracle)

    parser.set_defaults(func=None)
    return parser


def _print_json(document) -> None:
    print(json.dumps(document, sort_keys=True, allow_nan=False))


def _solution_doc(iterate: Iterate) -> dict:
    return {
        "z": [float(x) for x in iterate.z],
        "lambda": [float(x) for x in iterate.lam],
        "v": [float(x) for x in iterate.v],
    }


def _format_vector(vec: np.ndarray) -> str:
    return np.array2string(vec, max_line_width=100000, separator=", ")


def _cmd_solve(args) -> int:
    problem, _ = qpio.load_problem(args.problem)
    config = SolverConfig(
        ncp=NcpConfig(alpha=args.alpha),
        sigma0=args.sigma0,
        sigma_shrink=args.sigma_shrink,
        tol_kkt=args.tol,
        max_outer=args.max_outer,
        max_inner=args.max_inner,
        prox_center_mode="prox_recenter" if args.prox == "recenter" else "fixed_zero",
    )
    warm = None
    if args.warm_start:
        with open(args.warm_start, "r", encoding="utf-8") as handle:
            warm = qpio.parse_solution(
                handle.read(), n=problem.n, p=problem.p, q=problem.q
            )
    result = solve(problem, config, warm_start=warm)
    if args.trace:
        qpio.write_trace(result.trace, args.trace)
    if result.status is SolveStatus.INVALID_PROBLEM:
        print("error: problem failed validation; run with a well-formed problem",
              file=sys.stderr)
        return 1
    objective = problem.objective(result.iterate.z)
    if args.json:
        _print_json({
            "status": result.status.value,
            "objective": objective,
            "kkt": result.kkt.as_dict(),
            "outer_iterations": result.outer_iterations,
            "inner_iterations": result.inner_iterations,
            "factorizations": result.factorizations,
            "solution": _solution_doc(result.iterate),
        })
    else:
        print(f"status: {result.status.value}")
        print(f"objective: {objective!r}")
        print(f"kkt_max: {result.kkt.max_error():.3e}")
        for name, value in result.kkt.as_dict().items():
            print(f"  {name}: {value:.3e}")
        print(f"outer_iterations: {result.outer_iterations}")
        print(f"inner_iterations: {result.inner_iterations}")
        print(f"factorizations: {result.factorizations}")
        print(f"z: {_format_vector(result.iterate.z)}")
    return 0 if result.status is SolveStatus.SOLVED else 2


def _cmd_check(args) -> int:
    problem, embedded = qpio.load_problem(args.problem)
    if args.solution:
        with open(args.solution, "r", encoding="utf-8") as handle:
            iterate = qpio.parse_solution(
                handle.read(), n=problem.n, p=problem.p, q=problem.q
            )
    elif embedded is not None:
        iterate = embedded
    else:
        print("error: no solution to check; pass --solution or embed one",
              file=sys.stderr)
        return 1
    kkt = kkt_error(problem, iterate)
    ok = kkt.within(args.tol)
    if args.json:
        _print_json({"ok": ok, "tol": args.tol, "kkt": kkt.as_dict(),
                     "objective": problem.objective(iterate.z)})
    else:
        print(f"ok: {str(ok).lower()}")
        print(f"tol: {args.tol!r}")
        for name, value in kkt.as_dict().items():
            print(f"  {name}: {value:.3e}")
    return 0 if ok else 2


def _cmd_gen(args) -> int:
    try:
        spec = GeneratorSpec(
            n=args.n,
            p=args.p,
            q=args.q,
            activity_fraction=args.active_frac,
            seed=args.seed,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    problem, planted = random_problem(spec)
    qpio.save_problem(
        args.output, problem, solution=planted,
        metadata={"seed": args.seed, "activity_fraction": args.active_frac},
    )
    print(f"wrote {args.output} (n={problem.n}, p={problem.p}, q={problem.q})")
    return 0


def _cmd_oracle(args) -> int:
    problem, _ = qpio.load_problem(args.problem)
    outcome = active_set_solve(problem)
    if outcome.status is OracleStatus.TOO_LARGE:
        print(f"error: oracle enumeration refuses q = {problem.q} > 16 inequalities",
              file=sys.stderr)
        return 1
    if args.json:
        document = {"status": outcome.status.value,
                    "multiplicity_flag": outcome.multiplicity_flag}
        if outcome.status is OracleStatus.OPTIMAL:
            document["objective"] = outcome.objective
            document["active_set"] = list(outcome.active_set)
            document["solution"] = _solution_doc(outcome.solution)
        _print_json(document)
    else:
        print(f"status: {outcome.status.value}")
        if outcome.status is OracleStatus.OPTIMAL:
            print(f"objective: {outcome.objective!r}")
            print(f"active_set: {list(outcome.active_set)}")
            print(f"multiplicity_flag: {str(outcome.multiplicity_flag).lower()}")
            print(f"z: {_format_vector(outcome.solution.z)}")
    return 0 if outcome.status is OracleStatus.OPTIMAL else 2


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(parser.format_usage().rstrip(), file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if args.func is None:
        print(parser.format_usage().rstrip(), file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (OSError, qpio.ProblemFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))
