"""Brute-force oracle: enumerate active sets and compare against a solver.

For q inequality rows, every subset S of {0, ..., q-1} is tried as the
active set. Treating the rows in S as equalities gives the linear system

    [ H    G'   A_S' ] [ z    ]   [ -f  ]
    [ G    0    0    ] [ lam  ] = [  h  ]
    [ A_S  0    0    ] [ v_S  ]   [ b_S ]

whose solution is a KKT point when v_S >= 0 and A z <= b holds on the
inactive rows. The lowest objective over all accepted subsets is the
optimum. This is exponential in q by design; it exists to check the Newton
solver, not to be fast, and refuses q > 16.
"""

from __future__ import annotations

import enum
import itertools
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .problem import Iterate, QpProblem
from .solver import SolveResult, SolveStatus

__all__ = [
    "OracleStatus",
    "OracleResult",
    "active_set_solve",
    "oracle_agrees",
    "MAX_ORACLE_INEQUALITIES",
]

MAX_ORACLE_INEQUALITIES = 16

# Numerical slack when accepting a candidate active set.
_FEAS_TOL = 1e-9
_DUAL_TOL = 1e-9
# Two accepted candidates tie when objectives agree this closely.
_TIE_TOL = 1e-9
# ... and the tie is only degenerate if the points or multipliers differ by more.
_DISTINCT_TOL = 1e-6


class OracleStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    TOO_LARGE = "TooLarge"


@dataclass(frozen=True)
class OracleResult:
    """Outcome of the enumeration.

    ``solution`` is present exactly when status is Optimal. The
    ``multiplicity_flag`` is set when several accepted active sets tie on
    the objective while disagreeing on the point or on the multipliers, in
    which case only primal quantities are trustworthy for comparisons.
    """

    status: OracleStatus
    solution: Iterate | None
    objective: float | None
    active_set: tuple[int, ...] | None
    multiplicity_flag: bool


def _feasible_point_exists(problem: QpProblem) -> bool:
    """LP feasibility check for {G z = h, A z <= b}, independent of H and f."""
    n = problem.n
    result = scipy.optimize.linprog(
        c=np.zeros(n),
        A_ub=problem.A if problem.q else None,
        b_ub=problem.b if problem.q else None,
        A_eq=problem.G if problem.p else None,
        b_eq=problem.h if problem.p else None,
        bounds=[(None, None)] * n,
        method="highs",
    )
    # linprog status 2 means proven infeasible; anything else leaves the
    # region nonempty (free variables cannot make a feasibility LP unbounded).
    return result.status != 2


def active_set_solve(problem: QpProblem, max_q: int = MAX_ORACLE_INEQUALITIES) -> OracleResult:
    """Enumerate all active sets and return the best KKT point found.

    Subsets whose bordered system is singular (to numerical tolerance) are
    skipped. When no subset is accepted, a feasibility LP distinguishes
    ``INFEASIBLE`` from ``UNBOUNDED``. Active-set indices are 0-based row
    indices into A.

    Returns:
        ``OracleResult``; status ``TOO_LARGE`` when q > max_q.
    """
    n, p, q = problem.n, problem.p, problem.q
    if q > max_q:
        return OracleResult(OracleStatus.TOO_LARGE, None, None, None, False)

    accepted: list[tuple[float, Iterate, tuple[int, ...]]] = []
    for size in range(q + 1):
        for subset in itertools.combinations(range(q), size):
            rows = np.array(subset, dtype=int)
            A_S = problem.A[rows] if size else np.zeros((0, n))
            b_S = problem.b[rows] if size else np.zeros(0)
            dim = n + p + size
            system = np.zeros((dim, dim))
            system[:n, :n] = problem.H
            system[:n, n : n + p] = problem.G.T
            system[:n, n + p :] = A_S.T
            system[n : n + p, :n] = problem.G
            system[n + p :, :n] = A_S
            rhs = np.concatenate((-problem.f, problem.h, b_S))
            try:
                with warnings.catch_warnings():
                    # Near-singular subsets are rejected by the residual
                    # check below; warnings (ill conditioning, divide by
                    # zero on diagonal fast paths) are just noise here.
                    warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                    warnings.simplefilter("ignore", RuntimeWarning)
                    solution = scipy.linalg.solve(system, rhs)
            except (scipy.linalg.LinAlgError, ValueError):
                continue
            if not np.all(np.isfinite(solution)):
                continue
            # Guard against near-singular systems that "solved" to garbage.
            if np.max(np.abs(system @ solution - rhs), initial=0.0) > 1e-7 * (
                1.0 + np.max(np.abs(rhs), initial=0.0)
            ):
                continue
            z = solution[:n]
            lam = solution[n : n + p]
            v = np.zeros(q)
            if size:
                v_S = solution[n + p :]
                if np.min(v_S) < -_DUAL_TOL:
                    continue
                v[rows] = v_S
            slack = problem.b - problem.A @ z
            if q and np.min(slack) < -_FEAS_TOL:
                continue
            accepted.append((problem.objective(z), Iterate(z, lam, v), subset))

    if not accepted:
        if _feasible_point_exists(problem):
            return OracleResult(OracleStatus.UNBOUNDED, None, None, None, False)
        return OracleResult(OracleStatus.INFEASIBLE, None, None, None, False)

    accepted.sort(key=lambda item: item[0])
    best_objective, best_iterate, best_subset = accepted[0]
    multiplicity = False
    for objective, iterate, _ in accepted[1:]:
        if objective > best_objective + _TIE_TOL:
            break
        z_gap = np.max(np.abs(iterate.z - best_iterate.z), initial=0.0)
        v_gap = np.max(np.abs(iterate.v - best_iterate.v), initial=0.0)
        if z_gap > _DISTINCT_TOL or v_gap > _DISTINCT_TOL:
            multiplicity = True
            break
    if not multiplicity and q:
        # Tie enumeration misses dual rays: when the gradients of all rows
        # binding at the optimum (plus equalities) are rank-deficient, the
        # multipliers are not unique even though only one basic candidate
        # was accepted.
        slack = problem.b - problem.A @ best_iterate.z
        binding = np.flatnonzero(slack <= 1e-7)
        stack = np.vstack((problem.G, problem.A[binding]))
        if stack.shape[0] and np.linalg.matrix_rank(stack) < stack.shape[0]:
            multiplicity = True
    return OracleResult(
        status=OracleStatus.OPTIMAL,
        solution=best_iterate,
        objective=best_objective,
        active_set=tuple(int(i) for i in best_subset),
        multiplicity_flag=multiplicity,
    )


def oracle_agrees(
    problem: QpProblem,
    result: SolveResult,
    oracle: OracleResult | None = None,
    tol: float = 1e-6,
    dual_tol: float | None = None,
) -> bool:
    """Check a solver result against the enumeration oracle.

    Agreement means: both sides claim solvability consistently, the primal
    points match within ``tol`` (infinity norm), and the objectives match
    within ``tol * (1 + |objective|)``. Multipliers are compared at
    ``dual_tol`` (default ``10 * tol``), and only when the oracle found a
    unique optimum (``multiplicity_flag`` unset); ties make the dual side
    non-unique, so only primal quantities are meaningful there.

    Args:
        oracle: reuse a precomputed ``active_set_solve`` outcome; computed
            on the fly when omitted.
    """
    if oracle is None:
        oracle = active_set_solve(problem)
    if oracle.status is OracleStatus.TOO_LARGE:
        raise ValueError(f"oracle refuses problems with q > {MAX_ORACLE_INEQUALITIES}")
    if dual_tol is None:
        dual_tol = 10.0 * tol
    solver_claims_solved = result.status is SolveStatus.SOLVED
    if oracle.status is not OracleStatus.OPTIMAL:
        return not solver_claims_solved
    if not solver_claims_solved:
        return False
    z_gap = np.max(np.abs(result.iterate.z - oracle.solution.z), initial=0.0)
    if z_gap > tol:
        return False
    objective_gap = abs(problem.objective(result.iterate.z) - oracle.objective)
    if objective_gap > tol * (1.0 + abs(oracle.objective)):
        return False
    if not oracle.multiplicity_flag:
        lam_gap = np.max(np.abs(result.iterate.lam - oracle.solution.lam), initial=0.0)
        v_gap = np.max(np.abs(result.iterate.v - oracle.solution.v), initial=0.0)
        if lam_gap > dual_tol or v_gap > dual_tol:
            return False
    return True
