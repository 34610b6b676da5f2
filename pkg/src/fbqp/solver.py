"""Regularized semismooth Newton solver for the KKT system.

The KKT conditions of the QP are recast as a square root-finding problem

    R(z, lambda, v) = [ H z + f + G' lambda + A' v + sigma (z - z_c)      ]
                      [ -G z + h + sigma (lambda - lambda_c)              ]
                      [ phi(b - A z, v)   (elementwise)                   ]

where phi is the penalized Fischer-Burmeister function and sigma > 0 is a
proximal regularization weight with center (z_c, lambda_c). For sigma > 0
the generalized Jacobian of R is nonsingular on convex data, so a damped
Newton iteration on the merit 0.5 ||R||^2 is well defined. An outer loop
shrinks sigma geometrically and (by default) re-centers the proximal term
at the current iterate, driving the iterates to a solution of the
unregularized system. Termination is certified against the sigma-free
KKT residuals only.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .ncp import NcpConfig, phi_derivative_vec, phi_vec
from .problem import Iterate, KktError, QpProblem, kkt_error, validate_problem

__all__ = [
    "SolveStatus",
    "SolverConfig",
    "ResidualBreakdown",
    "TraceRecord",
    "SolveResult",
    "SingularSystemError",
    "LineSearchStalledError",
    "residual",
    "assemble_jacobian",
    "newton_direction",
    "line_search",
    "solve",
]

# Below this merit the regularized subproblem is solved to roundoff and
# further Newton steps are numerically meaningless.
_MERIT_FLOOR = 1e-32
# Per-stage inexactness: a stage ends once its residual norm is below
# _STAGE_ETA * sigma * (1 + iterate scale). Solving subproblems tighter
# than this wastes Newton steps without moving the outer iteration.
_STAGE_ETA = 0.1
# When a stage exits with merit this far below the square of the KKT error,
# the iterate is the regularized system's root to machine precision and the
# remaining error is pure proximal bias; the next stage then drops sigma
# straight to the floor rather than shedding the bias one decade at a time.
_ENDGAME_RATIO = 1e-6
# Relative accuracy demanded of a computed Newton step.
_DIRECTION_TOL = 1e-10
# Number of escalating diagonal perturbations tried after a failed factorization.
_PERTURB_ATTEMPTS = 3


class SolveStatus(enum.Enum):
    SOLVED = "Solved"
    MAX_ITERATIONS = "MaxIterations"
    LINE_SEARCH_STALLED = "LineSearchStalled"
    SINGULAR_SYSTEM = "SingularSystem"
    INVALID_PROBLEM = "InvalidProblem"


class SingularSystemError(RuntimeError):
    """The Newton system could not be solved to tolerance, even perturbed."""


class LineSearchStalledError(RuntimeError):
    """Backtracking hit the minimum step without sufficient decrease."""


@dataclass(frozen=True)
class SolverConfig:
    """All solver knobs, with working defaults.

    Args:
        ncp: parameters of the complementarity function.
        sigma0: initial proximal weight.
        sigma_shrink: geometric factor in (0, 1) applied per outer stage.
        sigma_min: floor for the proximal weight; keeps the Jacobian
            nonsingular at degenerate solutions.
        prox_center_mode: "prox_recenter" moves the proximal center to the
            current iterate at each outer stage; "fixed_zero" keeps it at
            the origin.
        tol_kkt: termination tolerance on the unregularized KKT residuals.
        max_outer: number of sigma stages.
        max_inner: Newton iterations per stage.
        armijo_c: sufficient-decrease constant in (0, 0.5).
        backtrack_factor: step shrink factor in (0, 1).
        min_step: smallest step tried before declaring a stall.
        jacobian_perturb: first diagonal perturbation tried when a Newton
            system fails; escalates tenfold per retry.
    """

    ncp: NcpConfig = field(default_factory=NcpConfig)
    sigma0: float = 1e-3
    sigma_shrink: float = 0.1
    sigma_min: float = 1e-12
    prox_center_mode: str = "prox_recenter"
    tol_kkt: float = 1e-8
    max_outer: int = 30
    max_inner: int = 50
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    min_step: float = 1e-12
    jacobian_perturb: float = 1e-10

    def __post_init__(self):
        if self.sigma0 <= 0 or self.sigma_min <= 0:
            raise ValueError("sigma0 and sigma_min must be positive")
        if not (0.0 < self.sigma_shrink < 1.0):
            raise ValueError(f"sigma_shrink must lie in (0, 1), got {self.sigma_shrink}")
        if self.prox_center_mode not in ("prox_recenter", "fixed_zero"):
            raise ValueError(f"unknown prox_center_mode {self.prox_center_mode!r}")
        if self.tol_kkt <= 0:
            raise ValueError("tol_kkt must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("max_outer and max_inner must be at least 1")
        if not (0.0 < self.armijo_c < 0.5):
            raise ValueError(f"armijo_c must lie in (0, 0.5), got {self.armijo_c}")
        if not (0.0 < self.backtrack_factor < 1.0):
            raise ValueError(
                f"backtrack_factor must lie in (0, 1), got {self.backtrack_factor}"
            )
        if self.min_step <= 0 or self.jacobian_perturb <= 0:
            raise ValueError("min_step and jacobian_perturb must be positive")


@dataclass(frozen=True)
class ResidualBreakdown:
    """The three residual blocks at one point, plus the merit 0.5 ||R||^2."""

    stationarity_block: np.ndarray
    equality_block: np.ndarray
    complementarity_block: np.ndarray
    merit: float

    def as_vector(self) -> np.ndarray:
        return np.concatenate(
            (self.stationarity_block, self.equality_block, self.complementarity_block)
        )


@dataclass(frozen=True)
class TraceRecord:
    """One accepted Newton step: stage counters, merit after the step, the
    sigma-free KKT error after the step, and the accepted step length."""

    outer: int
    inner: int
    sigma: float
    merit: float
    kkt_max: float
    step_len: float


@dataclass(frozen=True)
class SolveResult:
    iterate: Iterate
    status: SolveStatus
    kkt: KktError
    trace: tuple[TraceRecord, ...]
    inner_iterations: int
    factorizations: int
    outer_iterations: int
    config: SolverConfig

    @property
    def solved(self) -> bool:
        return self.status is SolveStatus.SOLVED


def _require_match(problem: QpProblem, iterate: Iterate) -> None:
    if not iterate.matches(problem):
        raise ValueError(
            f"iterate shapes {iterate.z.shape}/{iterate.lam.shape}/{iterate.v.shape} "
            f"do not match problem with (n, p, q) = ({problem.n}, {problem.p}, {problem.q})"
        )


def residual(
    problem: QpProblem,
    iterate: Iterate,
    sigma: float,
    center: Iterate,
    config: SolverConfig | None = None,
) -> ResidualBreakdown:
    """Evaluate the regularized residual R at an iterate.

    Args:
        sigma: proximal weight, must be nonnegative. Zero gives the plain
            (unregularized) KKT residual in root form.
        center: proximal center; only its z and lam components enter.

    Raises:
        ValueError: on shape mismatch or negative sigma.
    """
    config = config or SolverConfig()
    _require_match(problem, iterate)
    _require_match(problem, center)
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    z, lam, v = iterate.z, iterate.lam, iterate.v
    stationarity = (
        problem.H @ z
        + problem.f
        + problem.G.T @ lam
        + problem.A.T @ v
        + sigma * (z - center.z)
    )
    equality = -(problem.G @ z) + problem.h + sigma * (lam - center.lam)
    slack = problem.b - problem.A @ z
    complementarity = phi_vec(slack, v, config.ncp) if problem.q else np.zeros(0)
    merit = 0.5 * (
        stationarity @ stationarity + equality @ equality + complementarity @ complementarity
    )
    return ResidualBreakdown(stationarity, equality, complementarity, float(merit))


def assemble_jacobian(
    problem: QpProblem,
    iterate: Iterate,
    sigma: float,
    config: SolverConfig | None = None,
) -> np.ndarray:
    """Generalized Jacobian of the regularized residual at an iterate.

    Block form, with D_y and D_v the diagonal generalized derivatives of
    phi at (b - A z, v):

        [ H + sigma I    G'         A'  ]
        [ -G             sigma I    0   ]
        [ -D_y A         0          D_v ]
    """
    config = config or SolverConfig()
    _require_match(problem, iterate)
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    n, p, q = problem.n, problem.p, problem.q
    size = n + p + q
    jac = np.zeros((size, size))
    jac[:n, :n] = problem.H + sigma * np.eye(n)
    jac[:n, n : n + p] = problem.G.T
    jac[:n, n + p :] = problem.A.T
    jac[n : n + p, :n] = -problem.G
    jac[n : n + p, n : n + p] = sigma * np.eye(p)
    if q:
        slack = problem.b - problem.A @ iterate.z
        d_y, d_v = phi_derivative_vec(slack, iterate.v, config.ncp)
        jac[n + p :, :n] = -d_y[:, None] * problem.A
        jac[n + p :, n + p :] = np.diag(d_v)
    return jac


def _solve_checked(
    matrix: np.ndarray, rhs: np.ndarray, tol: float
) -> np.ndarray | None:
    """LU-solve with one iterative refinement pass; None if still inaccurate.

    Acceptance is backward-stable: the absolute bound ``tol`` is widened by
    a term proportional to ``||matrix|| * ||x||``, since no double-precision
    solve can beat that floor when the solution dwarfs the right-hand side.
    """
    try:
        with warnings.catch_warnings():
            # Singular factors are detected by the residual check; the
            # perturbation ladder above handles the retry.
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu = scipy.linalg.lu_factor(matrix, check_finite=False)
    except (ValueError, scipy.linalg.LinAlgError):
        return None
    row_norm = float(np.max(np.abs(matrix).sum(axis=1), initial=0.0))
    x = scipy.linalg.lu_solve(lu, rhs, check_finite=False)
    if not np.all(np.isfinite(x)):
        return None

    def accepted(candidate: np.ndarray) -> bool:
        back = matrix @ candidate - rhs
        bound = tol + _DIRECTION_TOL * row_norm * float(
            np.max(np.abs(candidate), initial=0.0)
        )
        return float(np.max(np.abs(back), initial=0.0)) <= bound

    if accepted(x):
        return x
    x = x - scipy.linalg.lu_solve(lu, matrix @ x - rhs, check_finite=False)
    if not np.all(np.isfinite(x)):
        return None
    if accepted(x):
        return x
    return None


def _newton_direction(
    jacobian: np.ndarray, residual_vector: np.ndarray, perturb0: float
) -> tuple[np.ndarray, int]:
    """Solve J d = -R, escalating a diagonal perturbation if needed.

    Returns (direction, factorization_count).
    """
    tol = _DIRECTION_TOL * (1.0 + np.max(np.abs(residual_vector), initial=0.0))
    rhs = -residual_vector
    factorizations = 0
    perturb = 0.0
    for _ in range(1 + _PERTURB_ATTEMPTS):
        matrix = jacobian if perturb == 0.0 else jacobian + perturb * np.eye(jacobian.shape[0])
        factorizations += 1
        direction = _solve_checked(matrix, rhs, tol)
        if direction is not None:
            return direction, factorizations
        perturb = perturb0 if perturb == 0.0 else perturb * 10.0
    raise SingularSystemError(
        f"Newton system unsolved to tolerance after {_PERTURB_ATTEMPTS} perturbed retries"
    )


def newton_direction(
    jacobian: np.ndarray, residual_vector: np.ndarray, config: SolverConfig | None = None
) -> np.ndarray:
    """Direction d with J d = -R, accurate to 1e-10 * (1 + ||R||_inf).

    On a failed factorization the system is retried with an escalating
    diagonal perturbation (starting at ``config.jacobian_perturb``) before
    ``SingularSystemError`` is raised.
    """
    config = config or SolverConfig()
    residual_vector = np.asarray(residual_vector, dtype=float)
    direction, _ = _newton_direction(jacobian, residual_vector, config.jacobian_perturb)
    return direction


def _split(problem: QpProblem, direction: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n, p = problem.n, problem.p
    return direction[:n], direction[n : n + p], direction[n + p :]


def _line_search(
    problem: QpProblem,
    iterate: Iterate,
    direction: np.ndarray,
    sigma: float,
    center: Iterate,
    config: SolverConfig,
    base_merit: float,
) -> tuple[float, Iterate, float]:
    dz, dlam, dv = _split(problem, direction)
    step = 1.0
    while step >= config.min_step:
        candidate = Iterate(
            iterate.z + step * dz, iterate.lam + step * dlam, iterate.v + step * dv
        )
        merit = residual(problem, candidate, sigma, center, config).merit
        if merit <= (1.0 - 2.0 * config.armijo_c * step) * base_merit:
            return step, candidate, merit
        step *= config.backtrack_factor
    raise LineSearchStalledError(
        f"no step >= {config.min_step} gave sufficient decrease from merit {base_merit:.3e}"
    )


def line_search(
    problem: QpProblem,
    iterate: Iterate,
    direction: np.ndarray,
    sigma: float,
    center: Iterate,
    config: SolverConfig | None = None,
) -> tuple[float, Iterate]:
    """Backtracking Armijo search on the merit 0.5 ||R||^2.

    Tries the full step first, then shrinks by ``backtrack_factor``. A step
    t is accepted when merit(x + t d) <= (1 - 2 c t) * merit(x).

    Returns:
        (step, new_iterate).

    Raises:
        LineSearchStalledError: when no step of at least ``min_step`` passes.
    """
    config = config or SolverConfig()
    direction = np.asarray(direction, dtype=float)
    base = residual(problem, iterate, sigma, center, config).merit
    step, candidate, _ = _line_search(
        problem, iterate, direction, sigma, center, config, base
    )
    return step, candidate


def solve(
    problem: QpProblem,
    config: SolverConfig | None = None,
    warm_start: Iterate | None = None,
    validate: bool = True,
) -> SolveResult:
    """Solve the QP via sigma-continuation over damped semismooth Newton.

    Args:
        problem: the QP instance.
        config: solver parameters; defaults to ``SolverConfig()``.
        warm_start: starting iterate; default is z = 0, lambda = 0, v = 1.
        validate: screen the problem first and return status
            ``INVALID_PROBLEM`` (without iterating) when the screen fails.

    Returns:
        A ``SolveResult``. Status ``SOLVED`` certifies that the plain KKT
        residuals, recomputed without any regularization, are all within
        ``config.tol_kkt``. The trace holds one record per accepted step.
    """
    config = config or SolverConfig()
    start = warm_start if warm_start is not None else Iterate.start(problem)
    _require_match(problem, start)

    if validate and not validate_problem(problem).ok:
        return SolveResult(
            iterate=start,
            status=SolveStatus.INVALID_PROBLEM,
            kkt=kkt_error(problem, start),
            trace=(),
            inner_iterations=0,
            factorizations=0,
            outer_iterations=0,
            config=config,
        )

    x = start
    zero_center = Iterate(np.zeros(problem.n), np.zeros(problem.p), np.zeros(problem.q))
    trace: list[TraceRecord] = []
    inner_total = 0
    factorizations = 0
    outer_used = 0
    stalled = False
    singular = False
    kkt = kkt_error(problem, x)
    solved = kkt.within(config.tol_kkt)

    polish = False
    for outer in range(config.max_outer):
        if solved:
            break
        if polish:
            sigma = config.sigma_min
            polish = False
        else:
            sigma = max(config.sigma0 * config.sigma_shrink**outer, config.sigma_min)
        center = x if config.prox_center_mode == "prox_recenter" else zero_center
        scale = 1.0 + float(
            np.sqrt(x.z @ x.z + x.lam @ x.lam + x.v @ x.v)
        )
        stage_merit_target = max(0.5 * (_STAGE_ETA * sigma * scale) ** 2, _MERIT_FLOOR)
        outer_used = outer + 1
        stalled = False
        for inner in range(config.max_inner):
            if kkt.within(config.tol_kkt):
                solved = True
                break
            breakdown = residual(problem, x, sigma, center, config)
            if breakdown.merit <= stage_merit_target:
                # Subproblem solved to sigma-proportional accuracy; move on.
                polish = breakdown.merit <= _ENDGAME_RATIO * 0.5 * kkt.max_error() ** 2
                break
            jacobian = assemble_jacobian(problem, x, sigma, config)
            try:
                direction, nfact = _newton_direction(
                    jacobian, breakdown.as_vector(), config.jacobian_perturb
                )
            except SingularSystemError:
                singular = True
                factorizations += 1 + _PERTURB_ATTEMPTS
                break
            factorizations += nfact
            try:
                step, x, merit = _line_search(
                    problem, x, direction, sigma, center, config, breakdown.merit
                )
            except LineSearchStalledError:
                stalled = True
                break
            kkt = kkt_error(problem, x)
            inner_total += 1
            trace.append(
                TraceRecord(
                    outer=outer,
                    inner=inner,
                    sigma=sigma,
                    merit=merit,
                    kkt_max=kkt.max_error(),
                    step_len=step,
                )
            )
        if solved or singular:
            break

    if not solved:
        # The inner budget can end right on the achieving step.
        solved = kkt.within(config.tol_kkt)

    if solved:
        status = SolveStatus.SOLVED
    elif singular:
        status = SolveStatus.SINGULAR_SYSTEM
    elif stalled:
        status = SolveStatus.LINE_SEARCH_STALLED
    else:
        status = SolveStatus.MAX_ITERATIONS
    return SolveResult(
        iterate=x,
        status=status,
        kkt=kkt,
        trace=tuple(trace),
        inner_iterations=inner_total,
        factorizations=factorizations,
        outer_iterations=outer_used,
        config=config,
    )
