"""Damped Newton iteration for the discrete Dirichlet problem.

Each step solves the tridiagonal linearization for the Newton direction
and backtracks on the least-squares merit 0.5*||residual||^2 until the
Armijo condition holds.  Under the growth and derivative conditions the
discrete problem has exactly one solution, which multi-start runs are
expected to reproduce from any initial guess.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .discrete_op import SingularJacobianError, jacobian, residual, solve_tridiagonal
from .expr import EvalError, evaluate
from .grid import GridFunction
from .problem import ProblemSpec

__all__ = [
    "SolverConfig",
    "SolveReport",
    "SolverError",
    "merit",
    "merit_gradient",
    "newton_solve",
    "multi_start_uniqueness",
]

CONVERGED = "converged"
MAX_ITER = "max_iter"
SINGULAR_JACOBIAN = "singular_jacobian"
EVAL_ERROR = "eval_error"


class SolverError(RuntimeError):
    """A solve that was required to converge did not."""


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    max_iter: int = 100
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    min_step: float = 1e-14
    initial_guess: GridFunction | None = None

    def __post_init__(self):
        if not 0.0 < self.armijo_c < 1.0:
            raise ValueError("armijo_c must lie in (0, 1)")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if self.tol <= 0.0 or self.min_step <= 0.0:
            raise ValueError("tol and min_step must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass(frozen=True)
class SolveReport:
    solution: GridFunction
    residual_norm: float
    iterations: int
    step_trace: tuple[tuple[int, float, float], ...]
    status: str


def merit(spec: ProblemSpec, x: GridFunction) -> float:
    """Least-squares merit 0.5 * ||residual||^2."""
    return 0.5 * residual(spec, x).norm ** 2


def merit_gradient(spec: ProblemSpec, x: GridFunction) -> np.ndarray:
    """Gradient of the merit with respect to the interior values: J^T r."""
    r = residual(spec, x).vector
    return jacobian(spec, x).transpose().matvec(r)


def _stop_threshold(spec: ProblemSpec, n: int, tol: float) -> float:
    # Scale the tolerance by the size of the right-hand side so that
    # refining the grid does not make the stopping test harsher: the
    # residual entries carry a 1/N^2 factor.
    t = np.arange(1, n) / n
    v_sup = float(np.max(np.abs(evaluate(spec.v, t, 0.0))))
    return tol * (1.0 + v_sup * math.sqrt(n) / n**2)


def newton_solve(spec: ProblemSpec, n: int, cfg: SolverConfig | None = None) -> SolveReport:
    """Solve the discrete problem on n subintervals by damped Newton.

    The step h solves J h = -residual; Armijo backtracking on the merit
    guards each update.  Iteration stops once the residual norm falls
    below tol * (1 + sup|v| * sqrt(n) / n^2).
    """
    cfg = cfg or SolverConfig()
    x = cfg.initial_guess if cfg.initial_guess is not None else GridFunction.zeros(n)
    if x.n != n:
        raise ValueError(f"initial guess lives on n={x.n}, expected n={n}")

    trace: list[tuple[int, float, float]] = []

    def report(status, x, res_norm, iterations):
        return SolveReport(
            solution=x,
            residual_norm=res_norm,
            iterations=iterations,
            step_trace=tuple(trace),
            status=status,
        )

    try:
        threshold = _stop_threshold(spec, n, cfg.tol)
        r = residual(spec, x)
    except EvalError:
        return report(EVAL_ERROR, x, math.nan, 0)

    iterations = 0
    while r.norm > threshold:
        if iterations >= cfg.max_iter:
            return report(MAX_ITER, x, r.norm, iterations)
        try:
            step = solve_tridiagonal(jacobian(spec, x), -r.vector)
        except SingularJacobianError:
            return report(SINGULAR_JACOBIAN, x, r.norm, iterations)
        except EvalError:
            return report(EVAL_ERROR, x, r.norm, iterations)

        merit_0 = 0.5 * r.norm**2
        slope = -2.0 * merit_0  # gradient . step = -||r||^2 for an exact Newton step
        lam = 1.0
        while True:
            try:
                candidate = GridFunction.from_interior(x.interior + lam * step)
                r_new = residual(spec, candidate)
                ok = 0.5 * r_new.norm**2 <= merit_0 + cfg.armijo_c * lam * slope
            except (EvalError, ValueError):
                ok = False  # treat an unevaluable trial point as a failed step
            if ok:
                break
            lam *= cfg.backtrack_factor
            if lam < cfg.min_step:
                return report(MAX_ITER, x, r.norm, iterations)

        x, r = candidate, r_new
        iterations += 1
        trace.append((iterations, r.norm, lam))

    return report(CONVERGED, x, r.norm, iterations)


def multi_start_uniqueness(
    spec: ProblemSpec,
    n: int,
    cfg: SolverConfig | None = None,
    starts: int = 5,
    amplitude: float = 10.0,
    seed: int = 0,
) -> float:
    """Max pairwise sup-distance between solutions from random starts.

    Runs ``starts`` solves with interior initial values uniform in
    [-amplitude, amplitude]; when the uniqueness conditions hold all
    converged solutions coincide, so the returned distance should be tiny.
    """
    if starts < 2:
        raise ValueError("need at least two starts")
    cfg = cfg or SolverConfig()
    rng = np.random.default_rng(seed)
    solutions = []
    for i in range(starts):
        guess = GridFunction.from_interior(rng.uniform(-amplitude, amplitude, n - 1))
        rep = newton_solve(spec, n, replace(cfg, initial_guess=guess))
        if rep.status != CONVERGED:
            raise SolverError(
                f"start {i} ended with status {rep.status} "
                f"(residual norm {rep.residual_norm:.3e})"
            )
        solutions.append(rep.solution.values)
    return max(
        (float(np.max(np.abs(a - b))) for a, b in itertools.combinations(solutions, 2)),
        default=0.0,
    )
