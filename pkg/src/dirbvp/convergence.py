"""Manufactured solutions and grid-refinement studies.

A manufactured problem fixes the exact solution x*(t) first and builds
the forcing v = x*'' - f(t, x*) symbolically, so refinement errors can
be measured against a known answer.  For problems without a known
solution a fine-grid solve stands in as the reference.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .expr import BinOp, Expr, diff, evaluate, parse, substitute, uses_var
from .problem import ProblemSpec, make_spec
from .solver import CONVERGED, SolverConfig, newton_solve

__all__ = [
    "ConvergenceRow",
    "ConvergenceTable",
    "ManufacturedProblem",
    "StudyError",
    "manufacture",
    "run_study",
    "derivative_bound_check",
]

_BOUNDARY_TOL = 1e-12
_REF_FACTOR = 8


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    sup_error: float
    empirical_order: float | None
    derivative_bound: float


@dataclass(frozen=True)
class ConvergenceTable:
    problem_id: str
    reference: str  # "manufactured" | "fine-grid"
    rows: tuple[ConvergenceRow, ...]

    def __post_init__(self):
        ns = [row.n for row in self.rows]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("rows must have strictly increasing n")


@dataclass(frozen=True)
class ManufacturedProblem:
    """A problem together with the expression of its exact solution."""

    spec: ProblemSpec
    x_star: Expr


class StudyError(RuntimeError):
    """A refinement study aborted; carries the partial table."""

    def __init__(self, message: str, partial: ConvergenceTable):
        super().__init__(message)
        self.partial = partial


def manufacture(f, x_star, *, A: float, B: float, fx_lower: float, fx=None) -> ManufacturedProblem:
    """Build a problem whose continuous solution is x_star by construction.

    x_star must be an expression in t alone, vanish at t = 0 and t = 1
    (within 1e-12), and be twice differentiable; the forcing becomes
    v = x_star'' - f(t, x_star(t)), composed symbolically.
    """
    if isinstance(f, str):
        f = parse(f)
    if isinstance(x_star, str):
        x_star = parse(x_star)
    if uses_var(x_star, "x"):
        raise ValueError("x_star must be an expression in t only")
    for endpoint in (0.0, 1.0):
        value = evaluate(x_star, endpoint, 0.0)
        if abs(value) > _BOUNDARY_TOL:
            raise ValueError(
                f"x_star({endpoint}) = {value} violates the zero boundary condition"
            )
    x_star_dd = diff(diff(x_star, "t"), "t")
    v = BinOp("-", x_star_dd, substitute(f, "x", x_star))
    spec = make_spec(f, v, A=A, B=B, fx_lower=fx_lower, fx=fx)
    return ManufacturedProblem(spec=spec, x_star=x_star)


def _solve_or_abort(spec, n, cfg, rows, problem_id, reference):
    rep = newton_solve(spec, n, cfg)
    if rep.status != CONVERGED:
        partial = ConvergenceTable(problem_id, reference, tuple(rows))
        raise StudyError(f"solver failed at N={n} with status {rep.status}", partial)
    return rep.solution


def run_study(problem, ns, cfg: SolverConfig | None = None, problem_id: str = "") -> ConvergenceTable:
    """Solve at each grid size and tabulate sup errors against the reference.

    For a ManufacturedProblem the reference is the exact solution sampled
    at the shared nodes; for a plain ProblemSpec it is a solve on a grid
    8x finer than max(ns), which every n must divide.  The empirical
    order between consecutive rows with doubled n is log2(e_n / e_2n).
    """
    ns = sorted(int(n) for n in ns)
    if not ns:
        raise ValueError("ns must be nonempty")
    if any(n < 2 for n in ns):
        raise ValueError("every grid size must be at least 2")
    if len(set(ns)) != len(ns):
        raise ValueError("grid sizes must be distinct")
    cfg = replace(cfg, initial_guess=None) if cfg is not None else SolverConfig()

    if isinstance(problem, ManufacturedProblem):
        spec, x_star = problem.spec, problem.x_star
        reference = "manufactured"
        ref_values = None
        n_ref = None
    else:
        spec, x_star = problem, None
        reference = "fine-grid"
        n_ref = _REF_FACTOR * max(ns)
        bad = [n for n in ns if n_ref % n]
        if bad:
            raise ValueError(f"grid sizes {bad} do not divide the reference size {n_ref}")
        ref_values = _solve_or_abort(spec, n_ref, cfg, [], problem_id, reference).values

    rows: list[ConvergenceRow] = []
    for n in ns:
        solution = _solve_or_abort(spec, n, cfg, rows, problem_id, reference)
        if x_star is not None:
            exact = evaluate(x_star, solution.nodes, 0.0)
        else:
            exact = ref_values[:: n_ref // n]
        sup_error = float(np.max(np.abs(exact - solution.values)))
        derivative_bound = float(n * np.max(np.abs(np.diff(solution.values))))
        order = None
        if rows and n == 2 * rows[-1].n and rows[-1].sup_error > 0.0 and sup_error > 0.0:
            order = float(np.log2(rows[-1].sup_error / sup_error))
        rows.append(ConvergenceRow(n, sup_error, order, derivative_bound))

    return ConvergenceTable(problem_id=problem_id, reference=reference, rows=tuple(rows))


def derivative_bound_check(table: ConvergenceTable) -> float:
    """Largest scaled difference max_k N |x_N(k) - x_N(k-1)| over the study.

    Boundedness of this quantity across refinements is what rules out a
    spurious limit.
    """
    if not table.rows:
        raise ValueError("table is empty")
    return max(row.derivative_bound for row in table.rows)
