"""Problem declaration and falsification checks for the solvability conditions.

A problem is the pair of expressions f(t, x) and v(t) together with
user-declared constants: a growth bound |f(t,x)| <= A|x| + B and a lower
bound on the partial derivative f_x.  The checks here sample those
conditions on a grid and report violations; a clean report is
falsification-based evidence, not a proof.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import EvalError, Expr, diff, evaluate, parse, uses_var

__all__ = [
    "ProblemSpec",
    "ConditionReport",
    "TheoremClassification",
    "make_spec",
    "check_growth",
    "check_fx_lower",
    "classify",
    "apriori_bound",
]

# Cross-validation points for a declared f_x override; x values avoid 0,
# where derivatives of |x|-like expressions are undefined.
_CHECK_T = (0.0, 0.25, 0.5, 0.75, 1.0)
_CHECK_X = (-0.93, -0.41, 0.17, 0.58, 0.94)
_FD_STEP = 1e-6
_WITNESS_CAP = 10


@dataclass(frozen=True)
class ProblemSpec:
    """Right-hand side f, its x-derivative, forcing v, and declared constants."""

    f: Expr
    fx: Expr
    v: Expr
    declared_A: float
    declared_B: float
    declared_fx_lower: float


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of sampling one condition over a (t, x) box.

    Witnesses are (t, x, lhs, rhs) tuples for up to the first few
    violations; ``violation_count`` is the total number found.
    """

    condition: str
    verdict: str  # "no-violation-found" | "violated"
    witnesses: tuple[tuple[float, float, float, float], ...]
    violation_count: int
    samples_t: int
    samples_x: int

    def __post_init__(self):
        if self.verdict not in ("no-violation-found", "violated"):
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == "violated" and not self.witnesses:
            raise ValueError("a violated verdict must carry at least one witness")

    @property
    def violated(self) -> bool:
        return self.verdict == "violated"


@dataclass(frozen=True)
class TheoremClassification:
    continuous_theorem_applies: bool
    discrete_theorem_applies: bool


def _as_expr(value) -> Expr:
    return parse(value) if isinstance(value, str) else value


def make_spec(f, v, *, A: float, B: float, fx_lower: float, fx=None) -> ProblemSpec:
    """Build a validated problem.

    f and v may be expression trees or source strings.  When fx is not
    supplied it is derived symbolically; either way it is cross-checked
    against centered finite differences of f on a small sample box.
    """
    f = _as_expr(f)
    v = _as_expr(v)
    if A <= 0.0 or B <= 0.0:
        raise ValueError("growth constants A and B must be positive")
    if uses_var(v, "x"):
        raise ValueError("the forcing term v must depend on t only")
    fx = _as_expr(fx) if fx is not None else diff(f, "x")
    _cross_check_fx(f, fx)
    return ProblemSpec(f, fx, v, float(A), float(B), float(fx_lower))


def _cross_check_fx(f: Expr, fx: Expr):
    checked = 0
    for t in _CHECK_T:
        for x in _CHECK_X:
            try:
                analytic = evaluate(fx, t, x)
                fd = (evaluate(f, t, x + _FD_STEP) - evaluate(f, t, x - _FD_STEP)) / (
                    2.0 * _FD_STEP
                )
            except EvalError:
                continue
            if abs(analytic - fd) > 1e-5 * (1.0 + abs(analytic)):
                raise ValueError(
                    f"fx disagrees with a finite difference of f at (t={t}, x={x}): "
                    f"{analytic} vs {fd}"
                )
            checked += 1
    if checked == 0:
        raise ValueError("could not evaluate f and fx anywhere on the sample box")


def _locate_failure(expr: Expr, t_grid: np.ndarray, x_grid: np.ndarray, cause: EvalError):
    """Rescan after a vectorized failure to name the first failing point."""
    for t in t_grid:
        try:
            evaluate(expr, float(t), x_grid)
        except EvalError:
            for x in x_grid:
                try:
                    evaluate(expr, float(t), float(x))
                except EvalError as exc:
                    raise EvalError(
                        f"evaluation failed at sample point (t={t}, x={x}): {exc}"
                    ) from exc
    raise cause


def _sample_grids(x_range: float, samples_t: int, samples_x: int):
    if x_range <= 0.0:
        raise ValueError("x_range must be positive")
    if samples_t < 2 or samples_x < 2:
        raise ValueError("need at least two samples per axis")
    t_grid = np.linspace(0.0, 1.0, samples_t)
    x_grid = np.linspace(-x_range, x_range, samples_x)
    return t_grid, x_grid


def _report(condition, t_grid, x_grid, lhs, rhs) -> ConditionReport:
    bad = lhs > rhs if condition == "growth" else lhs < rhs
    count = int(np.count_nonzero(bad))
    witnesses = []
    if count:
        rows, cols = np.nonzero(bad)
        for i, j in zip(rows[:_WITNESS_CAP], cols[:_WITNESS_CAP]):
            witnesses.append(
                (float(t_grid[i]), float(x_grid[j]), float(lhs[i, j]), float(rhs[i, j]))
            )
    return ConditionReport(
        condition=condition,
        verdict="violated" if count else "no-violation-found",
        witnesses=tuple(witnesses),
        violation_count=count,
        samples_t=t_grid.size,
        samples_x=x_grid.size,
    )


def check_growth(
    spec: ProblemSpec, x_range: float, samples_t: int = 201, samples_x: int = 2001
) -> ConditionReport:
    """Sample |f(t,x)| <= A|x| + B on [0,1] x [-x_range, x_range]."""
    t_grid, x_grid = _sample_grids(x_range, samples_t, samples_x)
    try:
        f_vals = evaluate(spec.f, t_grid[:, None], x_grid[None, :])
    except EvalError as exc:
        _locate_failure(spec.f, t_grid, x_grid, exc)
    lhs = np.abs(f_vals)
    rhs = spec.declared_A * np.abs(x_grid)[None, :] + spec.declared_B
    rhs = np.broadcast_to(rhs, lhs.shape)
    return _report("growth", t_grid, x_grid, lhs, rhs)


def check_fx_lower(
    spec: ProblemSpec, x_range: float, samples_t: int = 201, samples_x: int = 2001
) -> ConditionReport:
    """Sample f_x(t,x) >= declared_fx_lower on [0,1] x [-x_range, x_range]."""
    t_grid, x_grid = _sample_grids(x_range, samples_t, samples_x)
    try:
        fx_vals = evaluate(spec.fx, t_grid[:, None], x_grid[None, :])
    except EvalError as exc:
        _locate_failure(spec.fx, t_grid, x_grid, exc)
    rhs = np.full_like(fx_vals, spec.declared_fx_lower)
    return _report("fx_lower", t_grid, x_grid, fx_vals, rhs)


def classify(spec: ProblemSpec) -> TheoremClassification:
    """Which solvability theorem the declared constants fall under.

    The continuous problem needs A < pi^2 and inf f_x > -pi^2; the
    discrete one needs the strictly smaller constants A < 1 and
    inf f_x > -1, so discrete applicability implies continuous.
    """
    pi2 = np.pi**2
    return TheoremClassification(
        continuous_theorem_applies=bool(
            spec.declared_A < pi2 and spec.declared_fx_lower > -pi2
        ),
        discrete_theorem_applies=bool(
            spec.declared_A < 1.0 and spec.declared_fx_lower > -1.0
        ),
    )


def apriori_bound(spec: ProblemSpec, v_sup: float) -> float:
    """Uniform bound M = (sup|v| + B) / (1 - A) on every discrete solution."""
    if v_sup < 0.0:
        raise ValueError("v_sup must be nonnegative")
    if spec.declared_A >= 1.0:
        raise ValueError("a-priori bound undefined: requires declared_A < 1")
    return (v_sup + spec.declared_B) / (1.0 - spec.declared_A)
