import numpy as np
import pytest

from dirbvp.discrete_op import (
    SingularJacobianError,
    Tridiagonal,
    apply_DN,
    jacobian,
    linearized_solve,
    phi_N,
    residual,
    solve_tridiagonal,
)
from dirbvp.grid import GridFunction, norms, random_element, second_difference
from dirbvp.problem import make_spec

F1 = "(t + sin(x))/(2*x^2 + 4)"

ZERO_F = make_spec("0", "0", A=0.1, B=0.1, fx_lower=0.0)
QUAD = make_spec("0", "2", A=0.1, B=0.1, fx_lower=0.0)
F1_SPEC = make_spec(F1, "1", A=0.1, B=0.5, fx_lower=-0.25)


def quadratic_solution(n):
    k = np.arange(n + 1)
    return GridFunction(n, (k**2 - n * k) / n**2)


def test_apply_dn_reduces_to_second_difference_without_f():
    rng = np.random.default_rng(1)
    x = random_element(12, rng)
    out = apply_DN(ZERO_F, x)
    assert out.values[0] == 0.0 and out.values[-1] == 0.0
    np.testing.assert_allclose(out.interior, second_difference(x), rtol=1e-15)


def test_apply_dn_quadratic():
    out = apply_DN(ZERO_F, quadratic_solution(10))
    np.testing.assert_allclose(out.interior, np.full(9, 0.02), atol=1e-16)


def test_apply_dn_zero_input():
    # an f vanishing at x = 0 maps the zero grid function to zero
    spec = make_spec("sin(x)", "0", A=1.1, B=0.1, fx_lower=-1.1)
    assert np.all(apply_DN(spec, GridFunction.zeros(8)).values == 0.0)


def test_residual_quadratic_is_exact():
    r = residual(QUAD, quadratic_solution(10))
    assert np.max(np.abs(r.vector)) <= 1e-14


def test_residual_zero_everywhere():
    spec = make_spec("sin(x)", "0", A=1.1, B=0.1, fx_lower=-1.1)
    r = residual(spec, GridFunction.zeros(10))
    assert r.norm == 0.0


def test_residual_constant_forcing():
    spec = make_spec("0", "1", A=0.1, B=0.1, fx_lower=0.0)
    r = residual(spec, GridFunction.zeros(10))
    np.testing.assert_allclose(r.vector, np.full(9, -0.01), rtol=1e-15)
    np.testing.assert_allclose(r.norm, 0.03, rtol=1e-15)


def test_jacobian_linear_f():
    spec = make_spec("3*x", "0", A=3.1, B=0.1, fx_lower=2.9)
    x = GridFunction.zeros(10)
    tri = jacobian(spec, x)
    np.testing.assert_allclose(tri.diag, np.full(9, -2.0 - 3.0 / 100.0), rtol=1e-15)
    assert np.all(tri.sub == 1.0) and np.all(tri.sup == 1.0)


def test_jacobian_n3_matrix():
    tri = jacobian(ZERO_F, GridFunction.zeros(3))
    np.testing.assert_allclose(tri.diag, [-2.0, -2.0])
    np.testing.assert_allclose(tri.sub, [1.0])
    np.testing.assert_allclose(tri.sup, [1.0])


def test_jacobian_matches_directional_derivative():
    rng = np.random.default_rng(42)
    eps = 1e-6
    for _ in range(20):
        x = random_element(16, rng)
        h = random_element(16, rng)
        tri = jacobian(F1_SPEC, x)
        bumped = GridFunction(16, x.values + eps * h.values)
        fd = (residual(F1_SPEC, bumped).vector - residual(F1_SPEC, x).vector) / eps
        analytic = tri.matvec(h.interior)
        assert np.linalg.norm(fd - analytic) <= 1e-5 * (1.0 + np.linalg.norm(analytic))


def test_solve_tridiagonal_2x2():
    tri = Tridiagonal(sub=[1.0], diag=[-2.0, -2.0], sup=[1.0])
    np.testing.assert_allclose(
        solve_tridiagonal(tri, [1.0, 0.0]), [-2.0 / 3.0, -1.0 / 3.0], rtol=1e-14
    )


def test_solve_tridiagonal_identity():
    tri = Tridiagonal(sub=np.zeros(4), diag=np.ones(5), sup=np.zeros(4))
    rhs = np.arange(5.0)
    np.testing.assert_allclose(solve_tridiagonal(tri, rhs), rhs)


def test_solve_tridiagonal_residual_oracle():
    rng = np.random.default_rng(9)
    tri = Tridiagonal(sub=np.ones(49), diag=np.full(50, -2.0), sup=np.ones(49))
    for _ in range(10):
        rhs = rng.normal(size=50)
        h = solve_tridiagonal(tri, rhs)
        assert np.linalg.norm(tri.matvec(h) - rhs) <= 1e-10 * (1 + np.linalg.norm(rhs))


def test_solve_tridiagonal_singular():
    with pytest.raises(SingularJacobianError):
        solve_tridiagonal(Tridiagonal(sub=[1.0], diag=[1.0, 1.0], sup=[1.0]), [1.0, 0.0])
    with pytest.raises(SingularJacobianError):
        solve_tridiagonal(Tridiagonal(sub=[0.0], diag=[0.0, 1.0], sup=[0.0]), [1.0, 0.0])


def test_solve_tridiagonal_dimension_mismatch():
    tri = Tridiagonal(sub=[1.0], diag=[-2.0, -2.0], sup=[1.0])
    with pytest.raises(ValueError):
        solve_tridiagonal(tri, [1.0, 0.0, 0.0])


def test_linearized_solve_zero_rhs():
    x = GridFunction.zeros(8)
    h = linearized_solve(F1_SPEC, x, np.zeros(7))
    assert np.all(h.values == 0.0)


def test_linearized_solve_n3():
    h = linearized_solve(ZERO_F, GridFunction.zeros(3), [1.0, 0.0])
    np.testing.assert_allclose(h.interior, [-2.0 / 3.0, -1.0 / 3.0], rtol=1e-14)


def test_linearized_solve_accuracy():
    rng = np.random.default_rng(17)
    for _ in range(20):
        x = random_element(32, rng, amplitude=2.0)
        a = rng.normal(size=31)
        h = linearized_solve(F1_SPEC, x, a)
        tri = jacobian(F1_SPEC, x)
        assert np.linalg.norm(tri.matvec(h.interior) - a) <= 1e-10 * (1 + np.linalg.norm(a))


def test_linearized_solve_is_critical_point_of_phi():
    rng = np.random.default_rng(33)
    x = random_element(16, rng)
    a = rng.normal(size=15)
    h_star = linearized_solve(F1_SPEC, x, a)
    base = phi_N(F1_SPEC, x, a, h_star)
    for _ in range(100):
        delta = rng.normal(scale=0.3, size=15)
        perturbed = GridFunction.from_interior(h_star.interior + delta)
        assert phi_N(F1_SPEC, x, a, perturbed) > base


def test_phi_zero_argument():
    x = GridFunction.zeros(8)
    assert phi_N(F1_SPEC, x, np.zeros(7), GridFunction.zeros(8)) == 0.0


def test_phi_without_f_is_half_delta_norm_squared():
    rng = np.random.default_rng(4)
    h = random_element(12, rng)
    value = phi_N(ZERO_F, GridFunction.zeros(12), np.zeros(11), h)
    np.testing.assert_allclose(value, 0.5 * norms(h).delta_norm ** 2, rtol=1e-14)


def test_phi_midpoint_convexity_gap():
    # for the half-weighted functional the midpoint gap is
    # (1/8) [ ||d(u-w)||^2 + fx-weighted term ] >= (1/8)(1 + lower)||u-w||_delta^2
    rng = np.random.default_rng(8)
    n = 32
    for spec in (F1_SPEC, QUAD):
        lower = spec.declared_fx_lower
        for _ in range(50):
            x = random_element(n, rng, amplitude=3.0)
            a = rng.normal(size=n - 1)
            u = random_element(n, rng, amplitude=2.0)
            w = random_element(n, rng, amplitude=2.0)
            mid = GridFunction(n, 0.5 * (u.values + w.values))
            gap = (
                0.5 * phi_N(spec, x, a, u)
                + 0.5 * phi_N(spec, x, a, w)
                - phi_N(spec, x, a, mid)
            )
            dist = norms(GridFunction(n, u.values - w.values)).delta_norm
            assert gap >= 0.125 * (1.0 + lower) * dist**2 - 1e-10


def test_phi_coercivity_surrogate():
    # Phi(h) >= (1 + B)/2 ||h||_delta^2 - N ||a|| ||h||_delta with B = min(lower, 0)
    rng = np.random.default_rng(12)
    n = 16
    for spec in (F1_SPEC, QUAD):
        b_hat = min(spec.declared_fx_lower, 0.0)
        for _ in range(100):
            x = random_element(n, rng, amplitude=2.0)
            a = rng.normal(size=n - 1)
            h = random_element(n, rng, amplitude=5.0)
            dn = norms(h).delta_norm
            bound = 0.5 * (1.0 + b_hat) * dn**2 - n * np.linalg.norm(a) * dn
            assert phi_N(spec, x, a, h) >= bound - 1e-10


def test_operator_coercivity_lower_bound():
    # ||D x|| >= (1 - A) ||x||_E - B / N^(3/2) wherever the growth bound holds
    rng = np.random.default_rng(21)
    for n in (4, 16, 64):
        for _ in range(50):
            x = random_element(n, rng, amplitude=5.0)
            m = norms(x)
            lhs = norms(apply_DN(F1_SPEC, x)).n_norm
            rhs = (1.0 - F1_SPEC.declared_A) * m.e_norm - F1_SPEC.declared_B / n**1.5
            assert lhs >= rhs - 1e-10


def test_tridiagonal_validation():
    with pytest.raises(ValueError):
        Tridiagonal(sub=[1.0, 1.0], diag=[1.0, 1.0], sup=[1.0])
    with pytest.raises(ValueError):
        Tridiagonal(sub=[np.inf], diag=[1.0, 1.0], sup=[1.0])
