import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybrid_sbp.sbp1d import (
    borrowing_constants,
    build_first_derivative,
    build_second_derivative,
    check_first_derivative,
    check_second_derivative,
    minimum_intervals,
    stiffness_matrix,
)


def boundary_matrix(n):
    B = np.zeros((n, n))
    B[0, 0], B[-1, -1] = -1.0, 1.0
    return B


def test_second_order_closure_is_forced():
    ops = build_first_derivative(1, 4)
    h = 0.25
    np.testing.assert_allclose(ops.D[0], np.array([-1, 1, 0, 0, 0]) / h, atol=1e-14)
    np.testing.assert_allclose(ops.H, h * np.array([0.5, 1, 1, 1, 0.5]), atol=1e-15)
    np.testing.assert_allclose(ops.D @ ops.x, np.ones(5), atol=1e-13)


def test_sixth_order_sbp_identity():
    ops = build_first_derivative(3, 12)
    assert np.abs(ops.Q + ops.Q.T - boundary_matrix(13)).max() < 1e-13


@pytest.mark.parametrize("p", [1, 2, 3])
@pytest.mark.parametrize("N", [12, 24, 40])
def test_first_derivative_invariants(p, N):
    ops = build_first_derivative(p, N, validate=True)
    errs = check_first_derivative(ops)
    assert errs["H_min"] > 0
    assert errs["sbp"] < 1e-13
    assert errs["constant"] < 1e-10
    assert errs["interior_exactness"] < 1e-7
    assert errs["boundary_exactness"] < 1e-8
    assert errs["boundary_derivative"] < 1e-8


@pytest.mark.parametrize("p", [1, 2, 3])
def test_boundary_derivative_vectors(p):
    ops = build_first_derivative(p, 20)
    x = ops.x
    for q in range(p + 1):
        assert abs(ops.dN @ x**q - q) < 1e-9
        assert abs(ops.d0 @ x**q - (1.0 if q == 1 else 0.0)) < 1e-9


@pytest.mark.parametrize("p", [1, 2, 3])
def test_too_small_grid_rejected(p):
    with pytest.raises(ValueError):
        build_first_derivative(p, minimum_intervals(p) - 1)
    build_first_derivative(p, minimum_intervals(p))


def test_unsupported_order():
    with pytest.raises(ValueError):
        build_first_derivative(4, 20)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_second_derivative_unit_coefficient(p):
    N = 24
    ops = build_first_derivative(p, N)
    d2 = build_second_derivative(ops, np.ones(N + 1), validate=True)
    x = ops.x
    nb = 2 * p + 2
    np.testing.assert_allclose((d2.D2 @ x**2)[nb:-nb], 2.0, atol=1e-9)
    assert np.abs(d2.A @ np.ones(N + 1)).max() < 1e-12


def test_remainder_psd_random_coefficient():
    ops = build_first_derivative(2, 12)
    c = np.random.default_rng(3).uniform(0.1, 10.0, 13)
    d2 = build_second_derivative(ops, c)
    R = d2.A - ops.D.T @ ((c * ops.H)[:, None] * ops.D)
    w = np.linalg.eigvalsh(0.5 * (R + R.T))
    assert w.min() >= -1e-10 * np.abs(R).max()


@given(
    p=st.sampled_from([1, 2, 3]),
    seed=st.integers(0, 2**31 - 1),
    N=st.integers(12, 30),
)
def test_stiffness_spd_and_compatible(p, seed, N):
    ops = build_first_derivative(p, N)
    c = np.random.default_rng(seed).uniform(0.05, 20.0, N + 1)
    d2 = build_second_derivative(ops, c)
    errs = check_second_derivative(ops, d2)
    assert errs["symmetry"] < 1e-12
    assert errs["null"] < 1e-12
    assert errs["remainder_min_eig"] > -1e-10
    # positive definite on the complement of the constants, nonnegative overall
    w = np.linalg.eigvalsh(d2.A)
    assert w[0] > -1e-10 * w[-1]
    assert w[1] > 0


def test_stiffness_matrix_scales_with_h():
    c = np.ones(13)
    A1 = stiffness_matrix(2, c, 1.0 / 12)
    A2 = stiffness_matrix(2, c, 2.0 / 12)
    np.testing.assert_allclose(A1, 2 * A2)


def test_second_derivative_rejects_nonpositive():
    ops = build_first_derivative(1, 8)
    with pytest.raises(ValueError):
        build_second_derivative(ops, np.zeros(9))
    with pytest.raises(ValueError):
        build_second_derivative(ops, np.ones(5))


def test_borrowing_constants_table():
    assert borrowing_constants(1).l == 2 and borrowing_constants(1).beta == 0.363636363
    assert borrowing_constants(2).beta == 0.2505765857
    b3 = borrowing_constants(3)
    assert b3.l == 6 and b3.beta == 0.1878687080
    ops = build_first_derivative(1, 4)
    assert borrowing_constants(1, ops).alpha == pytest.approx(0.5)
    for p in (2, 3):
        assert borrowing_constants(p, build_first_derivative(p, 20)).alpha > 0


@pytest.mark.parametrize("p", [1, 2, 3])
def test_borrowing_inequality_holds(p):
    """beta h * (d0 u)^2 <= u^T A u for a unit coefficient, the borrowing bound."""
    N = 30
    ops = build_first_derivative(p, N)
    bc = borrowing_constants(p, ops)
    A = stiffness_matrix(p, np.ones(N + 1), ops.h)
    # generalized eigenproblem on the complement of constants
    d = ops.d0
    P = np.eye(N + 1) - np.ones((N + 1, N + 1)) / (N + 1)
    Ap = P @ A @ P + np.outer(np.ones(N + 1), np.ones(N + 1))
    Minv = np.linalg.inv(Ap)
    ratio = ops.h * d @ P @ Minv @ P @ d
    assert bc.beta * ratio <= 1.0 + 1e-8


def test_operators_are_read_only():
    ops = build_first_derivative(2, 12)
    with pytest.raises(ValueError):
        ops.H[0] = 1.0
