import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybrid_sbp.local_problem import build_local_problem, face_trace_from_neumann, local_rhs, penalty_parameters
from hybrid_sbp.sbp1d import borrowing_constants, build_first_derivative, minimum_intervals
from hybrid_sbp.sbp2d import FACES, Coefficients2D
from hybrid_sbp.verify import BC_CONFIGS, random_spd_coefficients

ALL_D = BC_CONFIGS["all-dirichlet"]


def grid(ops):
    S, R = np.meshgrid(ops.x, ops.x, indexing="ij")
    return R.ravel(), S.ravel()


def test_penalty_unit_coefficients():
    ops = build_first_derivative(1, 4)
    pen = penalty_parameters(Coefficients2D.constant(4), borrowing_constants(1, ops), ops.h, 1.0)
    np.testing.assert_allclose(pen[1], 2 / (0.25 * 0.363636363))
    assert pen[1][0] == pytest.approx(22.0, rel=1e-8)
    for k in FACES:
        np.testing.assert_allclose(pen[k], pen[1])


def test_penalty_without_cross_term():
    N = 12
    ops = build_first_derivative(2, N)
    rng = np.random.default_rng(0)
    co = Coefficients2D(rng.uniform(1, 3, (N + 1, N + 1)), rng.uniform(1, 3, (N + 1, N + 1)), np.zeros((N + 1, N + 1)))
    bc = borrowing_constants(2, ops)
    pen = penalty_parameters(co, bc, ops.h)
    psi = np.minimum(co.c_rr, co.c_ss)
    expect = 2 * co.c_rr[:, 0] ** 2 / (ops.h * bc.beta * psi[:, : bc.l + 1].min(axis=1))
    np.testing.assert_allclose(pen[1], expect, rtol=1e-12)


def test_penalty_linear_in_scale():
    ops = build_first_derivative(1, 6)
    co = random_spd_coefficients(2, 6)
    bc = borrowing_constants(1, ops)
    a = penalty_parameters(co, bc, ops.h, 1.0)
    b = penalty_parameters(co, bc, ops.h, 2.0)
    for k in FACES:
        np.testing.assert_allclose(b[k], 2 * a[k])
    with pytest.raises(ValueError):
        penalty_parameters(co, bc, ops.h, 0.5)


@given(p=st.sampled_from([1, 2, 3]), seed=st.integers(0, 10**6), config=st.sampled_from(["all-dirichlet", "one-dirichlet"]))
def test_local_matrix_positive_definite(p, seed, config):
    N = max(3 * p + 2, minimum_intervals(p))
    ops = build_first_derivative(p, N)
    lp = build_local_problem(ops, random_spd_coefficients(seed, N), BC_CONFIGS[config])
    M = lp.M.toarray()
    assert np.array_equal(M, M.T)
    assert np.linalg.eigvalsh(M)[0] > 0


def test_small_second_order_block_pd():
    ops = build_first_derivative(1, 5)
    lp = build_local_problem(ops, random_spd_coefficients(11, 5), ALL_D)
    assert np.linalg.eigvalsh(lp.M.toarray())[0] > 0


@pytest.mark.parametrize("p", [1, 2, 3])
def test_all_neumann_singular(p):
    N = max(3 * p + 2, minimum_intervals(p))
    ops = build_first_derivative(p, N)
    lp = build_local_problem(ops, random_spd_coefficients(4, N), BC_CONFIGS["all-neumann"])
    M = lp.M.toarray()
    w, v = np.linalg.eigh(M)
    assert abs(w[0]) < 1e-12 * np.abs(M).max()
    assert w[1] > 0
    assert abs(v[:, 0].sum()) / np.sqrt(M.shape[0]) > 0.999
    assert np.abs(M @ np.ones(M.shape[0])).max() < 1e-10 * np.abs(M).max()


def test_face_matrix_identity():
    ops = build_first_derivative(2, 10)
    lp = build_local_problem(ops, random_spd_coefficients(7, 10), ALL_D)
    one = np.ones(lp.n)
    for k in FACES:
        np.testing.assert_allclose(lp.F[k].T @ one, -lp.faces[k].H_face * lp.penalties[k], rtol=1e-10)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_constant_state(p):
    N = 14
    ops = build_first_derivative(p, N)
    lp = build_local_problem(ops, random_spd_coefficients(8, N), ALL_D)
    q = local_rhs(lp, dirichlet={k: np.ones(N + 1) for k in FACES})
    np.testing.assert_allclose(lp.M @ np.ones(lp.n), q, rtol=1e-12, atol=1e-12 * np.abs(q).max())
    u = np.linalg.solve(lp.M.toarray(), q)
    assert np.abs(u - 1).max() < 1e-11


def test_zero_data_zero_rhs():
    ops = build_first_derivative(1, 6)
    lp = build_local_problem(ops, Coefficients2D.constant(6), ALL_D)
    q = local_rhs(lp, np.zeros(49), dirichlet={k: np.zeros(7) for k in FACES})
    assert np.all(q == 0)


@pytest.mark.parametrize("p", [1, 2, 3])
@pytest.mark.parametrize("config", ["all-dirichlet", "one-dirichlet"])
def test_linear_solution_exact(p, config):
    N = 16
    ops = build_first_derivative(p, N)
    lp = build_local_problem(ops, Coefficients2D.constant(N), BC_CONFIGS[config])
    r, s = grid(ops)
    exact = 0.3 + r + s
    t = ops.x
    trace = {1: 0.3 + t, 2: 1.3 + t, 3: 0.3 + t, 4: 1.3 + t}
    flux = {1: -1.0 * np.ones(N + 1), 2: np.ones(N + 1), 3: -1.0 * np.ones(N + 1), 4: np.ones(N + 1)}
    bc = BC_CONFIGS[config]
    q = local_rhs(
        lp,
        np.zeros(lp.n),
        dirichlet={k: trace[k] for k in FACES if bc[k] == "D"},
        neumann={k: flux[k] for k in FACES if bc[k] == "N"},
    )
    u = np.linalg.solve(lp.M.toarray(), q)
    assert np.abs(u - exact).max() < 1e-10
    for k in FACES:
        if bc[k] == "N":
            np.testing.assert_allclose(face_trace_from_neumann(lp, k, u, flux[k]), trace[k], atol=1e-10)


def test_missing_data_is_an_error():
    ops = build_first_derivative(1, 6)
    lp = build_local_problem(ops, Coefficients2D.constant(6), BC_CONFIGS["one-dirichlet"])
    with pytest.raises(ValueError, match="Dirichlet"):
        local_rhs(lp, neumann={k: np.zeros(7) for k in (1, 2, 4)})
    with pytest.raises(ValueError, match="Neumann"):
        local_rhs(lp, dirichlet={3: np.zeros(7)})


def test_bad_tag_rejected():
    ops = build_first_derivative(1, 6)
    with pytest.raises(ValueError):
        build_local_problem(ops, Coefficients2D.constant(6), {1: "D", 2: "D", 3: "D", 4: "Q"})
