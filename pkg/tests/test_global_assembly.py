import numpy as np
import pytest

from hybrid_sbp.global_assembly import ProblemData, assemble_global, discretize, flux_recovery
from hybrid_sbp.mesh import builtin_mesh, parse_mesh, two_block_mesh
from hybrid_sbp.solve import solve_system
from hybrid_sbp.verify import flux_antisymmetry, random_spd_coefficients

JUMP_MESH = """
block 1 0 0 1 0 1 1 0 1
block 2 1 0 2 0 2 1 1 1
iface 2 1 1 2 aligned jump
bc 1 1 D
bc 1 3 D
bc 1 4 D
bc 2 2 D
bc 2 3 D
bc 2 4 D
"""


def linear_data(a=0.5, b=1.0, c=-2.0):
    u = lambda blk, x, y: a + b * x + c * y  # noqa: E731
    return ProblemData(
        forcing=lambda blk, x, y: np.zeros_like(x),
        dirichlet=u,
        neumann=lambda blk, x, y, nx, ny: b * nx + c * ny,
        jump=lambda f, x, y: np.zeros_like(x),
    ), u


def test_trace_diagonal_is_sum_of_penalties():
    mesh = two_block_mesh()
    N = 9
    disc = discretize(mesh, 2, N, coefficients=[random_spd_coefficients(s, N) for s in (1, 2)])
    sysm = assemble_global(disc)
    itf = mesh.interfaces[0]
    lp_p, lp_m = disc.locals[itf.plus_block], disc.locals[itf.minus_block]
    Hp = lp_p.faces[itf.plus_face].H_face
    expect = Hp * (lp_p.penalties[itf.plus_face] + lp_m.penalties[itf.minus_face])
    np.testing.assert_allclose(sysm.D, expect, rtol=1e-14)
    assert np.all(sysm.D > 0)


def test_coupling_blocks_match_local_face_matrices():
    mesh = two_block_mesh()
    disc = discretize(mesh, 1, 6)
    sysm = assemble_global(disc)
    itf = mesh.interfaces[0]
    for b, k in ((itf.plus_block, itf.plus_face), (itf.minus_block, itf.minus_face)):
        Fb = sysm.F[sysm.block_slice(b)].toarray()
        np.testing.assert_allclose(Fb, disc.locals[b].F[k].toarray())


def test_monolithic_symmetric_positive_definite():
    mesh = two_block_mesh()
    N = 9
    disc = discretize(mesh, 2, N, coefficients=[random_spd_coefficients(s, N) for s in (3, 4)])
    K = assemble_global(disc).monolithic().toarray()
    assert np.array_equal(K, K.T)
    assert np.linalg.eigvalsh(K)[0] > 0


def test_equal_penalties_give_zero_jump_rhs():
    mesh = parse_mesh(JUMP_MESH)
    disc = discretize(mesh, 1, 8)
    data = ProblemData(
        forcing=lambda b, x, y: np.zeros_like(x),
        dirichlet=lambda b, x, y: np.zeros_like(x),
        jump=lambda f, x, y: 1.0 + y,
    )
    sysm = assemble_global(disc, data)
    assert np.abs(sysm.g_delta).max() == 0.0


def test_jump_reproduced_exactly():
    """Piecewise linear solution with a prescribed jump is captured to round-off."""
    mesh = parse_mesh(JUMP_MESH)
    itf = mesh.interfaces[0]
    plus = itf.plus_block

    def u(b, x, y):
        return x + y + (0.0 if b == plus else 0.25)

    data = ProblemData(
        forcing=lambda b, x, y: np.zeros_like(x),
        dirichlet=u,
        jump=lambda f, x, y: np.full_like(x, 0.25),  # u_minus - u_plus
    )
    for p in (1, 2, 3):
        disc = discretize(mesh, p, 12)
        sysm = assemble_global(disc, data)
        sol = solve_system(sysm, "monolithic")
        for b, geo in enumerate(disc.geometry):
            ub = sol.u[sysm.block_slice(b)]
            assert np.abs(ub - u(b, geo.metrics.x, geo.metrics.y).ravel()).max() < 1e-10


def test_continuity_improves_under_refinement():
    mesh = two_block_mesh()
    exact = lambda b, x, y: np.sin(x) * np.exp(y)  # noqa: E731
    data = ProblemData(forcing=lambda b, x, y: np.zeros_like(x), dirichlet=exact)
    gaps = []
    for N in (8, 16, 32):
        disc = discretize(mesh, 1, N)
        sysm = assemble_global(disc, data)
        sol = solve_system(sysm, "trace")
        itf = mesh.interfaces[0]
        fp = disc.locals[itf.plus_block].faces[itf.plus_face]
        fm = disc.locals[itf.minus_block].faces[itf.minus_face]
        up = fp.L @ sol.u[sysm.block_slice(itf.plus_block)]
        um = fm.L @ sol.u[sysm.block_slice(itf.minus_block)]
        gaps.append(np.abs(up - um).max())
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-4


def test_flux_of_constant_state_vanishes():
    mesh = two_block_mesh()
    disc = discretize(mesh, 2, 9)
    sysm = assemble_global(disc)
    sigma = flux_recovery(sysm, np.ones(sysm.n_volume), np.ones(sysm.n_trace), ProblemData(dirichlet=lambda b, x, y: np.ones_like(x)))
    for v in sigma.values():
        assert np.abs(v).max() < 1e-11


def test_flux_of_linear_in_x():
    mesh = builtin_mesh("single")
    disc = discretize(mesh, 1, 6)
    sysm = assemble_global(disc)
    geo = disc.geometry[0]
    u = geo.metrics.x.ravel()
    data = ProblemData(dirichlet=lambda b, x, y: x)
    sigma = flux_recovery(sysm, u, np.zeros(0), data)
    np.testing.assert_allclose(sigma[(0, 1)], -1.0, atol=1e-12)
    np.testing.assert_allclose(sigma[(0, 2)], 1.0, atol=1e-12)
    np.testing.assert_allclose(sigma[(0, 3)], 0.0, atol=1e-12)


def test_two_block_flux_antisymmetric():
    mesh = two_block_mesh()
    data, _ = linear_data()
    data.forcing = lambda b, x, y: np.cos(x + y)
    disc = discretize(mesh, 3, 12)
    sysm = assemble_global(disc, data)
    sol = solve_system(sysm, "trace")
    assert flux_antisymmetry(sysm, flux_recovery(sysm, sol.u, sol.lam, data)) < 1e-9


def test_missing_data_errors():
    mesh = parse_mesh(JUMP_MESH)
    disc = discretize(mesh, 1, 4)
    with pytest.raises(ValueError, match="jump"):
        assemble_global(disc, ProblemData(dirichlet=lambda b, x, y: x))
    with pytest.raises(ValueError, match="Dirichlet"):
        assemble_global(disc, ProblemData(jump=lambda f, x, y: x))
