"""Verification harness: random SPD suites, penalty sweeps, manufactured
solutions, error norms and point counts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .global_assembly import GlobalSystem, ProblemData, assemble_global, discretize, flux_recovery
from .local_problem import build_local_problem
from .mesh import Mesh, build_trace_numbering, builtin_mesh, orient_face_vector
from .sbp1d import build_first_derivative, minimum_intervals
from .sbp2d import Coefficients2D
from .solve import min_eigenvalue, solve_system, trace_schur_matrix, volume_schur_matrix

__all__ = [
    "random_spd_coefficients",
    "MmsProblem",
    "mms_problem",
    "mms_data",
    "volume_error",
    "interface_error",
    "tau_sweep",
    "local_spd_suite",
    "global_spd_suite",
    "ConvergenceRow",
    "convergence_study",
    "point_counts",
    "grid_coordinates",
    "BC_CONFIGS",
    "flux_antisymmetry",
    "loglog_slope",
    "solve_mms",
    "spd_grid_size",
]

E = math.e
K_MMS = E / (1.0 + E)

BC_CONFIGS = {
    "all-dirichlet": {1: "D", 2: "D", 3: "D", 4: "D"},
    "one-dirichlet": {1: "N", 2: "N", 3: "D", 4: "N"},
    "all-neumann": {1: "N", 2: "N", 3: "N", 4: "N"},
}


def random_spd_coefficients(seed, N: int, eps: float = 0.1) -> Coefficients2D:
    """Pointwise ``G^T G + eps I`` with G uniform in [-1, 1]^{2x2}."""
    rng = np.random.default_rng(seed)
    G = rng.uniform(-1.0, 1.0, size=(N + 1, N + 1, 2, 2))
    C = np.einsum("...ki,...kj->...ij", G, G) + eps * np.eye(2)
    return Coefficients2D(C[..., 0, 0].copy(), C[..., 1, 1].copy(), C[..., 0, 1].copy())


# ---------------------------------------------------------------------------
# manufactured solution
#
# Inside the unit disk, u1 = K (a - exp(-r^2)) y with K = e / (1 + e); outside,
# u2 = (r - 1)^2 cos(theta) + (r - 1) sin(theta) = x (r - 2 + 1/r) + y (1 - 1/r).
# With a = 1 the radial derivative of u1 at r = 1 is K (1 + 1/e) sin(theta)
# = sin(theta), which matches u2, so the flux is continuous across the circle.
# The "shifted" variant a = 2 gives K (2 + 1/e) sin(theta) instead and is kept for
# reference; it carries a flux jump the interface conditions do not model.
#
# Derivation of the data (b = I, f = -lap u):
#   lap[(a - exp(-r^2)) y] = y lap(-exp(-r^2)) + 2 grad(-exp(-r^2)) . grad y
#                          = y (4 - 4 r^2) exp(-r^2) + 4 y exp(-r^2)
#   so f1 = 4 K y (r^2 - 2) exp(-r^2), independent of a.
#   lap[x g(r)] = x (g'' + 3 g'/r) with g = r - 2 + 1/r: g' = 1 - 1/r^2,
#   g'' = 2/r^3, so lap = x (3/r - 1/r^3); lap[y (1 - 1/r)] = y (-1/r^3).
#   f2 = -3x/r + (x - y)/r^3.
# ---------------------------------------------------------------------------


def _u1(x, y, a):
    return K_MMS * (a - np.exp(-(x * x + y * y))) * y


def _grad_u1(x, y, a):
    e = np.exp(-(x * x + y * y))
    return 2 * K_MMS * x * y * e, K_MMS * (a - e + 2 * y * y * e)


def _f1(x, y):
    r2 = x * x + y * y
    return 4 * K_MMS * y * (r2 - 2) * np.exp(-r2)


def _u2(x, y):
    r = np.hypot(x, y)
    return x * (r - 2 + 1 / r) + y * (1 - 1 / r)


def _grad_u2(x, y):
    r = np.hypot(x, y)
    r3 = r**3
    ux = r - 2 + 1 / r + x * x / r - x * x / r3 + x * y / r3
    uy = x * y / r - x * y / r3 + 1 - 1 / r + y * y / r3
    return ux, uy


def _f2(x, y):
    r = np.hypot(x, y)
    return -3 * x / r + (x - y) / r**3


@dataclass
class MmsProblem:
    """Piecewise manufactured solution on the disk-in-square domain."""

    variant: str = "continuous"
    inside: set = field(default_factory=set)  # block indices inside the disk

    @property
    def a(self) -> float:
        return {"continuous": 1.0, "shifted": 2.0}[self.variant]

    def u(self, b, x, y):
        return _u1(x, y, self.a) if b in self.inside else _u2(x, y)

    def grad(self, b, x, y):
        return _grad_u1(x, y, self.a) if b in self.inside else _grad_u2(x, y)

    def f(self, b, x, y):
        return _f1(x, y) if b in self.inside else _f2(x, y)

    def data(self, mesh: Mesh) -> ProblemData:
        def neumann(b, x, y, nx, ny):
            gx, gy = self.grad(b, x, y)
            return nx * gx + ny * gy

        def jump(f, x, y):
            itf = mesh.interfaces[f]
            up = self.u(itf.plus_block, x, y)
            um = self.u(itf.minus_block, x, y)
            return um - up

        return ProblemData(forcing=self.f, dirichlet=self.u, neumann=neumann, jump=jump)


def _inside_blocks(mesh: Mesh) -> set:
    out = set()
    for b, blk in enumerate(mesh.blocks):
        x, y = blk.mapping()(0.5, 0.5)
        if math.hypot(float(x), float(y)) < 1.0:
            out.add(b)
    return out


def mms_problem(mesh: Mesh, variant: str = "continuous") -> MmsProblem:
    if variant not in ("continuous", "shifted"):
        raise ValueError(f"unknown manufactured solution variant {variant!r}")
    return MmsProblem(variant=variant, inside=_inside_blocks(mesh))


def mms_data(x, y, region: int, variant: str = "continuous") -> dict:
    """Pointwise manufactured solution data; ``region`` is 1 (disk) or 2.

    ``g_N`` is returned as the gradient pair; the Neumann datum for outward
    normal n is ``n . grad``.  ``delta`` is ``u2 - u1`` at the given points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = {"continuous": 1.0, "shifted": 2.0}[variant]
    if region == 1:
        u, f, g = _u1(x, y, a), _f1(x, y), _grad_u1(x, y, a)
    elif region == 2:
        if np.any(np.hypot(x, y) == 0):
            raise ValueError("the exterior branch is not defined at the origin")
        u, f, g = _u2(x, y), _f2(x, y), _grad_u2(x, y)
    else:
        raise ValueError("region must be 1 or 2")
    delta = _u2(x, y) - _u1(x, y, a) if np.all(np.hypot(x, y) > 0) else None
    return {"u": u, "f": f, "g_D": u, "grad": g, "delta": delta}


def grid_coordinates(sysm: GlobalSystem) -> tuple[np.ndarray, np.ndarray]:
    geos = sysm.disc.geometry
    return (
        np.concatenate([g.metrics.x.ravel() for g in geos]),
        np.concatenate([g.metrics.y.ravel() for g in geos]),
    )


def volume_error(sysm: GlobalSystem, u: np.ndarray, exact) -> float:
    """``sqrt(sum_b Delta_b^T J_b (H x H) Delta_b)``; ``exact(b, x, y)``."""
    total = 0.0
    for b, (lp, geo) in enumerate(zip(sysm.disc.locals, sysm.disc.geometry)):
        d = u[sysm.block_slice(b)] - np.asarray(exact(b, geo.metrics.x, geo.metrics.y)).ravel()
        total += float(np.sum(d * d * geo.J.ravel() * lp.W))
    return math.sqrt(total)


def interface_error(sysm: GlobalSystem, sigma: dict, grad_exact, faces: str = "all") -> float:
    """Error of the recovered normal flux on interior faces.

    ``sigma`` maps ``(block, face)`` to ``sigma_hat`` (which carries the
    surface Jacobian); the comparison is made for the physical flux
    ``sigma_hat / S_J`` against ``n . grad u`` on the plus side, and weighted by
    ``S_J H``.  ``faces`` is 'all' (every interior face) or 'jump'.
    """
    mesh = sysm.disc.mesh
    total = 0.0
    for itf in mesh.interfaces:
        if faces == "jump" and not itf.jump:
            continue
        b, k = itf.plus_block, itf.plus_face
        fg = sysm.disc.geometry[b].surface[k]
        gx, gy = grad_exact(b, fg.x, fg.y)
        d = sigma[(b, k)] / fg.S_J - (fg.nx * gx + fg.ny * gy)
        H = sysm.disc.locals[b].faces[k].H_face
        total += float(np.sum(d * d * fg.S_J * H))
    return math.sqrt(total)


def flux_antisymmetry(sysm: GlobalSystem, sigma: dict) -> float:
    """Max ``|sigma_hat^+ + sigma_hat^-|`` over interior faces (weighted by H)."""
    worst = 0.0
    for itf in sysm.disc.mesh.interfaces:
        sp_ = sigma[(itf.plus_block, itf.plus_face)]
        sm = orient_face_vector(sigma[(itf.minus_block, itf.minus_face)], itf.reversed)
        worst = max(worst, float(np.abs(sp_ + sm).max()))
    return worst


# ---------------------------------------------------------------------------
# positivity suites
# ---------------------------------------------------------------------------


def local_spd_suite(p: int, N: int, config: str = "all-dirichlet", samples: int = 100, seed: int = 0, tau_scale: float = 1.0):
    """Min eigenvalue (and ``|lambda_min| / ||M||``) of the local matrix per sample."""
    if config not in BC_CONFIGS:
        raise ValueError(f"unknown configuration {config!r}; choose from {sorted(BC_CONFIGS)}")
    ops = build_first_derivative(p, N)
    ss = np.random.SeedSequence(seed)
    rows = []
    for t, child in enumerate(ss.spawn(samples)):
        co = random_spd_coefficients(child, N)
        lp = build_local_problem(ops, co, BC_CONFIGS[config], tau_scale)
        M = lp.M.toarray()
        w, v = np.linalg.eigh(M)
        corr = abs(v[:, 0].sum()) / math.sqrt(M.shape[0])
        rows.append({"sample": t, "lambda_min": float(w[0]), "relative": float(abs(w[0]) / np.abs(M).max()), "ones_correlation": float(corr)})
    return rows


def global_spd_suite(p: int, N: int, samples: int = 100, seed: int = 0, tau_scale: float = 1.0, mesh: Mesh | None = None):
    """Min eigenvalues of the monolithic matrix and both Schur complements."""
    mesh = builtin_mesh("two-block") if mesh is None else mesh
    ss = np.random.SeedSequence(seed)
    rows = []
    for t, child in enumerate(ss.spawn(samples)):
        kids = child.spawn(mesh.n_blocks)
        coeffs = [random_spd_coefficients(c, N) for c in kids]
        disc = discretize(mesh, p, N, tau_scale=tau_scale, coefficients=coeffs)
        sysm = assemble_global(disc)
        rows.append(
            {
                "sample": t,
                "monolithic": min_eigenvalue(sysm.monolithic()),
                "trace": min_eigenvalue(trace_schur_matrix(sysm)),
                "volume": min_eigenvalue(volume_schur_matrix(sysm)),
            }
        )
    return rows


def tau_sweep(p: int, N: int, scales=None, seed: int = 0, coeffs: Coefficients2D | None = None):
    """Extreme eigenvalues of an all-Dirichlet local matrix versus tau_scale."""
    scales = [2.0**k for k in range(11)] if scales is None else list(scales)
    ops = build_first_derivative(p, N)
    co = random_spd_coefficients(seed, N) if coeffs is None else coeffs
    rows = []
    for s in scales:
        lp = build_local_problem(ops, co, BC_CONFIGS["all-dirichlet"], s)
        w = np.linalg.eigvalsh(lp.M.toarray())
        rows.append({"tau_scale": float(s), "lambda_min": float(w[0]), "lambda_max": float(w[-1])})
    return rows


def loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(np.asarray(xs)), np.log(np.asarray(ys)), 1)[0])


# ---------------------------------------------------------------------------
# convergence and counts
# ---------------------------------------------------------------------------


@dataclass
class ConvergenceRow:
    order: int
    N: int
    volume_error: float
    volume_rate: float | None
    interface_error: float
    interface_rate: float | None
    flux_antisymmetry: float


def solve_mms(mesh: Mesh, p: int, N: int, variant: str = "continuous", path: str = "trace", tau_scale: float = 1.0, executor=None, numerical_metrics: bool = False):
    prob = mms_problem(mesh, variant)
    data = prob.data(mesh)
    disc = discretize(mesh, p, N, tau_scale=tau_scale, numerical_metrics=numerical_metrics, executor=executor)
    sysm = assemble_global(disc, data)
    sol = solve_system(sysm, path, executor=executor)
    sigma = flux_recovery(sysm, sol.u, sol.lam, data)
    return prob, data, sysm, sol, sigma


def convergence_study(
    mesh: Mesh,
    p: int,
    levels: int = 3,
    N0: int = 17,
    variant: str = "continuous",
    path: str = "trace",
    interface_faces: str = "all",
    executor=None,
    progress=None,
) -> list[ConvergenceRow]:
    rows: list[ConvergenceRow] = []
    for k in range(levels):
        N = N0 * 2**k
        prob, data, sysm, sol, sigma = solve_mms(mesh, p, N, variant, path, executor=executor)
        ev = volume_error(sysm, sol.u, prob.u)
        ei = interface_error(sysm, sigma, prob.grad, interface_faces)
        anti = flux_antisymmetry(sysm, sigma)
        vr = ir = None
        if rows:
            vr = math.log2(rows[-1].volume_error / ev)
            ir = math.log2(rows[-1].interface_error / ei)
        rows.append(ConvergenceRow(2 * p, N, ev, vr, ei, ir, anti))
        if progress is not None:
            progress(rows[-1])
        del sysm, sol, sigma
    return rows


def point_counts(mesh: Mesh, Ns) -> list[dict]:
    out = []
    for N in Ns:
        num = build_trace_numbering(mesh, N)
        out.append(
            {
                "N": N,
                "n_blocks": mesh.n_blocks,
                "n_interfaces": mesh.n_interfaces,
                "n_volume": num.n_volume,
                "n_trace": num.n_trace,
                "ratio": num.n_volume / num.n_trace if num.n_trace else float("inf"),
            }
        )
    return out


def spd_grid_size(p: int, rule: str) -> tuple[int, int]:
    """Grid size for the positivity suites: ``(literal N, N actually used)``.

    ``rule`` is '3p+2' (local suites) or '3p-1' (two-block suite).  When the
    literal value is below the smallest grid the order-2p closure supports,
    the smallest supported grid is used instead.
    """
    literal = {"3p+2": 3 * p + 2, "3p-1": 3 * p - 1}[rule]
    return literal, max(literal, minimum_intervals(p))
