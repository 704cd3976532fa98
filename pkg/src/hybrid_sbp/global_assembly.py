"""Global hybridized system over a multi-block mesh.

The unknowns are the stacked block solutions ``u`` and one trace vector per
interior face.  The system is

    [ M   F ] [u     ]   [g      ]
    [ F^T D ] [lambda] = [g_delta]

with block-diagonal M, coupling F and diagonal D.  On a jump face the plus
side sees the trace ``lambda - delta / 2`` and the minus side
``lambda + delta / 2``, so the computed solution satisfies
``u_minus - u_plus = delta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .geometry import BlockGeometry, block_geometry
from .local_problem import LocalProblem, build_local_problem, face_trace_from_neumann, local_rhs
from .mesh import Mesh, TraceNumbering, build_trace_numbering
from .sbp1d import SbpOperators1D, build_first_derivative
from .sbp2d import FACES, Coefficients2D

__all__ = [
    "ProblemData",
    "Discretization",
    "GlobalSystem",
    "discretize",
    "assemble_global",
    "flux_recovery",
    "face_tags",
]


@dataclass
class ProblemData:
    """Forcing and boundary data as callables of physical coordinates.

    Every callable receives the block index first so piecewise data can be
    expressed.  ``neumann`` returns ``n . b grad u`` for outward unit normal
    ``(nx, ny)``; ``jump`` returns delta on a jump face in plus-side ordering.
    """

    forcing: Callable | None = None  # (b, x, y) -> f
    dirichlet: Callable | None = None  # (b, x, y) -> g_D
    neumann: Callable | None = None  # (b, x, y, nx, ny) -> g_N
    jump: Callable | None = None  # (f, x, y) -> delta


@dataclass
class Discretization:
    mesh: Mesh
    ops: SbpOperators1D
    numbering: TraceNumbering
    locals: list[LocalProblem]
    geometry: list[BlockGeometry | None]

    @property
    def N(self) -> int:
        return self.ops.N


def face_tags(mesh: Mesh, b: int) -> dict[int, str]:
    tags = {}
    for k in FACES:
        role = mesh.face_role(b, k)
        tags[k] = "I" if role[0] == "iface" else role[1]
    return tags


def discretize(
    mesh: Mesh,
    p: int,
    N: int,
    tau_scale: float = 1.0,
    b=None,
    coefficients: list[Coefficients2D] | None = None,
    numerical_metrics: bool = False,
    executor=None,
) -> Discretization:
    """Geometry and local problems for every block.

    ``coefficients`` overrides the geometric coefficients per block (used by
    the randomized positivity suites); geometry is then still evaluated so
    face coordinates stay available.
    """
    ops = build_first_derivative(p, N)
    numbering = build_trace_numbering(mesh, N)

    def one(bi):
        geo = block_geometry(mesh.blocks[bi].mapping(), N, b=b, ops=ops if numerical_metrics else None)
        coeffs = geo.coeffs if coefficients is None else coefficients[bi]
        lp = build_local_problem(ops, coeffs, face_tags(mesh, bi), tau_scale, surface=geo.surface, J=geo.J)
        return geo, lp

    idx = range(mesh.n_blocks)
    results = list(executor.map(one, idx)) if executor is not None else [one(i) for i in idx]
    return Discretization(
        mesh=mesh,
        ops=ops,
        numbering=numbering,
        locals=[r[1] for r in results],
        geometry=[r[0] for r in results],
    )


@dataclass
class GlobalSystem:
    """Assembled global system; the block-diagonal M is formed on first use."""

    F: sp.csr_matrix
    D: np.ndarray
    g: np.ndarray
    g_delta: np.ndarray
    block_offsets: np.ndarray
    disc: Discretization
    delta: list[np.ndarray] = field(default_factory=list)
    block_cols: list[np.ndarray] = field(default_factory=list)

    @property
    def M(self) -> sp.csr_matrix:
        if getattr(self, "_M", None) is None:
            self._M = sp.block_diag([lp.M for lp in self.disc.locals], format="csr")
        return self._M

    def block_matrix(self, b: int) -> sp.csr_matrix:
        return self.disc.locals[b].M

    @property
    def n_volume(self) -> int:
        return int(self.block_offsets[-1])

    @property
    def n_trace(self) -> int:
        return self.D.size

    def block_slice(self, b: int) -> slice:
        return slice(int(self.block_offsets[b]), int(self.block_offsets[b + 1]))

    def monolithic(self) -> sp.csr_matrix:
        return sp.bmat([[self.M, self.F], [self.F.T, sp.diags(self.D)]], format="csr")

    def rhs(self) -> np.ndarray:
        return np.concatenate([self.g, self.g_delta])

    def block_F(self, b: int) -> tuple[sp.csr_matrix, np.ndarray]:
        """Columns of F touching block b, restricted to its rows, and their indices."""
        cols = self.block_cols[b]
        return sp.csr_matrix(self.F[self.block_slice(b)][:, cols]), cols


def _face_xy(disc: Discretization, b: int, k: int):
    geo = disc.geometry[b]
    fg = geo.surface[k]
    return fg.x, fg.y, fg.nx, fg.ny


def block_rhs(disc: Discretization, b: int, data: ProblemData | None) -> np.ndarray:
    lp = disc.locals[b]
    if data is None:
        return np.zeros(lp.n)
    geo = disc.geometry[b]
    f = None
    if data.forcing is not None:
        f = data.forcing(b, geo.metrics.x, geo.metrics.y)
    dirichlet, neumann = {}, {}
    for k, t in lp.bc.items():
        if t == "I":
            continue
        x, y, nx, ny = _face_xy(disc, b, k)
        if t == "D":
            if data.dirichlet is None:
                raise ValueError(f"block {b + 1} face {k} is Dirichlet but no Dirichlet data was given")
            dirichlet[k] = np.broadcast_to(data.dirichlet(b, x, y), x.shape)
        else:
            if data.neumann is None:
                raise ValueError(f"block {b + 1} face {k} is Neumann but no Neumann data was given")
            neumann[k] = np.broadcast_to(data.neumann(b, x, y, nx, ny), x.shape)
    return local_rhs(lp, f, geo.J, dirichlet, neumann)


def assemble_global(disc: Discretization, data: ProblemData | None = None) -> GlobalSystem:
    """Assemble M, F, D and both right-hand sides."""
    mesh, num = disc.mesh, disc.numbering
    nb = mesh.n_blocks
    sizes = np.array([lp.n for lp in disc.locals])
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    ntr = num.n_trace

    # jump data per interior face, in plus-side ordering
    deltas = []
    for f, itf in enumerate(mesh.interfaces):
        if itf.jump:
            if data is None or data.jump is None:
                raise ValueError(f"interface {f} is a jump face but no jump data was given")
            x, y, _, _ = _face_xy(disc, itf.plus_block, itf.plus_face)
            deltas.append(np.broadcast_to(np.asarray(data.jump(f, x, y), dtype=float), x.shape).copy())
        else:
            deltas.append(np.zeros(num.N + 1))

    D = np.zeros(ntr)
    g_delta = np.zeros(ntr)
    g = np.zeros(offsets[-1])
    rows, cols, vals = [], [], []
    block_cols = []
    for b in range(nb):
        lp = disc.locals[b]
        gb = block_rhs(disc, b, data)
        bcols = []
        for k in FACES:
            role = mesh.face_role(b, k)
            if role[0] != "iface":
                continue
            _, f, side = role
            idx = num.face_indices(mesh, f, side)
            bcols.append(idx)
            Fk = lp.F[k].tocoo()
            rows.append(Fk.row + offsets[b])
            cols.append(idx[Fk.col])
            vals.append(Fk.data)
            Htau = lp.faces[k].H_face * lp.penalties[k]
            np.add.at(D, idx, Htau)
            delta_local = deltas[f][idx - num.offsets[f]]
            sgn = 1.0 if side == "+" else -1.0
            np.add.at(g_delta, idx, sgn * 0.5 * Htau * delta_local)
            gb = gb + sgn * 0.5 * (lp.F[k] @ delta_local)
        g[offsets[b] : offsets[b + 1]] = gb
        block_cols.append(np.concatenate(bcols) if bcols else np.zeros(0, dtype=np.int64))
    if rows:
        F = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(offsets[-1], ntr))
    else:
        F = sp.csr_matrix((offsets[-1], ntr))
    if ntr and not np.all(D > 0):
        raise ArithmeticError("trace diagonal is not strictly positive")
    return GlobalSystem(F=F, D=D, g=g, g_delta=g_delta, block_offsets=offsets, disc=disc, delta=deltas, block_cols=block_cols)


def flux_recovery(sysm: GlobalSystem, u: np.ndarray, lam: np.ndarray, data: ProblemData | None = None) -> dict:
    """Penalty fluxes ``sigma_hat`` on every face, keyed by ``(block, face)``.

    ``H sigma_hat = G u - H tau (L u - lambda_k)`` where lambda_k is the trace
    seen by that side (shifted by -/+ delta/2 on jump faces).  The result is
    ``sigma_hat`` itself, an approximation of ``S_J n . b grad u``.
    """
    disc, mesh, num = sysm.disc, sysm.disc.mesh, sysm.disc.numbering
    out = {}
    for b, lp in enumerate(disc.locals):
        ub = u[sysm.block_slice(b)]
        for k in FACES:
            face, tau = lp.faces[k], lp.penalties[k]
            role = mesh.face_role(b, k)
            if role[0] == "iface":
                _, f, side = role
                idx = num.face_indices(mesh, f, side)
                d = sysm.delta[f][idx - num.offsets[f]]
                lam_k = lam[idx] - (0.5 * d if side == "+" else -0.5 * d)
            elif role[1] == "D":
                x, y, _, _ = _face_xy(disc, b, k)
                lam_k = np.broadcast_to(data.dirichlet(b, x, y), x.shape) if data is not None else np.zeros(face.H_face.size)
            else:
                x, y, nx, ny = _face_xy(disc, b, k)
                g = np.broadcast_to(data.neumann(b, x, y, nx, ny), x.shape) if data is not None else np.zeros(face.H_face.size)
                lam_k = face_trace_from_neumann(lp, k, ub, g)
            out[(b, k)] = (face.G @ ub) / face.H_face - tau * (face.L @ ub - lam_k)
    return out
