"""Per-block SAT system: penalties, local matrix M, face matrices F_k, RHS.

For one block the discrete equations read

    M u + sum_k F_k lambda_k = (H x H) J f

with ``M = A + sum_k C_k``, ``C_k = -L_k^T G_k - G_k^T L_k + L_k^T H tau_k L_k``
and ``F_k = G_k^T - L_k^T H tau_k``.  Dirichlet faces fix lambda_k to the
boundary data.  Neumann faces eliminate lambda_k through the flux condition,
which modifies M and moves the data to the right-hand side.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .sbp1d import BorrowingConstants, SbpOperators1D, borrowing_constants
from .sbp2d import FACES, Coefficients2D, FaceOperators, StiffnessBundle, build_face_operators, build_stiffness, psi_min_field

__all__ = [
    "PenaltyParameters",
    "LocalProblem",
    "penalty_parameters",
    "assemble_local",
    "build_local_problem",
    "local_rhs",
    "face_trace_from_neumann",
]

BC_KINDS = ("D", "N", "I")


@dataclass(frozen=True)
class PenaltyParameters:
    tau: dict[int, np.ndarray]
    tau_scale: float

    def __getitem__(self, k: int) -> np.ndarray:
        return self.tau[k]


def penalty_parameters(
    coeffs: Coefficients2D,
    borrowing: BorrowingConstants,
    h: float | tuple[float, float],
    tau_scale: float = 1.0,
) -> PenaltyParameters:
    """Pointwise face penalties from the positivity bound.

    ``h`` is the grid spacing, or ``(h_r, h_s)`` for unequal directions.
    The windowed minimum of psi_min runs over the l + 1 points nearest the face.
    """
    if not tau_scale >= 1.0:
        raise ValueError(f"tau_scale must be >= 1, got {tau_scale}")
    hr, hs = (h, h) if np.isscalar(h) else h
    psi = psi_min_field(coeffs)
    l, beta, alpha = borrowing.l, borrowing.beta, borrowing.alpha
    ns, nr = psi.shape
    if l + 1 > min(nr, ns):
        raise ValueError("grid is narrower than the borrowing window")
    tau = {}
    # faces 1 and 2: windows along r for each s-line
    for k, cols, i in ((1, slice(0, l + 1), 0), (2, slice(nr - l - 1, nr), nr - 1)):
        Psi = psi[:, cols].min(axis=1)
        crr, crs = coeffs.c_rr[:, i], coeffs.c_rs[:, i]
        tau[k] = tau_scale * (2 * crr**2 / (hr * beta * Psi) + 2 * crs**2 / (hr * alpha * Psi))
    for k, rows, j in ((3, slice(0, l + 1), 0), (4, slice(ns - l - 1, ns), ns - 1)):
        Psi = psi[rows, :].min(axis=0)
        css, crs = coeffs.c_ss[j, :], coeffs.c_rs[j, :]
        tau[k] = tau_scale * (2 * css**2 / (hs * beta * Psi) + 2 * crs**2 / (hs * alpha * Psi))
    return PenaltyParameters(tau=tau, tau_scale=float(tau_scale))


@dataclass
class LocalProblem:
    """Assembled SAT system of one block (immutable by convention)."""

    M: sp.csr_matrix
    F: dict[int, sp.csr_matrix]
    faces: dict[int, FaceOperators]
    penalties: PenaltyParameters
    bc: dict[int, str]
    W: np.ndarray  # volume quadrature weights H (x) H, flattened
    J: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.M.shape[0]

    def face_norm(self, k: int) -> np.ndarray:
        return self.faces[k].H_face


def _face_matrices(face: FaceOperators, tau: np.ndarray):
    Ht = sp.diags(face.H_face * tau)
    LtHt = face.L.T @ Ht
    C = -(face.L.T @ face.G) - (face.G.T @ face.L) + LtHt @ face.L
    F = face.G.T - LtHt
    return C, sp.csr_matrix(F)


def assemble_local(
    stiffness: StiffnessBundle,
    faces: dict[int, FaceOperators] | list[FaceOperators],
    penalties: PenaltyParameters,
    bc: dict[int, str],
    W: np.ndarray,
    J: np.ndarray | None = None,
) -> LocalProblem:
    """Local matrix M and face matrices F_k.

    ``bc[k]`` is 'D' (Dirichlet), 'N' (Neumann) or 'I' (interior face with a
    trace unknown).  Neumann faces are eliminated here.
    """
    if not isinstance(faces, dict):
        faces = {f.k: f for f in faces}
    if set(faces) != set(FACES) or set(bc) != set(FACES):
        raise ValueError("faces and boundary tags must be given for faces 1..4")
    for k, t in bc.items():
        if t not in BC_KINDS:
            raise ValueError(f"unknown tag {t!r} on face {k}; expected one of {BC_KINDS}")
    M = stiffness.A_total
    n = M.shape[0]
    F = {}
    for k in FACES:
        if faces[k].L.shape[1] != n:
            raise ValueError(f"face {k} operators do not match the volume grid")
        C, F[k] = _face_matrices(faces[k], penalties[k])
        M = M + C
    for k in FACES:
        if bc[k] == "N":
            w = 1.0 / (faces[k].H_face * penalties[k])
            M = M - F[k] @ sp.diags(w) @ F[k].T
    M = sp.csr_matrix(M)
    # exact symmetry: average away rounding from the sparse products
    M = sp.csr_matrix((M + M.T) * 0.5)
    M.eliminate_zeros()
    return LocalProblem(M=M, F=F, faces=faces, penalties=penalties, bc=dict(bc), W=np.asarray(W), J=J)


def build_local_problem(
    ops: SbpOperators1D,
    coeffs: Coefficients2D,
    bc: dict[int, str],
    tau_scale: float = 1.0,
    surface=None,
    J: np.ndarray | None = None,
) -> LocalProblem:
    """Convenience wrapper: stiffness, faces, penalties and assembly in one call."""
    st = build_stiffness(ops, coeffs)
    faces = {}
    for k in FACES:
        S = None if surface is None else surface[k].S_J
        faces[k] = build_face_operators(k, ops, coeffs, surface_jacobian=S)
    pen = penalty_parameters(coeffs, borrowing_constants(ops.p, ops), ops.h, tau_scale)
    W = np.kron(ops.H, ops.H)
    lp = assemble_local(st, faces, pen, bc, W, J=None if J is None else np.asarray(J).ravel())
    lp.extra["ops"] = ops
    return lp


def local_rhs(
    lp: LocalProblem,
    f: np.ndarray | None = None,
    J: np.ndarray | None = None,
    dirichlet: dict[int, np.ndarray] | None = None,
    neumann: dict[int, np.ndarray] | None = None,
) -> np.ndarray:
    """Right-hand side from forcing and boundary data (interior faces excluded).

    ``neumann[k]`` is the physical flux ``n . b grad u`` at the face points; it
    is multiplied by the surface Jacobian stored with the face operators.
    """
    dirichlet = dirichlet or {}
    neumann = neumann or {}
    q = np.zeros(lp.n)
    if f is not None:
        Jv = lp.J if J is None else np.asarray(J).ravel()
        Jv = 1.0 if Jv is None else Jv
        q += lp.W * Jv * np.asarray(f, dtype=float).ravel()
    for k, t in lp.bc.items():
        if t == "D":
            if k not in dirichlet:
                raise ValueError(f"missing Dirichlet data on face {k}")
            q -= lp.F[k] @ np.asarray(dirichlet[k], dtype=float)
        elif t == "N":
            if k not in neumann:
                raise ValueError(f"missing Neumann data on face {k}")
            S = lp.faces[k].S_face
            g = np.asarray(neumann[k], dtype=float) * (1.0 if S is None else S)
            q -= lp.F[k] @ (g / lp.penalties[k])
    return q


def face_trace_from_neumann(lp: LocalProblem, k: int, u: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Eliminated trace on Neumann face k given the volume solution and flux data."""
    face, tau = lp.faces[k], lp.penalties[k]
    S = 1.0 if face.S_face is None else face.S_face
    return face.L @ u - (face.G @ u - face.H_face * S * g) / (face.H_face * tau)
