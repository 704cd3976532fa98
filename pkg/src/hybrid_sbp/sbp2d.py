"""Tensor-product SBP operators on the reference square ``[0, 1]^2``.

Grid vectors are stacked with the r index running fastest: the value at
``(r_i, s_j)`` lives at ``j * (N_r + 1) + i``.  Faces are numbered
1: r = 0, 2: r = 1, 3: s = 0, 4: s = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _tables
from .sbp1d import SbpOperators1D, build_second_derivative

__all__ = [
    "FACES",
    "grid_index",
    "Coefficients2D",
    "FaceOperators",
    "StiffnessBundle",
    "face_size",
    "face_extractor",
    "build_face_operators",
    "build_stiffness",
    "derivative_matrices",
    "verify_split_identity",
    "psi_min_field",
]

FACES = (1, 2, 3, 4)


def grid_index(i: int, j: int, N: int, Ns: int | None = None) -> int:
    """Flat index of grid point ``(r_i, s_j)``."""
    Ns = N if Ns is None else Ns
    if not (0 <= i <= N and 0 <= j <= Ns):
        raise IndexError(f"grid index ({i}, {j}) outside [0, {N}] x [0, {Ns}]")
    return j * (N + 1) + i


def _check_face(k: int) -> None:
    if k not in FACES:
        raise ValueError(f"invalid face index {k}; faces are numbered 1..4")


@dataclass(frozen=True)
class Coefficients2D:
    """Transformed coefficient fields, each shaped ``(Ns + 1, Nr + 1)``.

    Row index is s (j), column index is r (i), so ``field.ravel()`` follows the
    stacking convention.
    """

    c_rr: np.ndarray
    c_ss: np.ndarray
    c_rs: np.ndarray

    def __post_init__(self):
        shapes = {np.shape(self.c_rr), np.shape(self.c_ss), np.shape(self.c_rs)}
        if len(shapes) != 1 or len(next(iter(shapes))) != 2:
            raise ValueError("coefficient fields must be 2D arrays of equal shape")

    @property
    def shape(self) -> tuple[int, int]:
        return self.c_rr.shape

    @property
    def c_sr(self) -> np.ndarray:
        return self.c_rs

    @classmethod
    def constant(cls, N: int, c_rr=1.0, c_ss=1.0, c_rs=0.0, Ns: int | None = None) -> "Coefficients2D":
        shape = ((N if Ns is None else Ns) + 1, N + 1)
        return cls(np.full(shape, float(c_rr)), np.full(shape, float(c_ss)), np.full(shape, float(c_rs)))

    def check(self) -> None:
        """Raise if the pointwise 2x2 matrix fails to be positive definite."""
        det = self.c_rr * self.c_ss - self.c_rs**2
        if not (np.all(self.c_rr > 0) and np.all(self.c_ss > 0) and np.all(det > 0)):
            bad = int(np.sum((self.c_rr <= 0) | (self.c_ss <= 0) | (det <= 0)))
            raise ValueError(f"coefficient tensor is not positive definite at {bad} grid points")


@dataclass(frozen=True)
class FaceOperators:
    k: int
    L: sp.csr_matrix
    G: sp.csr_matrix
    H_face: np.ndarray
    S_face: np.ndarray | None = None


@dataclass(frozen=True)
class StiffnessBundle:
    A_rr: sp.csr_matrix
    A_ss: sp.csr_matrix
    A_rs: sp.csr_matrix
    A_sr: sp.csr_matrix

    @property
    def A_total(self) -> sp.csr_matrix:
        return (self.A_rr + self.A_ss + self.A_rs + self.A_sr).tocsr()


def _coeffs_check_shape(coeffs: Coefficients2D, ops_r: SbpOperators1D, ops_s: SbpOperators1D) -> None:
    if coeffs.shape != (ops_s.n, ops_r.n):
        raise ValueError(f"coefficient shape {coeffs.shape} does not match grid {(ops_s.n, ops_r.n)}")


def face_size(k: int, ops_r: SbpOperators1D, ops_s: SbpOperators1D | None = None) -> int:
    ops_s = ops_r if ops_s is None else ops_s
    _check_face(k)
    return ops_s.n if k in (1, 2) else ops_r.n


def face_extractor(k: int, nr: int, ns: int) -> sp.csr_matrix:
    """Selection matrix L_k taking a volume vector to face k (ordered along the face)."""
    _check_face(k)
    if k == 1:
        idx = np.arange(ns) * nr
    elif k == 2:
        idx = np.arange(ns) * nr + nr - 1
    elif k == 3:
        idx = np.arange(nr)
    else:
        idx = (ns - 1) * nr + np.arange(nr)
    m = idx.size
    return sp.csr_matrix((np.ones(m), (np.arange(m), idx)), shape=(m, nr * ns))


def build_face_operators(
    k: int,
    ops_r: SbpOperators1D,
    coeffs: Coefficients2D,
    surface_jacobian: np.ndarray | None = None,
    ops_s: SbpOperators1D | None = None,
) -> FaceOperators:
    """Face extractor L_k and weighted boundary derivative G_k.

    G_k already carries the face norm: on face 1, ``v^T L_1^T G_1 u``
    approximates ``-int v (c_rr u_r + c_rs u_s) ds`` at r = 0.  Faces 2 and 4
    carry a plus sign, faces 1 and 3 a minus sign (outward direction).
    """
    _check_face(k)
    ops_s = ops_r if ops_s is None else ops_s
    _coeffs_check_shape(coeffs, ops_r, ops_s)
    nr, ns = ops_r.n, ops_s.n
    L = face_extractor(k, nr, ns)
    if k in (1, 2):
        i = 0 if k == 1 else nr - 1
        d = ops_r.d0 if k == 1 else ops_r.dN
        e = np.zeros(nr)
        e[i] = 1.0
        crr = coeffs.c_rr[:, i]
        crs = coeffs.c_rs[:, i]
        G = sp.kron(sp.diags(ops_s.H * crr), sp.csr_matrix(d[None, :]))
        G = G + sp.diags(crs) @ sp.kron(sp.csr_matrix(ops_s.Q), sp.csr_matrix(e[None, :]))
        H_face = ops_s.H
    else:
        j = 0 if k == 3 else ns - 1
        d = ops_s.d0 if k == 3 else ops_s.dN
        e = np.zeros(ns)
        e[j] = 1.0
        css = coeffs.c_ss[j, :]
        csr = coeffs.c_rs[j, :]
        G = sp.kron(sp.csr_matrix(d[None, :]), sp.diags(ops_r.H * css))
        G = G + sp.kron(sp.csr_matrix(e[None, :]), sp.diags(csr) @ sp.csr_matrix(ops_r.Q))
        H_face = ops_r.H
    if k in (1, 3):
        G = -G
    G = sp.csr_matrix(G)
    G.eliminate_zeros()
    S = None if surface_jacobian is None else np.asarray(surface_jacobian, dtype=float)
    return FaceOperators(k=k, L=L, G=G, H_face=H_face, S_face=S)


def _line_stiffness(p: int, C: np.ndarray, h: float, weights: np.ndarray):
    """Triplets of block-diag_l( weights[l] * A(C[l, :]) ) for a stack of lines.

    Vectorized counterpart of :func:`sbp1d.stiffness_matrix` over ``C.shape[0]``
    lines of length ``C.shape[1]``.
    """
    M0, B = {1: (_tables.M0_2, _tables.BOUNDARY_2), 2: (_tables.M0_4, _tables.BOUNDARY_4), 3: (_tables.M0_6, _tables.BOUNDARY_6)}[p]
    nl, n = C.shape
    K, S = B.shape[0], B.shape[1]
    r = M0.shape[0] // 2
    Cw = C * (weights / h)[:, None]
    base = (np.arange(nl) * n)[:, None]
    rows, cols, vals = [], [], []
    m = np.arange(K, n - K)
    for a in range(2 * r + 1):
        for b in range(2 * r + 1):
            w = M0[a, b]
            if w == 0.0:
                continue
            rows.append((base + (m + a - r)).ravel())
            cols.append((base + (m + b - r)).ravel())
            vals.append((w * Cw[:, m]).ravel())
    ia, ib = np.nonzero(np.any(B != 0.0, axis=0))
    for k in range(K):
        # left closure
        rows.append((base + ia).ravel())
        cols.append((base + ib).ravel())
        vals.append((Cw[:, [k]] * B[k][ia, ib][None, :]).ravel())
        # right closure, reflected
        Br = B[k][::-1, ::-1]
        ja, jb = np.nonzero(Br)
        rows.append((base + n - S + ja).ravel())
        cols.append((base + n - S + jb).ravel())
        vals.append((Cw[:, [n - 1 - k]] * Br[ja, jb][None, :]).ravel())
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def build_stiffness(ops_r: SbpOperators1D, coeffs: Coefficients2D, ops_s: SbpOperators1D | None = None) -> StiffnessBundle:
    """Assemble A_rr, A_ss, A_rs and A_sr for one block."""
    ops_s = ops_r if ops_s is None else ops_s
    if ops_r.p != ops_s.p:
        raise ValueError("mixed orders across dimensions are not supported")
    _coeffs_check_shape(coeffs, ops_r, ops_s)
    coeffs.check()
    nr, ns = ops_r.n, ops_s.n
    n = nr * ns

    # r-lines are contiguous in the stacking
    r, c, v = _line_stiffness(ops_r.p, coeffs.c_rr, ops_r.h, ops_s.H)
    A_rr = sp.csr_matrix((v, (r, c)), shape=(n, n))

    # s-lines: build in transposed (s fastest) ordering, then permute
    r, c, v = _line_stiffness(ops_s.p, coeffs.c_ss.T, ops_s.h, ops_r.H)
    perm = np.arange(n).reshape(nr, ns).T.ravel()  # transposed index -> flat index
    A_ss = sp.csr_matrix((v, (perm[r], perm[c])), shape=(n, n))

    Crs = sp.diags(coeffs.c_rs.ravel())
    Ir, Is = sp.identity(nr, format="csr"), sp.identity(ns, format="csr")
    left = sp.kron(Is, sp.csr_matrix(ops_r.Q.T))
    right = sp.kron(sp.csr_matrix(ops_s.Q), Ir)
    A_rs = sp.csr_matrix(left @ Crs @ right)
    A_rs.eliminate_zeros()
    A_sr = A_rs.T.tocsr()
    return StiffnessBundle(A_rr=A_rr, A_ss=A_ss, A_rs=A_rs, A_sr=A_sr)


def derivative_matrices(ops_r: SbpOperators1D, ops_s: SbpOperators1D | None = None):
    """Sparse ``D_r = I (x) D`` and ``D_s = D (x) I``."""
    ops_s = ops_r if ops_s is None else ops_s
    Dr = sp.kron(sp.identity(ops_s.n), sp.csr_matrix(ops_r.D), format="csr")
    Ds = sp.kron(sp.csr_matrix(ops_s.D), sp.identity(ops_r.n), format="csr")
    return Dr, Ds


def verify_split_identity(
    ops_r: SbpOperators1D,
    coeffs: Coefficients2D,
    stiffness: StiffnessBundle | None = None,
    faces: list[FaceOperators] | None = None,
    ops_s: SbpOperators1D | None = None,
) -> float:
    """Max-abs entry of ``(H(x)H)(-D_rr - D_rs - D_sr - D_ss) - (A - sum L_k^T G_k)``.

    The second derivatives D_rr and D_ss are built line by line from the 1D
    variable-coefficient operator, independently of the 2D stiffness assembly.
    """
    ops_s = ops_r if ops_s is None else ops_s
    stiffness = build_stiffness(ops_r, coeffs, ops_s) if stiffness is None else stiffness
    if faces is None:
        faces = [build_face_operators(k, ops_r, coeffs, ops_s=ops_s) for k in FACES]
    nr, ns = ops_r.n, ops_s.n
    n = nr * ns
    Drr = np.zeros((n, n))
    for j in range(ns):
        sl = slice(j * nr, (j + 1) * nr)
        Drr[sl, sl] = build_second_derivative(ops_r, coeffs.c_rr[j, :]).D2
    Dss = np.zeros((n, n))
    for i in range(nr):
        idx = np.arange(ns) * nr + i
        Dss[np.ix_(idx, idx)] = build_second_derivative(ops_s, coeffs.c_ss[:, i]).D2
    Dr, Ds = derivative_matrices(ops_r, ops_s)
    Dr, Ds = Dr.toarray(), Ds.toarray()
    C = np.diag(coeffs.c_rs.ravel())
    W = np.kron(ops_s.H, ops_r.H)
    lhs = W[:, None] * (-Drr - Dr @ C @ Ds - Ds @ C @ Dr - Dss)
    rhs = stiffness.A_total.toarray()
    for f in faces:
        rhs = rhs - (f.L.T @ f.G).toarray()
    return float(np.abs(lhs - rhs).max())


def psi_min_field(coeffs: Coefficients2D) -> np.ndarray:
    """Pointwise smallest eigenvalue of ``[[c_rr, c_rs], [c_rs, c_ss]]``."""
    a, b, c = coeffs.c_rr, coeffs.c_ss, coeffs.c_rs
    mean = 0.5 * (a + b)
    rad = np.hypot(0.5 * (a - b), c)
    # product/sum form avoids cancellation when the two eigenvalues differ a lot
    psi = (a * b - c * c) / (mean + rad)
    if not np.all(psi > 0):
        raise ValueError("coefficient tensor is not positive definite (psi_min <= 0)")
    return psi

