"""Direct solvers for the hybridized system.

Three equivalent paths are offered: the monolithic system, the trace Schur
complement (block solves then a trace-sized system), and the volume Schur
complement (eliminate the diagonal trace block).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .global_assembly import GlobalSystem

__all__ = [
    "FactorizationError",
    "SpdFactorization",
    "Solution",
    "factor_spd",
    "solve_monolithic",
    "solve_trace_schur",
    "solve_volume_schur",
    "solve_system",
    "trace_schur_matrix",
    "volume_schur_matrix",
    "min_eigenvalue",
    "SOLVER_PATHS",
]

log = logging.getLogger(__name__)

SOLVER_PATHS = ("monolithic", "trace", "volume")


class FactorizationError(ArithmeticError):
    pass


@dataclass
class SpdFactorization:
    """Sparse LU of a symmetric positive definite matrix.

    Uses a symmetric fill-reducing ordering and diagonal pivoting, so the
    factors play the role of a Cholesky factorization.
    """

    lu: spla.SuperLU
    n: int
    nnz_matrix: int
    nnz_factor: int

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if b.ndim == 2 and b.shape[1] == 0:
            return np.zeros_like(b)
        return self.lu.solve(b)


def factor_spd(A, label: str = "matrix", check: bool = True) -> SpdFactorization:
    A = sp.csc_matrix(A)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"{label}: matrix must be square")
    try:
        lu = spla.splu(
            A,
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except RuntimeError as exc:
        raise FactorizationError(f"{label}: factorization failed ({exc})") from exc
    if check:
        d = lu.U.diagonal()
        if not np.all(np.isfinite(d)) or np.any(d <= 0):
            # a positive definite matrix has positive pivots under symmetric pivoting
            raise FactorizationError(f"{label}: matrix is not positive definite (nonpositive pivot)")
    return SpdFactorization(lu=lu, n=n, nnz_matrix=A.nnz, nnz_factor=lu.L.nnz + lu.U.nnz - n)


@dataclass
class Solution:
    u: np.ndarray
    lam: np.ndarray
    path: str
    stats: dict = field(default_factory=dict)

    def block(self, sysm: GlobalSystem, b: int) -> np.ndarray:
        return self.u[sysm.block_slice(b)]


def solve_monolithic(sysm: GlobalSystem) -> Solution:
    K = sysm.monolithic()
    fac = factor_spd(K, "monolithic system")
    x = fac.solve(sysm.rhs())
    nv = sysm.n_volume
    return Solution(u=x[:nv], lam=x[nv:], path="monolithic", stats={"nnz": fac.nnz_matrix, "nnz_factor": fac.nnz_factor})


def _block_factor(sysm: GlobalSystem, b: int) -> SpdFactorization:
    Mb = sysm.block_matrix(b)
    try:
        return factor_spd(Mb, f"block {b + 1}")
    except FactorizationError as exc:
        raise FactorizationError(f"local factorization failed on block {b + 1}: {exc}") from exc


def _map(executor, fn, items):
    return list(executor.map(fn, items)) if executor is not None else [fn(i) for i in items]


def _trace_contributions(sysm: GlobalSystem, executor=None, keep_factors: bool = True):
    nb = len(sysm.block_offsets) - 1

    def work(b):
        fac = _block_factor(sysm, b)
        Fb, cols = sysm.block_F(b)
        gb = sysm.g[sysm.block_slice(b)]
        if cols.size:
            X = fac.solve(Fb.toarray())
            Sb = Fb.T @ X
            wb = Fb.T @ fac.solve(gb)
        else:
            Sb = np.zeros((0, 0))
            wb = np.zeros(0)
        return (fac if keep_factors else None), cols, Sb, wb

    return _map(executor, work, range(nb))


def trace_schur_matrix(sysm: GlobalSystem, executor=None) -> sp.csr_matrix:
    """``D - F^T M^{-1} F`` formed from per-block solves."""
    parts = _trace_contributions(sysm, executor, keep_factors=False)
    return _assemble_trace(sysm, parts)[0]


def _assemble_trace(sysm: GlobalSystem, parts):
    ntr = sysm.n_trace
    rows, cols_, vals = [np.arange(ntr)], [np.arange(ntr)], [sysm.D]
    rhs = sysm.g_delta.copy()
    for _, cols, Sb, wb in parts:
        if cols.size == 0:
            continue
        rr, cc = np.meshgrid(cols, cols, indexing="ij")
        rows.append(rr.ravel())
        cols_.append(cc.ravel())
        vals.append(-np.asarray(Sb).ravel())
        np.add.at(rhs, cols, -wb)
    S = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols_))), shape=(ntr, ntr))
    S = sp.csr_matrix(0.5 * (S + S.T))
    return S, rhs


def solve_trace_schur(sysm: GlobalSystem, executor=None, keep_factors: bool = True) -> Solution:
    """Solve for the traces first, then recover each block independently.

    With ``keep_factors=False`` the block factorizations are discarded after
    forming the trace system and recomputed for the recovery step, which
    bounds peak memory by a single block factor.
    """
    parts = _trace_contributions(sysm, executor, keep_factors)
    S, rhs = _assemble_trace(sysm, parts)
    if sysm.n_trace:
        fac = factor_spd(S, "trace Schur complement")
        lam = fac.solve(rhs)
        stats = {"nnz": fac.nnz_matrix, "nnz_factor": fac.nnz_factor}
    else:
        lam = np.zeros(0)
        stats = {"nnz": 0, "nnz_factor": 0}
    nb = len(sysm.block_offsets) - 1

    def recover(b):
        fac = parts[b][0] if parts[b][0] is not None else _block_factor(sysm, b)
        Fb, cols = sysm.block_F(b)
        rb = sysm.g[sysm.block_slice(b)] - (Fb @ lam[cols] if cols.size else 0.0)
        return fac.solve(rb)

    ub = _map(executor, recover, range(nb))
    u = np.concatenate(ub) if ub else np.zeros(0)
    stats["trace_size"] = sysm.n_trace
    return Solution(u=u, lam=lam, path="trace", stats=stats)


def volume_schur_matrix(sysm: GlobalSystem) -> sp.csr_matrix:
    """``M - F D^{-1} F^T``."""
    K = sysm.M - sysm.F @ sp.diags(1.0 / sysm.D) @ sysm.F.T if sysm.n_trace else sysm.M
    return sp.csr_matrix(0.5 * (K + K.T))


def solve_volume_schur(sysm: GlobalSystem) -> Solution:
    K = volume_schur_matrix(sysm)
    if sysm.n_trace:
        rhs = sysm.g - sysm.F @ (sysm.g_delta / sysm.D)
    else:
        rhs = sysm.g
    fac = factor_spd(K, "volume Schur complement")
    u = fac.solve(rhs)
    lam = (sysm.g_delta - sysm.F.T @ u) / sysm.D if sysm.n_trace else np.zeros(0)
    return Solution(u=u, lam=lam, path="volume", stats={"nnz": fac.nnz_matrix, "nnz_factor": fac.nnz_factor})


KEEP_FACTORS_LIMIT = 300_000


def solve_system(sysm: GlobalSystem, path: str = "trace", executor=None, keep_factors: bool | None = None) -> Solution:
    """Dispatch to one solver path.

    For the trace path ``keep_factors=None`` keeps block factorizations
    between the two passes only while the volume size is below
    ``KEEP_FACTORS_LIMIT``; larger systems refactor to save memory.
    """
    if path == "monolithic":
        return solve_monolithic(sysm)
    if path == "trace":
        if keep_factors is None:
            keep_factors = sysm.n_volume < KEEP_FACTORS_LIMIT
        return solve_trace_schur(sysm, executor=executor, keep_factors=keep_factors)
    if path == "volume":
        return solve_volume_schur(sysm)
    raise ValueError(f"unknown solver path {path!r}; expected one of {SOLVER_PATHS}")


def min_eigenvalue(A, dense_limit: int = 4000, tol: float = 1e-12) -> float:
    """Smallest eigenvalue of a symmetric matrix.

    Dense symmetric eigensolve up to ``dense_limit`` rows; beyond that a
    Lanczos iteration for the smallest algebraic eigenvalue.
    """
    if sp.issparse(A):
        A = sp.csr_matrix(A)
        n = A.shape[0]
        asym = abs(A - A.T).max() if A.nnz else 0.0
        scale = abs(A).max() if A.nnz else 1.0
    else:
        A = np.asarray(A, dtype=float)
        n = A.shape[0]
        asym = np.abs(A - A.T).max() if A.size else 0.0
        scale = np.abs(A).max() if A.size else 1.0
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if n == 0:
        raise ValueError("empty matrix")
    if asym > 1e-10 * max(scale, 1e-300):
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    if n <= dense_limit:
        M = A.toarray() if sp.issparse(A) else A
        return float(la.eigvalsh(0.5 * (M + M.T), subset_by_index=[0, 0])[0])
    vals = spla.eigsh(sp.csr_matrix(A), k=1, which="SA", tol=tol, return_eigenvectors=False)
    return float(vals[0])
