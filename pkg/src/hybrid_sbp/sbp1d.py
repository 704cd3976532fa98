"""One-dimensional diagonal-norm summation-by-parts operators.

Supported interior orders are 2p = 2, 4, 6 on the uniform grid
``r_i = i h``, ``h = 1/N``.  The first-derivative operators are the classical
diagonal-norm ones; the second derivatives are narrow variable-coefficient
operators written as ``H D2 = -A + c_N e_N d_N^T - c_0 e_0 d_0^T``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _tables

__all__ = [
    "SbpOperators1D",
    "VariableD2",
    "BorrowingConstants",
    "SUPPORTED_ORDERS",
    "X1_SIXTH_ORDER",
    "minimum_intervals",
    "build_first_derivative",
    "build_second_derivative",
    "stiffness_matrix",
    "borrowing_constants",
    "check_first_derivative",
    "check_second_derivative",
]

SUPPORTED_ORDERS = (1, 2, 3)

# free parameter of the sixth order first derivative family
X1_SIXTH_ORDER = 0.70127127127127

# smallest N for which the left and right closures do not interact
_MIN_N = {1: 2, 2: 9, 3: 11}

# borrowing constants (l, beta) stored exactly as published
_BORROWING = {
    1: (2, 0.363636363),
    2: (4, 0.2505765857),
    3: (6, 0.1878687080),
}

_D0 = {
    1: [-3 / 2, 2.0, -1 / 2],
    2: [-11 / 6, 3.0, -3 / 2, 1 / 3],
    3: [-25 / 12, 4.0, -3.0, 4 / 3, -1 / 4],
}

_H_BOUNDARY = {
    1: [1 / 2],
    2: [17 / 48, 59 / 48, 43 / 48, 49 / 48],
    3: [
        13649 / 43200,
        12013 / 8640,
        2711 / 4320,
        5359 / 4320,
        7877 / 8640,
        43801 / 43200,
    ],
}

_INTERIOR_D1 = {
    1: [1 / 2],
    2: [2 / 3, -1 / 12],
    3: [3 / 4, -3 / 20, 1 / 60],
}

# per-coefficient narrow second derivative data: interior block, boundary blocks
_D2_DATA = {
    1: (_tables.M0_2, _tables.BOUNDARY_2),
    2: (_tables.M0_4, _tables.BOUNDARY_4),
    3: (_tables.M0_6, _tables.BOUNDARY_6),
}


def _q_boundary_4() -> np.ndarray:
    return np.array(
        [
            [-1 / 2, 59 / 96, -1 / 12, -1 / 32, 0.0, 0.0],
            [-59 / 96, 0.0, 59 / 96, 0.0, 0.0, 0.0],
            [1 / 12, -59 / 96, 0.0, 59 / 96, -1 / 12, 0.0],
            [1 / 32, 0.0, -59 / 96, 0.0, 2 / 3, -1 / 12],
        ]
    )


def _q_boundary_6(x1: float) -> np.ndarray:
    """Boundary block (6 x 9) of the sixth order Q, one free parameter ``x1``.

    ``x1`` is the (5, 6) entry (1-based) of Q.  All other upper-triangle
    entries of the 6 x 6 corner follow from the SBP identity and the order
    conditions.
    """
    F = Fraction
    upper = {
        (0, 1): (1, -F(953, 16200)),
        (0, 2): (-4, F(715489, 259200)),
        (0, 3): (6, -F(62639, 14400)),
        (0, 4): (-4, F(147127, 51840)),
        (0, 5): (1, -F(89387, 129600)),
        (1, 2): (10, -F(57139, 8640)),
        (1, 3): (-20, F(745733, 51840)),
        (1, 4): (15, -F(18343, 1728)),
        (1, 5): (-4, F(240569, 86400)),
        (2, 3): (20, -F(176839, 12960)),
        (2, 4): (-20, F(242111, 17280)),
        (2, 5): (6, -F(182261, 43200)),
        (3, 4): (10, -F(165041, 25920)),
        (3, 5): (-4, F(710473, 259200)),
        (4, 5): (1, F(0)),
    }
    q = np.zeros((6, 9))
    for (i, j), (a, b) in upper.items():
        v = a * x1 + float(b)
        q[i, j] = v
        q[j, i] = -v
    q[0, 0] = -0.5
    st = _INTERIOR_D1[3]
    # columns 6..8 are fixed by skew symmetry with the interior rows
    for i in range(6):
        for j in range(6, 9):
            k = i - j
            if -3 <= k <= -1:
                q[i, j] = st[-k - 1]
    return q


def minimum_intervals(p: int) -> int:
    """Smallest N for which the order-2p operators can be built."""
    _check_order(p)
    return _MIN_N[p]


def _check_order(p: int) -> None:
    if p not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported half-order p={p}; expected one of {SUPPORTED_ORDERS}")


@dataclass(frozen=True)
class SbpOperators1D:
    """First-derivative SBP operators on ``N+1`` uniformly spaced points."""

    p: int
    N: int
    h: float
    H: np.ndarray
    Q: np.ndarray
    D: np.ndarray
    d0: np.ndarray
    dN: np.ndarray

    @property
    def n(self) -> int:
        return self.N + 1

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.N + 1)

    @property
    def Hmat(self) -> np.ndarray:
        return np.diag(self.H)


@dataclass(frozen=True)
class VariableD2:
    """Variable coefficient second derivative approximating ``(c u')'``."""

    c: np.ndarray
    A: np.ndarray
    D2: np.ndarray


@dataclass(frozen=True)
class BorrowingConstants:
    l: int
    beta: float
    alpha: float


def build_first_derivative(p: int, N: int, x1: float = X1_SIXTH_ORDER, validate: bool = False) -> SbpOperators1D:
    """Build H, Q, D, d0, dN for interior order 2p on ``[0, 1]`` with N intervals."""
    _check_order(p)
    N = int(N)
    if N < _MIN_N[p]:
        raise ValueError(f"N={N} is too small for order {2 * p}; need N >= {_MIN_N[p]}")
    n = N + 1
    h = 1.0 / N

    hb = np.array(_H_BOUNDARY[p])
    H = np.ones(n)
    H[: hb.size] = hb
    H[n - hb.size :] = hb[::-1]
    H *= h

    Q = np.zeros((n, n))
    st = _INTERIOR_D1[p]
    for k, v in enumerate(st, start=1):
        idx = np.arange(n - k)
        Q[idx, idx + k] = v
        Q[idx + k, idx] = -v
    if p == 1:
        qb = np.array([[-0.5, 0.5]])
    elif p == 2:
        qb = _q_boundary_4()
    else:
        qb = _q_boundary_6(x1)
    nr, nc = qb.shape
    # left closure: the boundary rows and, by skew symmetry, the boundary columns
    Q[:nr, :nc] = qb
    Q[nr:nc, :nr] = -qb[:, nr:nc].T
    # right closure by the reflection r -> 1 - r
    qr = -qb[::-1, ::-1]
    Q[n - nr :, n - nc :] = qr
    Q[n - nc : n - nr, n - nr :] = -qr[:, : nc - nr].T

    D = Q / H[:, None]

    d0 = np.zeros(n)
    s = np.array(_D0[p])
    d0[: s.size] = s / h
    dN = np.zeros(n)
    dN[n - s.size :] = -s[::-1] / h

    ops = SbpOperators1D(p=p, N=N, h=h, H=H, Q=Q, D=D, d0=d0, dN=dN)
    for a in (H, Q, D, d0, dN):
        a.setflags(write=False)
    if validate:
        errs = check_first_derivative(ops)
        bad = {k: v for k, v in errs.items() if k != "H_min" and v > 1e-10}
        if bad or errs["H_min"] <= 0:
            raise ArithmeticError(f"SBP invariants violated: {bad}")
    return ops


def stiffness_matrix(p: int, c: np.ndarray, h: float) -> np.ndarray:
    """Dense stiffness ``A(c) = sum_m c_m M^(m) / h`` for the order-2p closure."""
    _check_order(p)
    c = np.asarray(c, dtype=float)
    n = c.size
    M0, B = _D2_DATA[p]
    K, S = B.shape[0], B.shape[1]
    r = M0.shape[0] // 2
    if n - 1 < _MIN_N[p]:
        raise ValueError(f"grid of {n} points is too small for order {2 * p}")
    A = np.zeros((n, n))
    m = np.arange(K, n - K)
    for a in range(2 * r + 1):
        for b in range(2 * r + 1):
            w = M0[a, b]
            if w != 0.0:
                np.add.at(A, (m + a - r, m + b - r), w * c[m])
    for k in range(K):
        A[:S, :S] += c[k] * B[k]
        A[n - S :, n - S :] += c[n - 1 - k] * B[k][::-1, ::-1]
    return A / h


def build_second_derivative(ops: SbpOperators1D, c, validate: bool = False) -> VariableD2:
    """Variable coefficient second derivative for coefficient grid vector ``c``."""
    c = np.asarray(c, dtype=float)
    if c.shape != (ops.n,):
        raise ValueError(f"coefficient length {c.size} does not match grid size {ops.n}")
    if not np.all(c > 0):
        raise ValueError("coefficient must be strictly positive")
    A = stiffness_matrix(ops.p, c, ops.h)
    B = c[-1] * np.outer(np.eye(ops.n)[-1], ops.dN) - c[0] * np.outer(np.eye(ops.n)[0], ops.d0)
    D2 = (-A + B) / ops.H[:, None]
    out = VariableD2(c=c, A=A, D2=D2)
    if validate:
        errs = check_second_derivative(ops, out)
        if errs["symmetry"] > 1e-10 or errs["null"] > 1e-10 or errs["remainder_min_eig"] < -1e-10:
            raise ArithmeticError(f"second derivative invariants violated: {errs}")
    return out


def borrowing_constants(p: int, ops: SbpOperators1D | None = None) -> BorrowingConstants:
    """Table values of (l, beta) and the unscaled corner norm weight alpha."""
    _check_order(p)
    l, beta = _BORROWING[p]
    if ops is None:
        alpha = _H_BOUNDARY[p][0]
    else:
        alpha = min(ops.H[0], ops.H[-1]) / ops.h
    return BorrowingConstants(l=l, beta=beta, alpha=alpha)


def check_first_derivative(ops: SbpOperators1D) -> dict:
    """Max deviations of the first-derivative invariants (0 means exact)."""
    n, p = ops.n, ops.p
    B = np.zeros((n, n))
    B[0, 0], B[-1, -1] = -1.0, 1.0
    x = ops.x
    nb = len(_H_BOUNDARY[p]) if p > 1 else 1
    interior = slice(nb, n - nb)
    exact_int, exact_bnd = 0.0, 0.0
    for q in range(2 * p + 1):
        du = ops.D @ x**q
        ex = q * x ** max(q - 1, 0) if q else np.zeros(n)
        exact_int = max(exact_int, np.abs(du - ex)[interior].max(initial=0.0))
        if q <= p:
            exact_bnd = max(exact_bnd, np.abs(du - ex).max())
    d_exact = 0.0
    for q in range(p + 1):
        ex = float(q) * (0.0 ** max(q - 1, 0)) if q else 0.0
        d_exact = max(d_exact, abs(ops.d0 @ x**q - ex), abs(ops.dN @ x**q - q))
    return {
        "H_min": float(ops.H.min()),
        "sbp": float(np.abs(ops.Q + ops.Q.T - B).max()),
        "constant": float(np.abs(ops.D @ np.ones(n)).max()),
        "interior_exactness": float(exact_int),
        "boundary_exactness": float(exact_bnd),
        "boundary_derivative": float(d_exact),
    }


def check_second_derivative(ops: SbpOperators1D, d2: VariableD2) -> dict:
    A = d2.A
    R = A - ops.D.T @ ((d2.c * ops.H)[:, None] * ops.D)
    scale = max(np.abs(A).max(), 1.0)
    return {
        "symmetry": float(np.abs(A - A.T).max() / scale),
        "null": float(np.abs(A @ np.ones(ops.n)).max() / scale),
        "remainder_min_eig": float(np.linalg.eigvalsh((R + R.T) / 2).min() / scale),
    }
