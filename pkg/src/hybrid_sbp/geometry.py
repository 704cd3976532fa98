"""Block mappings from the reference square and the derived metric data.

All grid fields are arrays of shape ``(N + 1, N + 1)`` indexed ``[j, i]``
(s index first), so ``field.ravel()`` matches the volume stacking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from .sbp1d import SbpOperators1D
from .sbp2d import Coefficients2D, psi_min_field

__all__ = [
    "Curve",
    "LineEdge",
    "ArcEdge",
    "BlockMapping",
    "MetricTerms",
    "FaceGeometry",
    "SurfaceGeometry",
    "BlockGeometry",
    "affine_mapping",
    "transfinite_mapping",
    "evaluate_metrics",
    "surface_geometry",
    "transform_coefficients",
    "block_geometry",
]


class Curve(Protocol):
    """Parametric edge ``t in [0, 1] -> (x, y)`` with derivative."""

    def point(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]: ...

    def tangent(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]: ...


@dataclass(frozen=True)
class LineEdge:
    p0: tuple[float, float]
    p1: tuple[float, float]

    def point(self, t):
        t = np.asarray(t, dtype=float)
        return (self.p0[0] + t * (self.p1[0] - self.p0[0]), self.p0[1] + t * (self.p1[1] - self.p0[1]))

    def tangent(self, t):
        t = np.asarray(t, dtype=float)
        return (np.full_like(t, self.p1[0] - self.p0[0]), np.full_like(t, self.p1[1] - self.p0[1]))

    @property
    def endpoints(self):
        return self.p0, self.p1


@dataclass(frozen=True)
class ArcEdge:
    """Circular arc about ``center`` swept from angle ``theta0`` to ``theta1``."""

    center: tuple[float, float]
    radius: float
    theta0: float
    theta1: float

    @classmethod
    def through(cls, p0, p1, center, radius: float | None = None, tol: float = 1e-10) -> "ArcEdge":
        """Shorter arc from ``p0`` to ``p1`` on the circle about ``center``."""
        cx, cy = center
        r0 = np.hypot(p0[0] - cx, p0[1] - cy)
        r1 = np.hypot(p1[0] - cx, p1[1] - cy)
        R = r0 if radius is None else float(radius)
        if abs(r0 - R) > tol * max(R, 1.0) or abs(r1 - R) > tol * max(R, 1.0):
            raise ValueError(f"arc endpoints {p0}, {p1} are not on the circle of radius {R} about {center}")
        t0 = np.arctan2(p0[1] - cy, p0[0] - cx)
        t1 = np.arctan2(p1[1] - cy, p1[0] - cx)
        dt = (t1 - t0 + np.pi) % (2 * np.pi) - np.pi
        if abs(abs(dt) - np.pi) < 1e-12:
            raise ValueError("arc endpoints are antipodal; the arc direction is ambiguous")
        return cls(center=(float(cx), float(cy)), radius=R, theta0=float(t0), theta1=float(t0 + dt))

    def point(self, t):
        th = self.theta0 + np.asarray(t, dtype=float) * (self.theta1 - self.theta0)
        return (self.center[0] + self.radius * np.cos(th), self.center[1] + self.radius * np.sin(th))

    def tangent(self, t):
        dth = self.theta1 - self.theta0
        th = self.theta0 + np.asarray(t, dtype=float) * dth
        return (-self.radius * dth * np.sin(th), self.radius * dth * np.cos(th))

    def reversed(self) -> "ArcEdge":
        return ArcEdge(self.center, self.radius, self.theta1, self.theta0)


@dataclass(frozen=True)
class BlockMapping:
    """Map ``(r, s) -> (x, y)`` with its four partial derivatives.

    ``evaluate(r, s)`` returns ``(x, y, x_r, x_s, y_r, y_s)``.
    """

    evaluate: Callable[[np.ndarray, np.ndarray], tuple]
    kind: str = "analytic"
    edges: tuple | None = None

    def __call__(self, r, s):
        x, y, *_ = self.evaluate(np.asarray(r, dtype=float), np.asarray(s, dtype=float))
        return x, y


def affine_mapping(a: np.ndarray, b: np.ndarray) -> BlockMapping:
    """``(x, y) = a @ (r, s) + b`` for a 2x2 matrix ``a``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)

    def ev(r, s):
        one = np.ones(np.broadcast(r, s).shape)
        x = a[0, 0] * r + a[0, 1] * s + b[0]
        y = a[1, 0] * r + a[1, 1] * s + b[1]
        return x * one, y * one, a[0, 0] * one, a[0, 1] * one, a[1, 0] * one, a[1, 1] * one

    return BlockMapping(ev, kind="analytic")


def transfinite_mapping(edges, tol: float = 1e-12) -> BlockMapping:
    """Coons patch from four edge curves ordered by face number.

    ``edges[0]`` is face 1 (r = 0) and ``edges[1]`` face 2 (r = 1), both
    parametrized by s; ``edges[2]`` is face 3 (s = 0) and ``edges[3]`` face 4
    (s = 1), both parametrized by r.
    """
    if len(edges) != 4:
        raise ValueError("a transfinite mapping needs exactly four edges")
    e1, e2, e3, e4 = edges
    P00 = np.array(e1.point(0.0))
    P01 = np.array(e1.point(1.0))
    P10 = np.array(e2.point(0.0))
    P11 = np.array(e2.point(1.0))
    pairs = [
        (P00, e3.point(0.0), "face 1/face 3 at (0, 0)"),
        (P10, e3.point(1.0), "face 2/face 3 at (1, 0)"),
        (P01, e4.point(0.0), "face 1/face 4 at (0, 1)"),
        (P11, e4.point(1.0), "face 2/face 4 at (1, 1)"),
    ]
    scale = max(1.0, float(np.abs([P00, P01, P10, P11]).max()))
    for pa, pb, what in pairs:
        if np.hypot(pa[0] - pb[0], pa[1] - pb[1]) > tol * scale:
            raise ValueError(f"edge corners do not match ({what}): {tuple(pa)} vs {tuple(np.asarray(pb))}")

    def ev(r, s):
        r, s = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(s, dtype=float))
        out = []
        for c in (0, 1):
            E1, E2 = e1.point(s)[c], e2.point(s)[c]
            E3, E4 = e3.point(r)[c], e4.point(r)[c]
            dE1, dE2 = e1.tangent(s)[c], e2.tangent(s)[c]
            dE3, dE4 = e3.tangent(r)[c], e4.tangent(r)[c]
            a00, a01, a10, a11 = P00[c], P01[c], P10[c], P11[c]
            X = (1 - r) * E1 + r * E2 + (1 - s) * E3 + s * E4 - (
                (1 - r) * (1 - s) * a00 + r * (1 - s) * a10 + (1 - r) * s * a01 + r * s * a11
            )
            Xr = -E1 + E2 + (1 - s) * dE3 + s * dE4 - (-(1 - s) * a00 + (1 - s) * a10 - s * a01 + s * a11)
            Xs = (1 - r) * dE1 + r * dE2 - E3 + E4 - (-(1 - r) * a00 - r * a10 + (1 - r) * a01 + r * a11)
            out.append((X, Xr, Xs))
        (x, xr, xs), (y, yr, ys) = out
        return x, y, xr, xs, yr, ys

    return BlockMapping(ev, kind="transfinite", edges=tuple(edges))


@dataclass(frozen=True)
class MetricTerms:
    N: int
    x: np.ndarray
    y: np.ndarray
    x_r: np.ndarray
    x_s: np.ndarray
    y_r: np.ndarray
    y_s: np.ndarray
    J: np.ndarray
    r_x: np.ndarray
    r_y: np.ndarray
    s_x: np.ndarray
    s_y: np.ndarray


def _reference_grid(N: int) -> tuple[np.ndarray, np.ndarray]:
    t = np.linspace(0.0, 1.0, N + 1)
    s, r = np.meshgrid(t, t, indexing="ij")
    return r, s


def evaluate_metrics(mapping: BlockMapping, N: int, ops: SbpOperators1D | None = None) -> MetricTerms:
    """Metric terms on the ``(N + 1)^2`` reference grid.

    With ``ops`` given, the partials are computed by applying the SBP first
    derivative to the grid coordinates instead of using the analytic ones.
    """
    r, s = _reference_grid(N)
    x, y, xr, xs, yr, ys = (np.asarray(a, dtype=float) for a in mapping.evaluate(r, s))
    if ops is not None:
        if ops.N != N:
            raise ValueError("operator grid does not match N")
        xr, yr = x @ ops.D.T, y @ ops.D.T
        xs, ys = ops.D @ x, ops.D @ y
    J = xr * ys - xs * yr
    if not np.all(J > 0):
        raise ValueError(f"degenerate mapping: min J = {J.min():.3e} (J must be positive everywhere)")
    return MetricTerms(
        N=N, x=x, y=y, x_r=xr, x_s=xs, y_r=yr, y_s=ys, J=J,
        r_x=ys / J, r_y=-xs / J, s_x=-yr / J, s_y=xr / J,
    )


@dataclass(frozen=True)
class FaceGeometry:
    k: int
    x: np.ndarray
    y: np.ndarray
    S_J: np.ndarray
    nx: np.ndarray
    ny: np.ndarray


@dataclass(frozen=True)
class SurfaceGeometry:
    faces: dict[int, FaceGeometry]

    def __getitem__(self, k: int) -> FaceGeometry:
        return self.faces[k]


def _face_slice(k: int, a: np.ndarray) -> np.ndarray:
    return {1: a[:, 0], 2: a[:, -1], 3: a[0, :], 4: a[-1, :]}[k]


def surface_geometry(metrics: MetricTerms) -> SurfaceGeometry:
    """Surface Jacobians and outward unit normals on the four faces."""
    faces = {}
    for k in (1, 2, 3, 4):
        g = lambda a: _face_slice(k, a)  # noqa: E731
        if k in (1, 2):
            tx, ty = g(metrics.x_s), g(metrics.y_s)
            sign = -1.0 if k == 1 else 1.0
            # S_J n = sign * (y_s, -x_s)
            vx, vy = sign * ty, -sign * tx
        else:
            tx, ty = g(metrics.x_r), g(metrics.y_r)
            sign = -1.0 if k == 3 else 1.0
            # S_J n = sign * (-y_r, x_r)
            vx, vy = -sign * ty, sign * tx
        S = np.hypot(tx, ty)
        if not np.all(S > 0):
            raise ValueError(f"degenerate edge on face {k}: zero-length tangent")
        faces[k] = FaceGeometry(k=k, x=g(metrics.x).copy(), y=g(metrics.y).copy(), S_J=S, nx=vx / S, ny=vy / S)
    return SurfaceGeometry(faces)


def transform_coefficients(metrics: MetricTerms, b=None) -> Coefficients2D:
    """Reference-space coefficients ``c = J (grad xi) b (grad xi)^T``.

    ``b`` may be None (identity), a tuple ``(b_xx, b_xy, b_yy)`` of scalars or
    grid arrays, or a callable ``(x, y) -> (b_xx, b_xy, b_yy)``.
    """
    if b is None:
        bxx, bxy, byy = 1.0, 0.0, 1.0
    elif callable(b):
        bxx, bxy, byy = b(metrics.x, metrics.y)
    else:
        bxx, bxy, byy = b
    shape = metrics.J.shape
    bxx, bxy, byy = (np.broadcast_to(np.asarray(v, dtype=float), shape) for v in (bxx, bxy, byy))
    if not (np.all(bxx > 0) and np.all(bxx * byy - bxy**2 > 0)):
        raise ValueError("physical coefficient b is not symmetric positive definite")
    J, rx, ry, sx, sy = metrics.J, metrics.r_x, metrics.r_y, metrics.s_x, metrics.s_y
    c_rr = J * (bxx * rx * rx + 2 * bxy * rx * ry + byy * ry * ry)
    c_ss = J * (bxx * sx * sx + 2 * bxy * sx * sy + byy * sy * sy)
    c_rs = J * (bxx * rx * sx + bxy * (rx * sy + ry * sx) + byy * ry * sy)
    out = Coefficients2D(c_rr, c_ss, c_rs)
    try:
        psi_min_field(out)
    except ValueError as exc:
        raise ValueError("transformed coefficients are not positive definite; check the metrics") from exc
    return out


@dataclass(frozen=True)
class BlockGeometry:
    """Everything geometric a block needs for assembly."""

    metrics: MetricTerms
    surface: SurfaceGeometry
    coeffs: Coefficients2D
    extra: dict = field(default_factory=dict)

    @property
    def J(self) -> np.ndarray:
        return self.metrics.J


def block_geometry(mapping: BlockMapping, N: int, b=None, ops: SbpOperators1D | None = None) -> BlockGeometry:
    m = evaluate_metrics(mapping, N, ops=ops)
    return BlockGeometry(metrics=m, surface=surface_geometry(m), coeffs=transform_coefficients(m, b))
