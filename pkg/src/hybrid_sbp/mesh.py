"""Multi-block meshes: block shapes, face connectivity and trace numbering.

Mesh text format (one record per line, ``#`` starts a comment)::

    block B x0 y0 x1 y1 x2 y2 x3 y3
    arc   B k cx cy radius
    iface B+ k+ B- k- {aligned|reversed} [jump]
    bc    B k {D|N}

Block ids are 1-based and must be numbered 1..N_b.  The four corners are the
images of the reference corners (0,0), (1,0), (1,1), (0,1), listed counter
clockwise.  Faces are 1: r=0, 2: r=1, 3: s=0, 4: s=1; an ``arc`` record
replaces the straight edge of face k by the shorter circular arc between its
end corners.  For ``iface`` records the first block is the plus side; the
orientation says whether the two faces run in the same direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import ArcEdge, BlockMapping, LineEdge, transfinite_mapping

__all__ = [
    "BlockSpec",
    "Interface",
    "BoundaryFace",
    "Mesh",
    "TraceNumbering",
    "MeshError",
    "face_corner_indices",
    "load_mesh",
    "parse_mesh",
    "format_mesh",
    "connect_blocks",
    "builtin_mesh",
    "single_block_mesh",
    "two_block_mesh",
    "disk_in_square_mesh",
    "build_trace_numbering",
    "orient_face_vector",
]


class MeshError(ValueError):
    pass


# corner indices (into the CCW corner list) at the start and end of each face
_FACE_CORNERS = {1: (0, 3), 2: (1, 2), 3: (0, 1), 4: (3, 2)}


def face_corner_indices(k: int) -> tuple[int, int]:
    return _FACE_CORNERS[k]


@dataclass(frozen=True)
class BlockSpec:
    corners: tuple[tuple[float, float], ...]
    arcs: dict = field(default_factory=dict)  # face -> (cx, cy, radius)

    def edge(self, k: int):
        a, b = _FACE_CORNERS[k]
        p0, p1 = self.corners[a], self.corners[b]
        if k in self.arcs:
            cx, cy, R = self.arcs[k]
            return ArcEdge.through(p0, p1, (cx, cy), R)
        return LineEdge(p0, p1)

    def mapping(self) -> BlockMapping:
        return transfinite_mapping([self.edge(k) for k in (1, 2, 3, 4)])

    def face_points(self, k: int, t: np.ndarray) -> np.ndarray:
        x, y = self.edge(k).point(t)
        return np.column_stack([x, y])


@dataclass(frozen=True)
class Interface:
    plus_block: int
    plus_face: int
    minus_block: int
    minus_face: int
    reversed: bool = False
    jump: bool = False


@dataclass(frozen=True)
class BoundaryFace:
    block: int
    face: int
    kind: str  # "D" or "N"


@dataclass
class Mesh:
    blocks: list[BlockSpec]
    interfaces: list[Interface]
    boundary: list[BoundaryFace]
    name: str = "mesh"

    def __post_init__(self):
        self.validate()

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def n_interfaces(self) -> int:
        return len(self.interfaces)

    def face_role(self, b: int, k: int):
        """('iface', index, side) or ('bc', kind) for block b face k."""
        return self._roles[(b, k)]

    def validate(self, tol: float = 1e-10) -> None:
        roles = {}
        nb = len(self.blocks)
        for f, itf in enumerate(self.interfaces):
            for side, (b, k) in (("+", (itf.plus_block, itf.plus_face)), ("-", (itf.minus_block, itf.minus_face))):
                self._check_ref(b, k)
                if (b, k) in roles:
                    raise MeshError(f"block {b + 1} face {k} is used more than once")
                roles[(b, k)] = ("iface", f, side)
        for bf in self.boundary:
            self._check_ref(bf.block, bf.face)
            if bf.kind not in ("D", "N"):
                raise MeshError(f"unknown boundary tag {bf.kind!r}; expected D or N")
            if (bf.block, bf.face) in roles:
                raise MeshError(f"block {bf.block + 1} face {bf.face} is used more than once")
            roles[(bf.block, bf.face)] = ("bc", bf.kind)
        missing = [(b + 1, k) for b in range(nb) for k in (1, 2, 3, 4) if (b, k) not in roles]
        if missing:
            raise MeshError(f"untagged block faces (block, face): {missing[:8]}")
        self._roles = roles
        t = np.linspace(0.0, 1.0, 7)
        # orientation: the mapping Jacobian must stay positive on a sample grid
        r, s_ = np.meshgrid(t, t)
        for b, blk in enumerate(self.blocks):
            _, _, xr, xs, yr, ys = blk.mapping().evaluate(r, s_)
            if not np.all(xr * ys - xs * yr > 0):
                raise MeshError(f"block {b + 1} is inverted or self-intersecting (corners must run counter clockwise)")
        for itf in self.interfaces:
            pa = self.blocks[itf.plus_block].face_points(itf.plus_face, t)
            pb = self.blocks[itf.minus_block].face_points(itf.minus_face, t)
            if itf.reversed:
                pb = pb[::-1]
            scale = max(1.0, float(np.abs(pa).max()))
            if np.abs(pa - pb).max() > tol * scale:
                raise MeshError(
                    f"nonconforming interface between block {itf.plus_block + 1} face {itf.plus_face} "
                    f"and block {itf.minus_block + 1} face {itf.minus_face}"
                )

    def _check_ref(self, b: int, k: int) -> None:
        if not (0 <= b < len(self.blocks)):
            raise MeshError(f"reference to nonexistent block {b + 1}")
        if k not in (1, 2, 3, 4):
            raise MeshError(f"reference to nonexistent face {k} of block {b + 1}")


def _parse_float(tok: str, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise MeshError(f"line {lineno}: expected a number, got {tok!r}") from None


def _parse_int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise MeshError(f"line {lineno}: expected an integer, got {tok!r}") from None


def parse_mesh(text: str, name: str = "mesh") -> Mesh:
    corners: dict[int, tuple] = {}
    arcs: dict[int, dict] = {}
    ifaces, bcs = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kind, args = tok[0].lower(), tok[1:]
        if kind == "block":
            if len(args) != 9:
                raise MeshError(f"line {lineno}: block needs an id and 8 coordinates")
            b = _parse_int(args[0], lineno)
            v = [_parse_float(a, lineno) for a in args[1:]]
            if b in corners:
                raise MeshError(f"line {lineno}: duplicate block {b}")
            corners[b] = tuple((v[2 * m], v[2 * m + 1]) for m in range(4))
        elif kind == "arc":
            if len(args) != 5:
                raise MeshError(f"line {lineno}: arc needs block, face, cx, cy, radius")
            b, k = _parse_int(args[0], lineno), _parse_int(args[1], lineno)
            arcs.setdefault(b, {})[k] = tuple(_parse_float(a, lineno) for a in args[2:])
        elif kind == "iface":
            if len(args) not in (5, 6):
                raise MeshError(f"line {lineno}: iface needs B+ k+ B- k- orientation [jump]")
            bp, kp, bm, km = (_parse_int(a, lineno) for a in args[:4])
            orient = args[4].lower()
            if orient not in ("aligned", "reversed"):
                raise MeshError(f"line {lineno}: orientation must be 'aligned' or 'reversed'")
            jump = False
            if len(args) == 6:
                if args[5].lower() != "jump":
                    raise MeshError(f"line {lineno}: trailing token must be 'jump'")
                jump = True
            ifaces.append((bp, kp, bm, km, orient == "reversed", jump))
        elif kind == "bc":
            if len(args) != 3:
                raise MeshError(f"line {lineno}: bc needs block, face, and D or N")
            bcs.append((_parse_int(args[0], lineno), _parse_int(args[1], lineno), args[2].upper()))
        else:
            raise MeshError(f"line {lineno}: unknown record type {tok[0]!r}")
    nb = len(corners)
    if sorted(corners) != list(range(1, nb + 1)):
        raise MeshError("block ids must be numbered 1..N_b without gaps")
    for b, d in arcs.items():
        if b not in corners:
            raise MeshError(f"arc refers to nonexistent block {b}")
        for k in d:
            if k not in (1, 2, 3, 4):
                raise MeshError(f"arc refers to nonexistent face {k} of block {b}")
    try:
        blocks = [BlockSpec(corners[b], dict(arcs.get(b, {}))) for b in range(1, nb + 1)]
        interfaces = [Interface(bp - 1, kp, bm - 1, km, rev, jump) for bp, kp, bm, km, rev, jump in ifaces]
        boundary = [BoundaryFace(b - 1, k, t) for b, k, t in bcs]
        return Mesh(blocks, interfaces, boundary, name=name)
    except MeshError:
        raise
    except ValueError as exc:  # geometric errors from the mapping
        raise MeshError(str(exc)) from exc


def load_mesh(path) -> Mesh:
    path = Path(path)
    return parse_mesh(path.read_text(), name=path.stem)


def format_mesh(mesh: Mesh) -> str:
    """Text form of a mesh, readable by :func:`parse_mesh`."""
    out = [f"# {mesh.name}: {mesh.n_blocks} blocks, {mesh.n_interfaces} interfaces"]
    for b, blk in enumerate(mesh.blocks, start=1):
        out.append("block " + str(b) + " " + " ".join(f"{c:.17g}" for pt in blk.corners for c in pt))
        for k, (cx, cy, R) in sorted(blk.arcs.items()):
            out.append(f"arc {b} {k} {cx:.17g} {cy:.17g} {R:.17g}")
    for itf in mesh.interfaces:
        orient = "reversed" if itf.reversed else "aligned"
        tail = " jump" if itf.jump else ""
        out.append(f"iface {itf.plus_block + 1} {itf.plus_face} {itf.minus_block + 1} {itf.minus_face} {orient}{tail}")
    for bf in mesh.boundary:
        out.append(f"bc {bf.block + 1} {bf.face} {bf.kind}")
    return "\n".join(out) + "\n"


def connect_blocks(blocks: list[BlockSpec], bc_kind, jump=None, name: str = "mesh", tol: float = 1e-9) -> Mesh:
    """Build connectivity by matching face end points.

    ``bc_kind(midpoint) -> 'D' | 'N'`` tags unmatched faces.  ``jump(b0, b1)``
    returns None for a locked face, or the plus-side block for a jump face.
    Locked faces take the lower block index as plus side.
    """
    keyed = {}

    def key(p):
        return (int(round(p[0] / tol)), int(round(p[1] / tol)))

    ends = {}
    for b, blk in enumerate(blocks):
        for k in (1, 2, 3, 4):
            a, c = _FACE_CORNERS[k]
            p0, p1 = blk.corners[a], blk.corners[c]
            mid = blk.face_points(k, np.array([0.5]))[0]
            ends[(b, k)] = (p0, p1, mid)
            kk = frozenset([key(p0), key(p1)]) | frozenset([("m",) + key(mid)])
            keyed.setdefault(kk, []).append((b, k))
    interfaces, boundary = [], []
    for group in keyed.values():
        if len(group) > 2:
            raise MeshError(f"more than two blocks share a face: {group}")
        if len(group) == 1:
            b, k = group[0]
            boundary.append(BoundaryFace(b, k, bc_kind(ends[(b, k)][2])))
            continue
        (b0, k0), (b1, k1) = sorted(group)
        plus = b0
        is_jump = False
        if jump is not None:
            j = jump(b0, b1)
            if j is not None:
                is_jump, plus = True, j
        if plus == b1:
            (b0, k0), (b1, k1) = (b1, k1), (b0, k0)
        p0 = ends[(b0, k0)][0]
        q0 = ends[(b1, k1)][0]
        rev = math.hypot(p0[0] - q0[0], p0[1] - q0[1]) > tol
        interfaces.append(Interface(b0, k0, b1, k1, rev, is_jump))
    interfaces.sort(key=lambda i: (i.plus_block, i.plus_face))
    boundary.sort(key=lambda f: (f.block, f.face))
    return Mesh(list(blocks), interfaces, boundary, name=name)


def single_block_mesh(kind: str = "D") -> Mesh:
    blk = BlockSpec(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))
    return Mesh([blk], [], [BoundaryFace(0, k, kind) for k in (1, 2, 3, 4)], name="single")


def two_block_mesh() -> Mesh:
    """Unit squares [0,1]x[0,1] and [1,2]x[0,1], locked interface, Dirichlet outside."""
    b0 = BlockSpec(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))
    b1 = BlockSpec(((1.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0)))
    return connect_blocks([b0, b1], lambda m: "D", name="two-block")


def _polar(R, deg):
    t = math.radians(deg)
    return (R * math.cos(t), R * math.sin(t))


def disk_in_square_mesh(
    core: float = 0.4, octagon_axis: float = 1.6, octagon_diag: float = 1.4, half_width: float = 2.0
) -> Mesh:
    """56-block decomposition of ``[-w, w]^2`` with the unit disk as a subdomain.

    Layout, from the inside out:

    * 4 Cartesian blocks covering the core square ``[-a, a]^2``;
    * 8 ring blocks joining the core boundary to the unit circle, one per
      45 degree arc (the disk ends here);
    * 16 blocks between the circle and an octagon with vertices at 45k degrees
      (``(octagon_axis, 0)`` on the axes and ``(octagon_diag, octagon_diag)`` on
      the diagonals, and their images), each octagon side split in thirds: 8 blocks
      carry a circle arc and the middle third of a side, 8 kite blocks sit at
      the octagon vertices and touch the circle in a single point;
    * 28 blocks between the octagon and the square: 24 join a third of an
      octagon side to one of the 8 boundary segments per square side, and 4
      join an octagon vertex to a square corner.

    The 8 circle arcs are jump interfaces whose plus side is the disk block.
    Left and right sides are Dirichlet, top and bottom Neumann.
    """
    a, w = float(core), float(half_width)
    if not (1.0 < octagon_diag < w and octagon_diag < octagon_axis < w and 0 < a < 1 / math.sqrt(2)):
        raise ValueError("disk mesh parameters must satisfy 0 < core < 1/sqrt(2) and 1 < diag < axis < half_width")
    blocks: list[BlockSpec] = []
    disk_ids = set()

    # core: 2 x 2 Cartesian blocks
    xs = (-a, 0.0, a)
    for j in range(2):
        for i in range(2):
            blocks.append(BlockSpec(((xs[i], xs[j]), (xs[i + 1], xs[j]), (xs[i + 1], xs[j + 1]), (xs[i], xs[j + 1]))))
            disk_ids.add(len(blocks) - 1)

    # core boundary points at angles 45k
    def core_pt(k):
        d = math.radians(45 * k)
        c, s = math.cos(d), math.sin(d)
        m = max(abs(c), abs(s))
        return (a * c / m if abs(c) > 1e-14 else 0.0, a * s / m if abs(s) > 1e-14 else 0.0)

    circ = [_polar(1.0, 45 * k) for k in range(8)]
    # ring blocks: r along the radial direction, s along the arc
    for k in range(8):
        k1 = (k + 1) % 8
        blocks.append(BlockSpec((core_pt(k), circ[k], circ[k1], core_pt(k1)), {2: (0.0, 0.0, 1.0)}))
        disk_ids.add(len(blocks) - 1)

    octv = [_polar(octagon_axis if k % 2 == 0 else octagon_diag * math.sqrt(2), 45 * k) for k in range(8)]

    def third(k, m):
        p, q = octv[k % 8], octv[(k + 1) % 8]
        return (p[0] + m / 3 * (q[0] - p[0]), p[1] + m / 3 * (q[1] - p[1]))

    # arc-carrying blocks between circle and octagon
    for k in range(8):
        k1 = (k + 1) % 8
        blocks.append(BlockSpec((circ[k], third(k, 1), third(k, 2), circ[k1]), {1: (0.0, 0.0, 1.0)}))
    # kite blocks at octagon vertices
    for k in range(8):
        blocks.append(BlockSpec((circ[k], third(k - 1, 2), octv[k], third(k, 1))))

    # frame between octagon and square
    oct_pts = []  # 24 octagon points starting at vertex 7 (-45 deg), CCW
    for m in range(24):
        k, t = divmod(m, 3)
        oct_pts.append(third(k - 1, t))
    step = 2 * w / 8
    for side in range(4):
        rot = side * 90.0
        ct, st = math.cos(math.radians(rot)), math.sin(math.radians(rot))

        def R(p):
            return (ct * p[0] - st * p[1], st * p[0] + ct * p[1])

        # right side template: octagon points from -45 to +45 degrees, boundary
        # points (w, -w + step) .. (w, w - step)
        o = [oct_pts[(6 * side + m) % 24] for m in range(7)]
        q = [R((w, -w + (m + 1) * step)) for m in range(7)]
        for m in range(6):
            blocks.append(BlockSpec((o[m], q[m], q[m + 1], o[m + 1])))
        # corner block at the octagon vertex at 45 + 90 side
        corner = R((w, w))
        nxt = R((w - step, w))
        blocks.append(BlockSpec((o[6], q[6], corner, nxt)))

    def bc_kind(mid):
        return "D" if abs(abs(mid[0]) - w) < 1e-9 else "N"

    def jump(b0, b1):
        if (b0 in disk_ids) != (b1 in disk_ids):
            return b0 if b0 in disk_ids else b1
        return None

    mesh = connect_blocks(blocks, bc_kind, jump, name="disk56")
    return mesh


def builtin_mesh(name: str) -> Mesh:
    key = name.split(":", 1)[1] if name.startswith("builtin:") else name
    table = {"single": single_block_mesh, "two-block": two_block_mesh, "disk56": disk_in_square_mesh}
    if key not in table:
        raise MeshError(f"unknown builtin mesh {name!r}; choose from {sorted(table)}")
    return table[key]()


@dataclass(frozen=True)
class TraceNumbering:
    N: int
    n_blocks: int
    n_interfaces: int
    offsets: np.ndarray

    @property
    def n_volume(self) -> int:
        return (self.N + 1) ** 2 * self.n_blocks

    @property
    def n_trace(self) -> int:
        return (self.N + 1) * self.n_interfaces

    def face_slice(self, f: int) -> slice:
        o = int(self.offsets[f])
        return slice(o, o + self.N + 1)

    def face_indices(self, mesh: Mesh, f: int, side: str) -> np.ndarray:
        """Global trace indices seen from one side, in that side's face ordering."""
        idx = np.arange(self.offsets[f], self.offsets[f] + self.N + 1)
        if side == "-" and mesh.interfaces[f].reversed:
            idx = idx[::-1]
        return idx


def build_trace_numbering(mesh: Mesh, N: int) -> TraceNumbering:
    offsets = np.arange(mesh.n_interfaces, dtype=np.int64) * (N + 1)
    return TraceNumbering(N=N, n_blocks=mesh.n_blocks, n_interfaces=mesh.n_interfaces, offsets=offsets)


def orient_face_vector(v, reversed_: bool, n: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if n is not None and v.shape[0] != n:
        raise ValueError(f"face vector length {v.shape[0]} does not match {n}")
    return v[::-1].copy() if reversed_ else v.copy()
