"""Polycube solids, their boundary surface, and precondition checks.

A polycube is a set of integer unit cubes.  Its boundary is indexed as unit
square cells; all later stages work on these cells and on the edge
adjacency between them.
"""
from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

NORMALS = ("+x", "-x", "+y", "-y", "+z", "-z")
NORMAL_VEC = {
    "+x": (1, 0, 0), "-x": (-1, 0, 0),
    "+y": (0, 1, 0), "-y": (0, -1, 0),
    "+z": (0, 0, 1), "-z": (0, 0, -1),
}
_AXIS = {"x": 0, "y": 1, "z": 2}


class ParseError(ValueError):
    pass


class ValidationError(ValueError):
    """Input polycube does not satisfy the unfolding preconditions."""

    def __init__(self, report: "ValidationReport"):
        super().__init__("invalid polycube: " + "; ".join(report.failures))
        self.report = report


class ManifoldError(ValueError):
    pass


class InternalInvariantViolation(RuntimeError):
    """A property the algorithm relies on failed; carries a diagnostic dump."""

    def __init__(self, message: str, dump: dict | None = None):
        super().__init__(message)
        self.dump = dump or {}


def normal_axis(normal: str) -> int:
    return _AXIS[normal[1]]


def normal_sign(normal: str) -> int:
    return 1 if normal[0] == "+" else -1


@dataclass(frozen=True)
class Polycube:
    cubes: frozenset

    def __post_init__(self):
        if not self.cubes:
            raise ParseError("empty model")

    @classmethod
    def from_cubes(cls, cubes: Iterable[tuple[int, int, int]]) -> "Polycube":
        cubes = [tuple(int(v) for v in c) for c in cubes]
        if not cubes:
            raise ParseError("empty model")
        mx = min(c[0] for c in cubes)
        my = min(c[1] for c in cubes)
        mz = min(c[2] for c in cubes)
        return cls(frozenset((x - mx, y - my, z - mz) for x, y, z in cubes))

    @property
    def zmin(self) -> int:
        return 1

    @property
    def zmax(self) -> int:
        return max(c[2] for c in self.cubes) + 1

    @property
    def num_layers(self) -> int:
        return self.zmax

    def layer(self, i: int) -> frozenset:
        """Cube columns (x, y) of layer ``i`` (1-based)."""
        return frozenset((x, y) for x, y, z in self.cubes if z == i - 1)

    def to_text(self) -> str:
        lines = [f"{x} {y} {z}" for x, y, z in sorted(self.cubes, key=lambda c: (c[2], c[1], c[0]))]
        return "\n".join(lines) + "\n"


def load_voxels(text: str) -> Polycube:
    """Parse either ``x y z`` lines or layered ``#``/``.`` blocks."""
    if _is_coordinate_text(text):
        cubes = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ParseError(f"line {lineno}: expected 3 integers, got {line!r}")
            try:
                cubes.append(tuple(int(p) for p in parts))
            except ValueError:
                raise ParseError(f"line {lineno}: non-integer field in {line!r}") from None
        return Polycube.from_cubes(cubes)
    return _parse_blocks(text.splitlines())


def _is_coordinate_text(text: str) -> bool:
    for raw in text.splitlines():
        s = raw.strip()
        if not s:
            continue
        # a block row consists only of '#' and '.'
        if set(s) <= {"#", "."}:
            return False
        return True
    return True


def _parse_blocks(lines: list[str]) -> Polycube:
    blocks: list[list[str]] = []
    cur: list[str] = []
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            if cur:
                blocks.append(cur)
                cur = []
            continue
        if not set(line.strip()) <= {"#", "."}:
            raise ParseError(f"line {lineno}: unexpected character in block row {line!r}")
        cur.append(line.strip())
    if cur:
        blocks.append(cur)
    cubes = []
    for z, block in enumerate(blocks):
        for y, row in enumerate(block):
            for x, ch in enumerate(row):
                if ch == "#":
                    cubes.append((x, y, z))
    return Polycube.from_cubes(cubes)


@dataclass(frozen=True)
class SurfaceCell:
    id: int
    base: tuple[int, int, int]
    normal: str
    kind: str  # "band" | "top" | "bottom"

    @property
    def axis(self) -> int:
        return _AXIS[self.normal[1]]

    @property
    def is_band(self) -> bool:
        return self.kind == "band"

    @property
    def layer(self) -> int:
        """Band cells: 1-based layer index.  Horizontal cells: plane index."""
        return self.base[2] + 1 if self.kind == "band" else self.base[2]

    @property
    def in_plane_axes(self) -> tuple[int, int]:
        return _PLANE[_AXIS[self.normal[1]]]

    def corners(self) -> tuple:
        u, v = self.in_plane_axes
        b = self.base
        eu = _unit(u)
        ev = _unit(v)
        return (b, _add(b, eu), _add(b, ev), _add(_add(b, eu), ev))

    @cached_property
    def _edges(self) -> tuple:
        u, v = self.in_plane_axes
        b = self.base
        return ((b, u), (b, v), (_add(b, _UNITS[v]), u), (_add(b, _UNITS[u]), v))

    def edges(self) -> tuple:
        """Four edge keys ``(point, axis)``: the unit edge from point along axis."""
        return self._edges

    def normal_vec2(self) -> tuple[int, int]:
        v = NORMAL_VEC[self.normal]
        return (v[0], v[1])

    def center2(self) -> tuple[int, int, int]:
        """Twice the center point (integer)."""
        u, v = self.in_plane_axes
        c = [2 * t for t in self.base]
        c[u] += 1
        c[v] += 1
        return tuple(c)

    def label(self) -> str:
        return f"{self.id}:{self.normal}@{self.base[0]},{self.base[1]},{self.base[2]}"


_UNITS = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
_PLANE = {0: (1, 2), 1: (0, 2), 2: (0, 1)}


def _unit(axis: int) -> tuple[int, int, int]:
    return _UNITS[axis]


def _add(p, q):
    return (p[0] + q[0], p[1] + q[1], p[2] + q[2])


def edge_points(edge) -> tuple:
    p, a = edge
    return p, _add(p, _unit(a))


def _boundary_faces(cubes: frozenset) -> list[tuple[tuple[int, int, int], str]]:
    faces = []
    for c in cubes:
        x, y, z = c
        for n in NORMALS:
            d = NORMAL_VEC[n]
            if (x + d[0], y + d[1], z + d[2]) in cubes:
                continue
            base = (x + max(d[0], 0), y + max(d[1], 0), z + max(d[2], 0))
            faces.append((base, n))
    return faces


def _kind(normal: str) -> str:
    if normal == "+z":
        return "top"
    if normal == "-z":
        return "bottom"
    return "band"


@dataclass
class Surface:
    polycube: Polycube
    cells: list[SurfaceCell]
    neighbors: list[dict]  # cell id -> {edge key: neighbor id}
    index: dict  # (base, normal) -> id
    V: int
    E: int
    F: int
    bands: dict = field(default_factory=dict)  # layer -> list of band cell ids in ccw order
    band_pos: dict = field(default_factory=dict)  # band cell id -> position in its ccw cycle

    @property
    def euler(self) -> int:
        return self.V - self.E + self.F

    @property
    def num_layers(self) -> int:
        return self.polycube.num_layers

    def cell(self, cid: int) -> SurfaceCell:
        return self.cells[cid]

    def neighbor(self, cid: int, edge) -> int:
        return self.neighbors[cid][edge]

    def shared_edge(self, a: int, b: int):
        for e, n in self.neighbors[a].items():
            if n == b:
                return e
        return None

    def cells_of_kind(self, kind: str) -> list[int]:
        return [c.id for c in self.cells if c.kind == kind]

    def top_edge(self, cid: int):
        c = self.cells[cid]
        h = c.in_plane_axes[0]
        b = c.base
        return ((b[0], b[1], b[2] + 1), h)

    def bottom_edge(self, cid: int):
        c = self.cells[cid]
        return (c.base, c.in_plane_axes[0])

    def ccw_next(self, cid: int) -> int:
        band = self.bands[self.cells[cid].layer]
        return band[(self.band_pos[cid] + 1) % len(band)]

    def ccw_prev(self, cid: int) -> int:
        band = self.bands[self.cells[cid].layer]
        return band[(self.band_pos[cid] - 1) % len(band)]


def ccw_tangent(normal: str) -> tuple[int, int]:
    """Direction of a ccw walk (seen from +z) along a band cell with this normal."""
    nx, ny, _ = NORMAL_VEC[normal]
    return (-ny, nx)


def extract_surface(p: Polycube) -> Surface:
    faces = sorted(_boundary_faces(p.cubes), key=lambda f: (f[0][2], f[0][1], f[0][0], NORMALS.index(f[1])))
    cells = [SurfaceCell(i, b, n, _kind(n)) for i, (b, n) in enumerate(faces)]
    index = {(c.base, c.normal): c.id for c in cells}
    by_edge: dict = defaultdict(list)
    verts = set()
    for c in cells:
        for e in c.edges():
            by_edge[e].append(c.id)
        verts.update(c.corners())
    bad = [e for e, cs in by_edge.items() if len(cs) != 2]
    if bad:
        raise ManifoldError(f"{len(bad)} surface edges not shared by exactly two cells, e.g. {bad[0]}")
    neighbors: list[dict] = [dict() for _ in cells]
    for e, (a, b) in by_edge.items():
        neighbors[a][e] = b
        neighbors[b][e] = a
    s = Surface(p, cells, neighbors, index, len(verts), len(by_edge), len(cells))
    _build_bands(s)
    return s


def _build_bands(s: Surface) -> None:
    by_layer: dict = defaultdict(list)
    for c in s.cells:
        if c.kind == "band":
            by_layer[c.layer].append(c.id)
    for layer, ids in sorted(by_layer.items()):
        start = min(ids)
        order = [start]
        cur = start
        while True:
            nxt = _ccw_successor(s, cur)
            if nxt == start:
                break
            if len(order) > len(ids):
                raise ManifoldError(f"band of layer {layer} is not a simple cycle")
            order.append(nxt)
            cur = nxt
        if len(order) != len(ids):
            raise ManifoldError(f"band of layer {layer} is not a single cycle")
        s.bands[layer] = order
        for k, cid in enumerate(order):
            s.band_pos[cid] = k


_CCW_END = {"+x": (0, 1), "-x": (0, 0), "+y": (0, 0), "-y": (1, 0)}


def _ccw_successor(s: Surface, cid: int) -> int:
    c = s.cells[cid]
    bx, by, bz = c.base
    dx, dy = _CCW_END[c.normal]
    return s.neighbors[cid][((bx + dx, by + dy, bz), 2)]


# --- validation -----------------------------------------------------------


def is_connected_2d(cells: Iterable[tuple[int, int]]) -> bool:
    cells = set(cells)
    if not cells:
        return False
    start = next(iter(cells))
    seen = {start}
    todo = [start]
    while todo:
        x, y = todo.pop()
        for q in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if q in cells and q not in seen:
                seen.add(q)
                todo.append(q)
    return len(seen) == len(cells)


def is_orthogonally_convex(cells: Iterable[tuple[int, int]]) -> bool:
    """Every row and every column meets the set in one contiguous run (or not at all)."""
    rows: dict = defaultdict(list)
    cols: dict = defaultdict(list)
    for x, y in cells:
        rows[y].append(x)
        cols[x].append(y)
    for group in (rows, cols):
        for vals in group.values():
            if max(vals) - min(vals) + 1 != len(vals):
                return False
    return True


@dataclass
class ValidationReport:
    face_connected: bool
    edge_manifold: bool
    vertex_manifold: bool
    euler_ok: bool
    layers_connected: bool
    layers_orthoconvex: bool
    V: int
    E: int
    F: int
    failures: list[str] = field(default_factory=list)

    @property
    def chi(self) -> int:
        return self.V - self.E + self.F

    @property
    def ok(self) -> bool:
        return all((self.face_connected, self.edge_manifold, self.vertex_manifold,
                    self.euler_ok, self.layers_connected, self.layers_orthoconvex))

    def flags(self) -> dict:
        return {
            "face_connected": self.face_connected,
            "edge_manifold": self.edge_manifold,
            "vertex_manifold": self.vertex_manifold,
            "euler_ok": self.euler_ok,
            "layers_connected": self.layers_connected,
            "layers_orthoconvex": self.layers_orthoconvex,
        }

    def to_text(self) -> str:
        lines = [f"{k}: {'pass' if v else 'FAIL'}" for k, v in self.flags().items()]
        lines.append(f"V={self.V} E={self.E} F={self.F} chi={self.chi}")
        lines.extend(f"failure: {f}" for f in self.failures)
        lines.append("valid" if self.ok else "invalid")
        return "\n".join(lines) + "\n"


_OCTANTS = tuple((dx, dy, dz) for dx in (0, 1) for dy in (0, 1) for dz in (0, 1))
_LINK_OK: dict = {}


def _link_connected(v, cs, face_edges, by_edge) -> bool:
    """Cells around ``v`` joined when they share an edge through ``v``: one piece?"""
    cs_set = set(cs)
    adj: dict = defaultdict(set)
    for k in cs:
        for e in face_edges[k]:
            if v == e[0] or v == _add(e[0], _UNITS[e[1]]):
                for other in by_edge[e]:
                    if other != k and other in cs_set:
                        adj[k].add(other)
    reach = {cs[0]}
    todo = [cs[0]]
    while todo:
        k = todo.pop()
        for o in adj[k]:
            if o not in reach:
                reach.add(o)
                todo.append(o)
    return len(reach) == len(cs_set)


def validate(p: Polycube) -> ValidationReport:
    cubes = p.cubes
    failures = []

    start = next(iter(cubes))
    seen = {start}
    todo = [start]
    while todo:
        x, y, z = todo.pop()
        for d in NORMAL_VEC.values():
            q = (x + d[0], y + d[1], z + d[2])
            if q in cubes and q not in seen:
                seen.add(q)
                todo.append(q)
    face_connected = len(seen) == len(cubes)
    if not face_connected:
        failures.append(f"not face-connected ({len(seen)} of {len(cubes)} cubes reachable)")

    faces = _boundary_faces(cubes)
    by_edge: dict = defaultdict(list)
    by_vertex: dict = defaultdict(list)
    face_edges = []
    for k, (b, n) in enumerate(faces):
        u, v = _PLANE[_AXIS[n[1]]]
        bu, bv = _add(b, _UNITS[u]), _add(b, _UNITS[v])
        es = ((b, u), (b, v), (bv, u), (bu, v))
        for e in es:
            by_edge[e].append(k)
        for q in (b, bu, bv, _add(bu, _UNITS[v])):
            by_vertex[q].append(k)
        face_edges.append(es)
    bad_edges = [e for e, cs in by_edge.items() if len(cs) != 2]
    edge_manifold = not bad_edges
    if not edge_manifold:
        failures.append(f"{len(bad_edges)} edges shared by {len(by_edge[bad_edges[0]])} cells, e.g. {bad_edges[0]}")

    vertex_manifold = True
    bad_vertex = None
    for v, cs in by_vertex.items():
        if len(cs) < 6:
            continue  # a split link needs two cycles of at least three faces
        # the link only depends on which of the 8 cubes around v are filled
        pattern = tuple((v[0] - dx, v[1] - dy, v[2] - dz) in cubes for dx, dy, dz in _OCTANTS)
        ok = _LINK_OK.get(pattern)
        if ok is None:
            ok = _LINK_OK[pattern] = _link_connected(v, cs, face_edges, by_edge)
        if not ok:
            vertex_manifold = False
            bad_vertex = v
            break
    if not vertex_manifold:
        failures.append(f"vertex {bad_vertex} has no disc neighborhood")

    V = len(by_vertex)
    E = len(by_edge)
    F = len(faces)
    euler_ok = V - E + F == 2
    if not euler_ok:
        failures.append(f"Euler characteristic {V - E + F} != 2")

    layers_connected = True
    layers_orthoconvex = True
    for i in range(1, p.num_layers + 1):
        cols = p.layer(i)
        if not is_connected_2d(cols):
            layers_connected = False
            failures.append(f"layer {i} is not connected")
        if not cols or not is_orthogonally_convex(cols):
            layers_orthoconvex = False
            failures.append(f"layer {i} is not orthogonally convex")

    return ValidationReport(face_connected, edge_manifold, vertex_manifold, euler_ok,
                            layers_connected, layers_orthoconvex, V, E, F, failures)


def opposite_cell(s: Surface, a: int) -> int | None:
    """Band cell of the same layer facing ``a`` across the layer interior."""
    c = s.cells[a]
    if c.kind != "band":
        raise ValueError(f"cell {c.label()} is not a band cell")
    k = c.axis
    h = c.in_plane_axes[0]
    z = c.base[2]
    cols = s.polycube.layer(z + 1)
    line = sorted(q[k] for q in cols if q[h] == c.base[h])
    if not line:
        return None
    opp_base = list(c.base)
    if c.normal[0] == "+":
        opp_base[k] = line[0]
        opp = "-" + c.normal[1]
    else:
        opp_base[k] = line[-1] + 1
        opp = "+" + c.normal[1]
    return s.index.get((tuple(opp_base), opp))
