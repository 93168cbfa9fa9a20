"""Independent net checker and brute-force structural oracles.

The checker only trusts the polycube and the exported records.  It rebuilds
the surface adjacency from the cubes, redevelops the attachment tree from
scratch by reflecting squares across shared edges, and compares.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product

from .model import NORMAL_VEC, Polycube


@dataclass
class VerifyReport:
    ok: bool
    checks: dict = field(default_factory=dict)
    first_bad: int | None = None
    message: str = ""

    def to_text(self) -> str:
        lines = [f"{name}: {'ok' if good else 'FAIL'}" for name, good in self.checks.items()]
        lines.append("verdict: " + ("ACCEPT" if self.ok else "REJECT"))
        if not self.ok:
            lines.append(f"first offending cell: {self.first_bad}  ({self.message})")
        return "\n".join(lines) + "\n"


def _faces(cubes) -> dict:
    """(base, normal) for every exposed unit face, computed from the cubes."""
    out = {}
    for c in cubes:
        for normal, v in NORMAL_VEC.items():
            nb = (c[0] + v[0], c[1] + v[1], c[2] + v[2])
            if nb in cubes:
                continue
            base = tuple(c[k] + (1 if v[k] > 0 else 0) for k in range(3))
            out[(base, normal)] = True
    return out


def _corners(base, normal):
    k = "xyz".index(normal[1])
    u, v = [a for a in range(3) if a != k]
    pts = []
    for du, dv in ((0, 0), (1, 0), (1, 1), (0, 1)):  # cyclic order
        p = list(base)
        p[u] += du
        p[v] += dv
        pts.append(tuple(p))
    return pts


def verify_net(polycube: Polycube, records: list[dict]) -> VerifyReport:
    cubes = polycube.cubes
    faces = _faces(cubes)
    checks = {"covers_surface": True, "injective": True, "spanning_tree": True,
              "real_adjacency": True, "exact_development": True, "cuts_on_cell_edges": True}
    bad: list = []

    def flag(name, cell, msg):
        checks[name] = False
        bad.append((cell, msg))

    by_id = {}
    keys = set()
    for rec in records:
        key = (tuple(rec["base"]), rec["normal"])
        if key not in faces:
            flag("covers_surface", rec["id"], "record is not a surface face")
        if key in keys:
            flag("covers_surface", rec["id"], "face listed twice")
        keys.add(key)
        by_id[rec["id"]] = rec
        if not all(isinstance(rec[k], int) for k in ("col", "row")):
            flag("cuts_on_cell_edges", rec["id"], "non-integer position")
    if len(keys) != len(faces):
        flag("covers_surface", None, f"{len(faces) - len(keys & set(faces))} faces missing")
    if checks["cuts_on_cell_edges"]:
        pos = {}
        for rec in records:
            at = (rec["col"], rec["row"])
            if at in pos:
                flag("injective", rec["id"], f"overlaps cell {pos[at]}")
            pos[at] = rec["id"]

    roots = [r for r in records if r["parent"] is None]
    children: dict = {}
    for rec in records:
        if rec["parent"] is not None:
            if rec["parent"] not in by_id:
                flag("spanning_tree", rec["id"], "unknown parent")
                continue
            children.setdefault(rec["parent"], []).append(rec["id"])
    if len(roots) != 1:
        flag("spanning_tree", None, f"{len(roots)} roots")
        return _finish(checks, bad)
    root = roots[0]
    order = []
    seen = {root["id"]}
    todo = deque([root["id"]])
    while todo:
        c = todo.popleft()
        order.append(c)
        for k in sorted(children.get(c, ())):
            if k in seen:
                flag("spanning_tree", k, "cycle")
                continue
            seen.add(k)
            todo.append(k)
    if len(order) != len(records):
        missing = sorted(set(by_id) - seen)
        flag("spanning_tree", missing[0] if missing else None, "tree does not reach every cell")

    # adjacency: parent and child share a real unit edge of the surface
    corners = {cid: _corners(tuple(r["base"]), r["normal"]) for cid, r in by_id.items()}
    for cid in order[1:]:
        rec = by_id[cid]
        shared = set(corners[cid]) & set(corners[rec["parent"]])
        if len(shared) != 2 or not _is_edge(shared) or not _surface_adjacent(cubes, by_id[cid], by_id[rec["parent"]], shared):
            flag("real_adjacency", cid, "parent is not an adjacent surface cell")
        elif rec.get("edge") is not None:
            p, ax = rec["edge"]
            q = list(p)
            q[ax] += 1
            if {tuple(p), tuple(q)} != shared:
                flag("real_adjacency", cid, "recorded edge differs from the shared edge")
    if not checks["real_adjacency"] or not checks["spanning_tree"]:
        return _finish(checks, bad)

    # development under each of the 8 orientations of the root square
    best = None
    for perm in _d4():
        first = _develop(order, by_id, corners, root, perm)
        if first is None:
            best = None
            break
        if best is None or _bfs_rank(order, first) > _bfs_rank(order, best):
            best = first
    if best is not None:
        flag("exact_development", best, "position differs from the development of the tree")
    return _finish(checks, bad, order)


def _finish(checks, bad, order=None) -> VerifyReport:
    ok = all(checks.values())
    if ok:
        return VerifyReport(True, checks)
    if order:
        rank = {c: k for k, c in enumerate(order)}
        bad.sort(key=lambda t: rank.get(t[0], -1) if t[0] is not None else -1)
    cell, msg = bad[0]
    return VerifyReport(False, checks, cell, msg)


def _bfs_rank(order, cell):
    return order.index(cell)


def _is_edge(points) -> bool:
    a, b = sorted(points)
    return sum(abs(x - y) for x, y in zip(a, b)) == 1


def _surface_adjacent(cubes, ra, rb, shared) -> bool:
    """Faces sharing an edge are neighbours on the surface.

    Around an edge with two diagonal cubes four faces meet; there only faces
    of the same cube count as neighbours.
    """
    a, _ = sorted(shared)
    ax = [k for k in range(3) if a[k] != _[k]][0]
    u, v = [k for k in range(3) if k != ax]
    around = []
    for du, dv in product((-1, 0), repeat=2):
        c = list(a)
        c[u] += du
        c[v] += dv
        around.append(tuple(c) in cubes)
    # order: (-1,-1), (-1,0), (0,-1), (0,0)
    diagonal = sum(around) == 2 and around[0] == around[3]
    if not diagonal:
        return True
    return _cube_of(ra) == _cube_of(rb)


def _cube_of(rec):
    v = NORMAL_VEC[rec["normal"]]
    return tuple(b - (1 if d > 0 else 0) for b, d in zip(rec["base"], v))


def _d4():
    for sx, sy, swap in product((1, -1), (1, -1), (False, True)):
        yield (sx, sy, swap)


def _develop(order, by_id, corners, root, perm):
    """Return the first cell whose recorded position disagrees, or None."""
    sx, sy, swap = perm
    square = [(0, 0), (1, 0), (1, 1), (0, 1)]
    img = {}
    pts = []
    for x, y in square:
        x, y = (y, x) if swap else (x, y)
        pts.append((x * sx, y * sy))
    mx = min(p[0] for p in pts)
    my = min(p[1] for p in pts)
    rc = corners[root["id"]]
    img[root["id"]] = {rc[k]: (pts[k][0] - mx + root["col"], pts[k][1] - my + root["row"]) for k in range(4)}
    for cid in order[1:]:
        rec = by_id[cid]
        par = img[rec["parent"]]
        mine = corners[cid]
        shared = set(mine) & set(par)
        m = {}
        for p in shared:
            m[p] = par[p]
        pc = corners[rec["parent"]]
        for k, p in enumerate(mine):
            if p in shared:
                continue
            # neighbour of p along the square that lies on the shared edge
            e = mine[(k + 1) % 4] if mine[(k + 1) % 4] in shared else mine[(k - 1) % 4]
            # parent's corner adjacent to e that is not on the shared edge
            j = pc.index(e)
            f = pc[(j + 1) % 4] if pc[(j + 1) % 4] not in shared else pc[(j - 1) % 4]
            ex, ey = par[e]
            fx, fy = par[f]
            m[p] = (2 * ex - fx, 2 * ey - fy)
        img[cid] = m
        col = min(x for x, _ in m.values())
        row = min(y for _, y in m.values())
        if (col, row) != (rec["col"], rec["row"]):
            return cid
    return None


# --- brute-force structural oracles --------------------------------------

def _footprints(p: Polycube) -> dict[int, frozenset]:
    return {i: p.layer(i) for i in range(1, p.num_layers + 1)}


def _runs(cells, axis):
    """Maximal straight runs of 2D cells along ``axis`` (0: x, 1: y)."""
    cells = set(cells)
    out = []
    for c in sorted(cells):
        prev = (c[0] - 1, c[1]) if axis == 0 else (c[0], c[1] - 1)
        if prev in cells:
            continue
        run = [c]
        while True:
            nxt = (run[-1][0] + 1, run[-1][1]) if axis == 0 else (run[-1][0], run[-1][1] + 1)
            if nxt not in cells:
                break
            run.append(nxt)
        out.append(run)
    return out


def _components(cells):
    cells = set(cells)
    out = []
    while cells:
        start = cells.pop()
        comp = {start}
        todo = [start]
        while todo:
            x, y = todo.pop()
            for n in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                if n in cells:
                    cells.discard(n)
                    comp.add(n)
                    todo.append(n)
        out.append(comp)
    return out


def _plane_faces(p: Polycube):
    """Yield (plane, kind, cells, lower, upper) for every horizontal face."""
    fp = _footprints(p)
    m = p.num_layers
    empty = frozenset()
    for plane in range(0, m + 1):
        below = fp.get(plane, empty)
        above = fp.get(plane + 1, empty)
        for kind, region in (("top", below - above), ("bottom", above - below)):
            for comp in _components(region):
                yield plane, kind, comp, below, above


def check_lemma1(p: Polycube) -> list[str]:
    """Every inner face touches the band below and the band above its plane."""
    out = []
    m = p.num_layers
    for plane, kind, comp, below, above in _plane_faces(p):
        if plane in (0, m):
            continue
        own = below if kind == "top" else above
        other = above if kind == "top" else below
        touch_own = touch_other = False
        for x, y in comp:
            for n in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                if n not in own:
                    touch_own = True
                if n in other:
                    touch_other = True
        if not (touch_own and touch_other):
            out.append(f"plane {plane} {kind} face at {min(comp)} misses a band")
    return out


def _edge_labels(comp, own, other):
    """Boundary edges of a face, labelled 'own'/'other' by the band across them."""
    labels = {}
    for x, y in comp:
        for (dx, dy), edge in (((1, 0), ((x + 1, y), 1)), ((-1, 0), ((x, y), 1)),
                               ((0, 1), ((x, y + 1), 0)), ((0, -1), ((x, y), 0))):
            n = (x + dx, y + dy)
            if n in comp:
                continue
            labels[edge] = "other" if n in other else "own"
    return labels


def check_lemma2(p: Polycube) -> list[str]:
    """Inner face boundaries split into one arc per band, and some beam spans both bands."""
    out = []
    m = p.num_layers
    for plane, kind, comp, below, above in _plane_faces(p):
        if plane in (0, m):
            continue
        own = below if kind == "top" else above
        other = above if kind == "top" else below
        labels = _edge_labels(comp, own, other)
        for lab in ("own", "other"):
            edges = [e for e, v in labels.items() if v == lab]
            if not edges or not _edges_connected(edges):
                out.append(f"plane {plane} {kind} face at {min(comp)}: '{lab}' boundary not contiguous")
        spans = False
        for axis in (0, 1):
            for run in _runs(comp, axis):
                lo, hi = run[0], run[-1]
                a = (lo[0] - 1, lo[1]) if axis == 0 else (lo[0], lo[1] - 1)
                b = (hi[0] + 1, hi[1]) if axis == 0 else (hi[0], hi[1] + 1)
                ends = {a in other, b in other}
                if ends == {True, False}:
                    spans = True
        if not spans:
            out.append(f"plane {plane} {kind} face at {min(comp)}: no beam joins the two bands")
    return out


def _edges_connected(edges) -> bool:
    pts = {}
    for k, ((x, y), ax) in enumerate(edges):
        q = (x + 1, y) if ax == 0 else (x, y + 1)
        for pt in ((x, y), q):
            pts.setdefault(pt, []).append(k)
    seen = {0}
    todo = [0]
    while todo:
        k = todo.pop()
        (x, y), ax = edges[k]
        q = (x + 1, y) if ax == 0 else (x, y + 1)
        for pt in ((x, y), q):
            for j in pts[pt]:
                if j not in seen:
                    seen.add(j)
                    todo.append(j)
    return len(seen) == len(edges)


def check_lemma4(p: Polycube) -> list[str]:
    """Every beam on the top or bottom of a layer ends on that layer's band at least once."""
    out = []
    fp = _footprints(p)
    empty = frozenset()
    for i in range(1, p.num_layers + 1):
        own = fp[i]
        for region, other in ((own - fp.get(i + 1, empty), fp.get(i + 1, empty)),
                              (own - fp.get(i - 1, empty), fp.get(i - 1, empty))):
            for axis in (0, 1):
                for run in _runs(region, axis):
                    lo, hi = run[0], run[-1]
                    a = (lo[0] - 1, lo[1]) if axis == 0 else (lo[0], lo[1] - 1)
                    b = (hi[0] + 1, hi[1]) if axis == 0 else (hi[0], hi[1] + 1)
                    if a not in own or b not in own:
                        continue
                    out.append(f"layer {i}: beam at {lo} has no anchor on the band of layer {i}")
    return out


def oracle_suite(p: Polycube, result=None) -> dict:
    """All structural oracles; mapping name -> violations (empty lists when fine)."""
    from .bandgraph import BandGraph, lemma_oracles
    from .model import extract_surface

    out = {"lemma1": check_lemma1(p), "lemma2": check_lemma2(p), "lemma4": check_lemma4(p)}
    if result is None:
        s = extract_surface(p)
        bg = BandGraph(s)
        sels = bg.select_all()
    else:
        bg, sels = result.graph, result.selections
    out.update(lemma_oracles(bg, sels))
    return out
