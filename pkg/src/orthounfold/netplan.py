"""The unfolding net: exact integer placements, glue graph, relocation and cut-and-shift.

Every cell is placed by an integer affine map from its own unit square to
the plane.  A cell is only ever positioned by developing it across a
shared surface edge from an already placed cell, so the net is a true
development by construction; the helpers here decide nothing about
*which* edges to use.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

from .model import InternalInvariantViolation, Surface


class OverlapError(InternalInvariantViolation):
    pass


@dataclass(frozen=True)
class Placement:
    origin: tuple[int, int]  # image of the cell's base corner
    U: tuple[int, int]  # image of a unit step along in_plane_axes[0]
    V: tuple[int, int]  # ... along in_plane_axes[1]

    def translated(self, dx: int, dy: int) -> "Placement":
        return Placement((self.origin[0] + dx, self.origin[1] + dy), self.U, self.V)


def _sq_pos(pl: Placement) -> tuple[int, int]:
    ox, oy = pl.origin
    xs = (ox, ox + pl.U[0], ox + pl.V[0], ox + pl.U[0] + pl.V[0])
    ys = (oy, oy + pl.U[1], oy + pl.V[1], oy + pl.U[1] + pl.V[1])
    return (min(xs), min(ys))


class UnfoldingNet:
    def __init__(self, surface: Surface):
        self.s = surface
        self.place: dict[int, Placement] = {}
        self.pos: dict[int, tuple[int, int]] = {}
        self.occ: dict[tuple[int, int], int] = {}
        self.glue: dict[int, set[int]] = {}
        self.root: int | None = None
        self.relocated: set[int] = set()

    # --- geometry --------------------------------------------------------

    def image(self, cid: int, p, pl: Placement | None = None) -> tuple[int, int]:
        pl = pl or self.place[cid]
        c = self.s.cells[cid]
        u, v = c.in_plane_axes
        base = c.base
        du = p[u] - base[u]
        dv = p[v] - base[v]
        (ox, oy), (ux, uy), (vx, vy) = pl.origin, pl.U, pl.V
        return (ox + du * ux + dv * vx, oy + du * uy + dv * vy)

    def edge_image(self, cid: int, edge, pl: Placement | None = None) -> frozenset:
        p, ax = edge
        q = list(p)
        q[ax] += 1
        return frozenset((self.image(cid, p, pl), self.image(cid, tuple(q), pl)))

    def develop(self, child: int, parent: int, edge=None, parent_pl: Placement | None = None) -> Placement:
        """Placement of ``child`` unfolded across its shared edge with ``parent``."""
        s = self.s
        if edge is None:
            edge = s.shared_edge(child, parent)
        pp = parent_pl or self.place[parent]
        cp, cc = s.cells[parent], s.cells[child]
        p, ax = edge
        q = list(p)
        q[ax] += 1
        P = self.image(parent, p, pp)
        Q = self.image(parent, tuple(q), pp)
        kp = cp.in_plane_axes[0] if cp.in_plane_axes[1] == ax else cp.in_plane_axes[1]
        lk = pp.U if cp.in_plane_axes[0] == kp else pp.V
        w = (-lk[0], -lk[1]) if p[kp] == cp.base[kp] else lk
        kc = cc.in_plane_axes[0] if cc.in_plane_axes[1] == ax else cc.in_plane_axes[1]
        sign = 1 if p[kc] == cc.base[kc] else -1
        D = (Q[0] - P[0], Q[1] - P[1])
        n = (sign * w[0], sign * w[1])
        U = D if cc.in_plane_axes[0] == ax else n
        V = D if cc.in_plane_axes[1] == ax else n
        t = cc.base[kc] - p[kc]
        return Placement((P[0] + t * n[0], P[1] + t * n[1]), U, V)

    def root_placement(self, cid: int) -> Placement:
        """Band cell flat on the plane, surface-up is net-up, ccw is net-right, corner at (0, 0)."""
        from .model import ccw_tangent

        c = self.s.cells[cid]
        if c.kind != "band":
            raise ValueError("the root must be a band cell")
        h, _ = c.in_plane_axes
        t = ccw_tangent(c.normal)[h]
        U = (t, 0)
        V = (0, 1)
        origin = (0, 0) if t > 0 else (1, 0)
        return Placement(origin, U, V)

    # --- mutation --------------------------------------------------------

    def _put(self, cid: int, pl: Placement) -> None:
        if cid in self.place:
            raise InternalInvariantViolation(f"cell {cid} placed twice", {"cell": cid})
        at = _sq_pos(pl)
        other = self.occ.get(at)
        if other is not None:
            raise OverlapError(f"cell {self.s.cells[cid].label()} overlaps {self.s.cells[other].label()} at {at}",
                               {"cell": cid, "other": other, "pos": at})
        self.place[cid] = pl
        self.pos[cid] = at
        self.occ[at] = cid
        self.glue.setdefault(cid, set())

    def _link(self, a: int, b: int, check: bool = True) -> None:
        # callers pass check=False when the two images already agree by construction
        if check:
            e = self.s.shared_edge(a, b)
            if self.edge_image(a, e) != self.edge_image(b, e):
                raise InternalInvariantViolation(f"glue {a}-{b} is not consistent in the net", {"a": a, "b": b})
        self.glue[a].add(b)
        self.glue[b].add(a)

    def _unlink(self, a: int, b: int) -> None:
        self.glue[a].discard(b)
        self.glue[b].discard(a)

    def set_root(self, cid: int) -> None:
        self.root = cid
        self._put(cid, self.root_placement(cid))

    def attach(self, child: int, parent: int) -> None:
        self._put(child, self.develop(child, parent))
        self._link(child, parent, check=False)

    def remove(self, cells) -> None:
        for c in cells:
            for n in list(self.glue.get(c, ())):
                self._unlink(c, n)
            self.glue.pop(c, None)
            del self.occ[self.pos.pop(c)]
            del self.place[c]

    def _plan_piece(self, piece: list[int], start: int, target: int, extra_occ=None) -> dict | None:
        """Develop ``piece`` from ``start`` glued to ``target``; None on overlap."""
        inside = set(piece)
        plan = {start: self.develop(start, target)}
        tree = [(start, target)]
        todo = deque([start])
        while todo:
            c = todo.popleft()
            for n in self.s.neighbors[c].values():
                if n in inside and n not in plan:
                    plan[n] = self.develop(n, c, parent_pl=plan[c])
                    tree.append((n, c))
                    todo.append(n)
        if len(plan) != len(inside):
            raise InternalInvariantViolation("piece is not edge-connected", {"piece": sorted(piece)})
        seen = set()
        for pl in plan.values():
            at = _sq_pos(pl)
            if at in seen or (at in self.occ and (extra_occ is None or self.occ[at] not in extra_occ)):
                return None
            seen.add(at)
        return {"plan": plan, "tree": tree}

    def _commit(self, plan: dict) -> None:
        for c, pl in plan["plan"].items():
            self._put(c, pl)
        for a, b in plan["tree"]:
            self._link(a, b, check=False)
        self._glue_internal(plan["plan"].keys())

    def _glue_internal(self, cells) -> None:
        cells = set(cells)
        for c in cells:
            for e, n in self.s.neighbors[c].items():
                if n in cells and n > c and n not in self.glue[c]:
                    if self.edge_image(c, e) == self.edge_image(n, e):
                        self._link(c, n, check=False)

    def joints(self, piece, targets) -> list[tuple[int, int]]:
        """(piece cell, placed target cell) surface adjacencies, in piece then target order."""
        tset = set(targets)
        out = []
        for c in piece:
            for n in self.s.neighbors[c].values():
                if n in tset and n in self.place:
                    out.append((c, n))
        return out

    def attach_piece(self, piece, targets, *, label: str = "") -> tuple[int, int]:
        """Glue the connected ``piece`` to the first joint (with ``targets``) that fits."""
        piece = list(piece)
        cands = self.joints(piece, targets)
        if not cands:
            raise InternalInvariantViolation(f"{label}: piece does not touch its target",
                                             {"piece": piece, "targets": sorted(targets)})
        for start, target in cands:
            plan = self._plan_piece(piece, start, target)
            if plan is not None:
                self._commit(plan)
                return start, target
        start, target = cands[0]
        raise OverlapError(f"{label}: no overlap-free joint for piece", {"piece": piece, "targets": sorted(targets)})

    # --- connectivity ----------------------------------------------------

    def component(self, start: int, banned=frozenset()) -> set[int]:
        seen = {start}
        todo = [start]
        while todo:
            c = todo.pop()
            for n in self.glue[c]:
                if n not in seen and n not in banned:
                    seen.add(n)
                    todo.append(n)
        return seen

    def relocatable(self, cells) -> bool:
        """True when removing ``cells`` leaves the rest of the net glued together."""
        banned = set(cells)
        rest = [c for c in self.place if c not in banned]
        if not rest:
            return True
        start = self.root if self.root not in banned else rest[0]
        return len(self.component(start, banned)) == len(rest)

    def relocate(self, cells, targets, *, label: str = "") -> None:
        cells = list(cells)
        if not self.relocatable(cells):
            raise InternalInvariantViolation(f"{label}: not relocatable", {"cells": cells})
        saved = {c: self.place[c] for c in cells}
        links = [(c, n) for c in cells for n in self.glue[c]]
        self.remove(cells)
        try:
            self.attach_piece(cells, targets, label=label)
            self.relocated.update(cells)
        except OverlapError:
            for c, pl in saved.items():
                self._put(c, pl)
            for a, b in links:
                self._link(a, b)
            raise

    def cut_and_shift(self, seam, piece, joint_targets, *, label: str = "") -> int:
        """Cut the glue edges in ``seam``; reconnect the halves through ``piece``.

        ``joint_targets`` holds two target cell sets, one per half.  The piece
        is developed from the half containing the root and the other half is
        translated to meet the piece's far side.  Returns the shift (net
        units, signed along the translation direction).
        """
        seam = [(a, b) for a, b in seam if b in self.glue.get(a, ())]
        if not seam:
            raise InternalInvariantViolation(f"{label}: empty seam", {})
        for a, b in seam:
            self._unlink(a, b)
        fixed = self.component(self.root)
        moving = set(self.place) - fixed
        if not moving or len(self.component(next(iter(moving)))) != len(moving):
            for a, b in seam:
                self._link(a, b)
            raise InternalInvariantViolation(f"{label}: seam does not split the net in two",
                                             {"seam": seam})
        t_fixed = [t for ts in joint_targets for t in ts if t in fixed]
        t_moving = [t for ts in joint_targets for t in ts if t in moving]
        best = None
        for start, target in self.joints(piece, t_fixed):
            plan = self._plan_piece(piece, start, target, extra_occ=moving)
            if plan is None:
                continue
            pset = set(piece)
            pairs = [(pc, mt) for pc in t_moving for mt in self.s.neighbors[pc].values() if mt in pset]
            for pc, mt in pairs:
                want = self.develop(pc, mt, parent_pl=plan["plan"][mt])
                cur = self.place[pc]
                if want.U != cur.U or want.V != cur.V:
                    continue
                dx = want.origin[0] - cur.origin[0]
                dy = want.origin[1] - cur.origin[1]
                if self._shift_fits(plan, moving, dx, dy):
                    best = (plan, pc, mt, dx, dy)
                    break
            if best:
                break
        if best is None:
            for a, b in seam:
                self._link(a, b)
            raise OverlapError(f"{label}: no consistent cut-and-shift", {"seam": seam, "piece": list(piece)})
        plan, pc, mt, dx, dy = best
        moved = {c: self.place[c].translated(dx, dy) for c in moving}
        links = [(a, b) for a in moving for b in self.glue[a] if a < b]
        for c in moving:
            del self.occ[self.pos.pop(c)]
            del self.place[c]
            self.glue[c] = set()
        for c, pl in moved.items():
            self._put(c, pl)
        for a, b in links:  # a rigid translation keeps these glued edges consistent
            self._link(a, b, check=False)
        self._commit(plan)
        self._link(pc, mt)
        return dx if dx else dy

    def _shift_fits(self, plan, moving, dx, dy) -> bool:
        fixed_occ = {p for p, c in self.occ.items() if c not in moving}
        new = {_sq_pos(pl) for pl in plan["plan"].values()}
        if new & fixed_occ:
            return False
        for c in moving:
            x, y = self.pos[c]
            at = (x + dx, y + dy)
            if at in fixed_occ or at in new:
                return False
        return True

    # --- vacancy ---------------------------------------------------------

    def side_direction(self, cid: int, side: str) -> tuple[int, int]:
        """Net direction pointing out of band cell ``cid`` across its top or bottom edge."""
        pl = self.place[cid]
        c = self.s.cells[cid]
        k = c.in_plane_axes.index(2)
        up = pl.U if k == 0 else pl.V
        return up if side == "top" else (-up[0], -up[1])

    def vacant_beyond(self, cells, direction, ignore=()) -> bool:
        """Is the half-strip beyond ``cells`` in ``direction`` free of other cells?"""
        cells = set(cells)
        ignore = set(ignore) | cells
        dx, dy = direction
        if dx == 0:
            cols = {}
            for c in cells:
                x, y = self.pos[c]
                cols[x] = max(cols.get(x, y), y) if dy > 0 else min(cols.get(x, y), y)
            for at, o in self.occ.items():
                if o in ignore or at[0] not in cols:
                    continue
                if (at[1] - cols[at[0]]) * dy > 0:
                    return False
            return True
        rows = {}
        for c in cells:
            x, y = self.pos[c]
            rows[y] = max(rows.get(y, x), x) if dx > 0 else min(rows.get(y, x), x)
        for at, o in self.occ.items():
            if o in ignore or at[1] not in rows:
                continue
            if (at[0] - rows[at[1]]) * dx > 0:
                return False
        return True

    # --- export ----------------------------------------------------------

    def spanning_tree(self) -> dict[int, int | None]:
        parent = {self.root: None}
        todo = deque([self.root])
        while todo:
            c = todo.popleft()
            for n in sorted(self.glue[c]):
                if n not in parent:
                    parent[n] = c
                    todo.append(n)
        return parent

    def records(self) -> list[dict]:
        parent = self.spanning_tree()
        out = []
        for cid in sorted(self.place):
            c = self.s.cells[cid]
            par = parent.get(cid)
            edge = self.s.shared_edge(cid, par) if par is not None else None
            x, y = self.pos[cid]
            out.append({
                "id": cid, "base": list(c.base), "normal": c.normal, "col": x, "row": y,
                "parent": par, "edge": [list(edge[0]), edge[1]] if edge else None,
            })
        return out


def records_to_json(polycube_text: str, records: list[dict], extra: dict | None = None) -> str:
    doc = {"format": "orthounfold-net/1", "polycube": polycube_text, "cells": records}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"
