"""Band cycles, beams, clips and the per-layer band-segment selection.

Vocabulary: layer ``i`` is the slab ``z in [i-1, i]``; its band is the cycle
of vertical cells around it; the ``i``-plane is ``z = i``.  A beam is a
one-cell-wide strip of a horizontal face running from one band cell (its
anchor) straight across the face to the next band cell (its other anchor).
"""
from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field

from .model import (
    InternalInvariantViolation,
    Surface,
    ccw_tangent,
    is_connected_2d,
    is_orthogonally_convex,
    opposite_cell,
)

CCW = "ccw"
CW = "cw"


def flip(direction: str) -> str:
    return CW if direction == CCW else CCW


@dataclass(frozen=True)
class Beam:
    plane: int
    cells: tuple
    anchors: tuple  # (first, last); last is None for an empty beam
    axis: int  # axis the strip runs along (the anchors' normal axis)
    kind: str  # "top" (+z cells), "bottom" (-z cells), "" when empty

    @property
    def empty(self) -> bool:
        return not self.cells

    @property
    def key(self):
        return (self.axis, min(self.cells)) if self.cells else ("empty", self.anchors[0])

    @property
    def cellset(self) -> frozenset:
        return frozenset(self.cells)

    def other(self, anchor: int) -> int | None:
        a, b = self.anchors
        if anchor == a:
            return b
        if anchor == b:
            return a
        raise ValueError(f"cell {anchor} is not an anchor of this beam")

    def from_anchor(self, anchor: int) -> "Beam":
        """Same beam, cells ordered starting next to ``anchor``."""
        if anchor == self.anchors[0]:
            return self
        return Beam(self.plane, tuple(reversed(self.cells)), (anchor, self.anchors[0]), self.axis, self.kind)

    def __len__(self) -> int:
        return len(self.cells)


@dataclass(frozen=True)
class Clip:
    plane: int
    origin: int
    cells: frozenset

    @property
    def empty(self) -> bool:
        return not self.cells


@dataclass
class BandSelection:
    layer: int
    L: int
    R: int
    direction: str
    visited: tuple
    bridge: tuple = ()  # Beams from i-beam(R) to i-beam(L_next)
    quasi_adjacent: bool = False
    next_L: int | None = None
    next_direction: str | None = None

    @property
    def visited_set(self) -> frozenset:
        return frozenset(self.visited)

    @property
    def bridge_cells(self) -> frozenset:
        return frozenset(c for b in self.bridge for c in b.cells)

    @property
    def bridge_kind(self) -> str:
        return self.bridge[0].kind if self.bridge else ""

    def report_line(self) -> str:
        return (f"layer={self.layer} L={self.L} R={self.R} dir={self.direction} "
                f"visited={len(self.visited)} bridge_beams={len(self.bridge)} "
                f"bridge_kind={self.bridge_kind or '-'} quasi_adjacent={int(self.quasi_adjacent)}")


class BandGraph:
    """Beam, clip and band-walk queries over one surface (results cached)."""

    def __init__(self, surface: Surface):
        self.s = surface
        self._beams: dict = {}
        self._through: dict = {}
        self._face: dict = {}
        self._clips: dict = {}
        self._faces: list[frozenset] = []
        self._build_faces()

    # --- faces -----------------------------------------------------------

    def _build_faces(self) -> None:
        s = self.s
        for c in s.cells:
            if c.kind == "band" or c.id in self._face:
                continue
            fid = len(self._faces)
            comp = {c.id}
            todo = [c.id]
            while todo:
                k = todo.pop()
                for n in s.neighbors[k].values():
                    nc = s.cells[n]
                    if nc.kind == c.kind and n not in comp:
                        comp.add(n)
                        todo.append(n)
            for k in comp:
                self._face[k] = fid
            self._faces.append(frozenset(comp))

    def face_of(self, h: int) -> frozenset:
        return self._faces[self._face[h]]

    def face_id(self, h: int) -> int:
        return self._face[h]

    @property
    def faces(self) -> list[frozenset]:
        return self._faces

    def top_cells(self, i: int) -> list[int]:
        """Top cells of layer ``i`` (at the i-plane)."""
        return [c.id for c in self.s.cells if c.kind == "top" and c.base[2] == i]

    def bottom_cells(self, i: int) -> list[int]:
        """Bottom cells of layer ``i`` (at the (i-1)-plane)."""
        return [c.id for c in self.s.cells if c.kind == "bottom" and c.base[2] == i - 1]

    # --- walking ---------------------------------------------------------

    def step(self, c: int, direction: str) -> int:
        return self.s.ccw_next(c) if direction == CCW else self.s.ccw_prev(c)

    def walk(self, start: int, direction: str) -> list[int]:
        band = self.s.bands[self.s.cells[start].layer]
        k = self.s.band_pos[start]
        n = len(band)
        if direction == CCW:
            return [band[(k + j) % n] for j in range(n)]
        return [band[(k - j) % n] for j in range(n)]

    def segment(self, a: int, b: int, direction: str, closed: bool = True) -> list[int]:
        """band[a, b] (closed) or band(a, b) (open) walking in ``direction``."""
        out = []
        for c in self.walk(a, direction):
            out.append(c)
            if c == b and len(out) > 1 or (c == b and a == b):
                break
        if out[-1] != b:
            raise ValueError("cells are on different bands")
        return out if closed else out[1:-1]

    def tangent(self, c: int, direction: str) -> tuple[int, int]:
        tx, ty = ccw_tangent(self.s.cells[c].normal)
        return (tx, ty) if direction == CCW else (-tx, -ty)

    def opposite(self, c: int) -> int | None:
        return opposite_cell(self.s, c)

    def parallel(self, a: int, b: int) -> bool:
        return self.s.cells[a].axis == self.s.cells[b].axis

    # --- beams -----------------------------------------------------------

    def _opposite_edge(self, h: int, edge):
        c = self.s.cells[h]
        p, axis = edge
        other = c.in_plane_axes[0] if c.in_plane_axes[1] == axis else c.in_plane_axes[1]
        if p == c.base:
            q = list(c.base)
            q[other] += 1
            return (tuple(q), axis)
        return (c.base, axis)

    def side_neighbor(self, a: int, side: str) -> int:
        """Cell across the top or bottom edge of band cell ``a``."""
        e = self.s.top_edge(a) if side == "top" else self.s.bottom_edge(a)
        return self.s.neighbors[a][e]

    def beam_of(self, a: int, side: str) -> Beam:
        """Beam anchored on band cell ``a`` at its top or bottom edge."""
        key = (a, side)
        hit = self._beams.get(key)
        if hit is not None:
            return hit
        s = self.s
        ca = s.cells[a]
        if ca.kind != "band":
            raise ValueError(f"cell {ca.label()} is not a band cell")
        edge = s.top_edge(a) if side == "top" else s.bottom_edge(a)
        plane = edge[0][2]
        h = s.neighbors[a][edge]
        if s.cells[h].kind == "band":
            beam = Beam(plane, (), (a, None), ca.axis, "")
        else:
            cells = [h]
            entered = edge
            cur = h
            while True:
                opp = self._opposite_edge(cur, entered)
                nxt = s.neighbors[cur][opp]
                if s.cells[nxt].kind == "band":
                    other = nxt
                    break
                cells.append(nxt)
                cur = nxt
                entered = opp
            beam = Beam(plane, tuple(cells), (a, other), ca.axis, s.cells[h].kind)
            oc = s.cells[other]
            oside = "top" if oc.base[2] + 1 == plane else "bottom"
            self._beams[(other, oside)] = beam.from_anchor(other)
            for k in cells:
                self._through[(k, ca.axis)] = beam
        self._beams[key] = beam
        return beam

    def beam_through(self, h: int, axis: int) -> Beam:
        """The beam running along ``axis`` that contains horizontal cell ``h``."""
        hit = self._through.get((h, axis))
        if hit is not None:
            return hit
        s = self.s
        c = s.cells[h]
        other = c.in_plane_axes[0] if c.in_plane_axes[1] == axis else c.in_plane_axes[1]
        cur = h
        edge = (s.cells[cur].base, other)  # crossing it moves towards -axis
        while True:
            nxt = s.neighbors[cur][edge]
            if s.cells[nxt].kind == "band":
                anchor = nxt
                break
            cur = nxt
            edge = (s.cells[cur].base, other)
        side = "top" if s.top_edge(anchor) == edge else "bottom"
        beam = self.beam_of(anchor, side)
        self._through[(h, axis)] = beam
        return beam

    def partition(self, cells, axis: int) -> list[Beam]:
        seen = set()
        out = []
        for h in sorted(cells):
            b = self.beam_through(h, axis)
            if b.key not in seen:
                seen.add(b.key)
                out.append(b)
        return out

    # --- clips -----------------------------------------------------------

    def clip_of(self, r: int, direction: str) -> Clip:
        hit = self._clips.get((r, direction))
        if hit is None:
            hit = self._clips[(r, direction)] = self._clip(r, direction)
        return hit

    def _clip(self, r: int, direction: str) -> Clip:
        s = self.s
        beam = self.beam_of(r, "top")
        if beam.empty:
            return Clip(beam.plane, r, frozenset())
        face = self.face_of(beam.cells[0])
        tx, ty = self.tangent(r, direction)
        perp, sign = (0, tx) if tx else (1, ty)
        ref = s.cells[beam.cells[0]].base[perp]
        cells = s.cells
        comp = set(beam.cells)
        todo = list(beam.cells)
        while todo:
            k = todo.pop()
            for n in s.neighbors[k].values():
                if n not in comp and n in face and (cells[n].base[perp] - ref) * sign >= 0:
                    comp.add(n)
                    todo.append(n)
        return Clip(beam.plane, r, frozenset(comp))

    def adjacent_band_cells(self, cells, layer: int, axis: int | None = None) -> list[tuple[int, int]]:
        """(band cell, region cell) pairs: band cells of ``layer`` edge-adjacent to the region."""
        s = self.s
        out = []
        for h in sorted(cells):
            for n in s.neighbors[h].values():
                cn = s.cells[n]
                if cn.kind == "band" and cn.layer == layer and (axis is None or cn.axis == axis):
                    out.append((n, h))
        return out

    def is_r_candidate(self, c: int, direction: str) -> bool:
        clip = self.clip_of(c, direction)
        if clip.empty:
            return True
        layer = self.s.cells[c].layer
        return bool(self.adjacent_band_cells(clip.cells, layer + 1, self.s.cells[c].axis))

    # --- selection -------------------------------------------------------

    def quasi_adjacent(self, L: int, R: int, direction: str) -> bool:
        if self.parallel(L, R):
            return False
        between = self.segment(R, L, direction, closed=False)
        return len({self.s.cells[c].normal for c in between}) <= 1

    def select_all(self) -> list[BandSelection]:
        s = self.s
        m = s.num_layers
        sels: list[BandSelection] = []
        if m == 1:
            L = s.bands[1][0]
            R = self.step(L, CW)
            sels.append(self._finish(1, L, R, CCW, (), None, None))
            return sels
        L, d = self._select_first(sels)
        for i in range(2, m + 1):
            if i == m:
                R = self.step(L, flip(d))
                sels.append(self._finish(i, L, R, d, (), None, None))
                break
            R, bridge, nL, nd = self._select_next(i, L, d)
            sels.append(self._finish(i, L, R, d, bridge, nL, nd))
            L, d = nL, nd
        return sels

    def _finish(self, i, L, R, d, bridge, nL, nd) -> BandSelection:
        visited = tuple(self.segment(L, R, d))
        qa = self.quasi_adjacent(L, R, d)
        return BandSelection(i, L, R, d, visited, tuple(bridge), qa, nL, nd)

    def _select_first(self, sels: list) -> tuple[int, str]:
        s = self.s
        horizontal = [c.id for c in s.cells if c.kind != "band" and c.base[2] == 1]
        tops = [h for h in horizontal if s.cells[h].kind == "top"]
        pool = tops or horizontal
        if not pool:
            R = s.bands[1][0]
            L = self.step(R, CCW)
            L2 = self.side_neighbor(R, "top")
            sels.append(self._finish(1, L, R, CCW, (), L2, CCW))
            return L2, CCW
        face = self.face_of(min(pool))
        cands = []
        for c in s.bands[1]:
            b = self.beam_of(c, "top")
            if b.empty or b.cells[0] not in face:
                continue
            other = b.anchors[1]
            if s.cells[other].layer == 2:
                cands.append((s.top_edge(c), c, b))
        if not cands:
            raise InternalInvariantViolation(
                "no pair of opposite edges on the chosen 1-face (Lemma 2)", {"face": sorted(face)})
        _, R, beam = min(cands)
        L = self.step(R, CCW)
        L2 = beam.anchors[1]
        sels.append(self._finish(1, L, R, CCW, (beam,), L2, CCW))
        return L2, CCW

    def _beam_graph(self, beams: dict, cells, axis: int) -> dict:
        s = self.s
        inside = set(cells)
        near = {k: set() for k in beams}
        for k, b in beams.items():
            for c in b.cells:
                for n in s.neighbors[c].values():
                    if n in inside:
                        o = self.beam_through(n, axis).key
                        if o != k:
                            near[k].add(o)
        return near

    @staticmethod
    def _beam_distances(near: dict, start) -> dict:
        dist = {start: 0}
        todo = deque([start])
        while todo:
            k = todo.popleft()
            for o in sorted(near[k], key=repr):
                if o not in dist:
                    dist[o] = dist[k] + 1
                    todo.append(o)
        return dist

    def _select_next(self, i: int, L: int, d: str):
        s = self.s
        walk = self.walk(L, d)
        R = None
        for c in walk:
            if self.is_r_candidate(c, d):
                R = c
        if R is None:
            raise InternalInvariantViolation(f"layer {i}: no candidate for R_i (Lemma 5)", {"L": L})
        clip = self.clip_of(R, d)
        if clip.empty:
            nL = self.side_neighbor(R, "top")
            if s.cells[nL].kind != "band" or s.cells[nL].layer != i + 1:
                raise InternalInvariantViolation(f"layer {i}: empty clip but no band cell above R_i", {"R": R})
            return R, (), nL, d
        beamR = self.beam_of(R, "top")
        axis = s.cells[R].axis
        # beams of the clip, joined when side by side; a clip that wraps
        # around a smaller layer can hold two beams at the same coordinate,
        # so beams are counted along the clip rather than by coordinate
        beams = {b.key: b for b in self.partition(clip.cells, axis)}
        near = self._beam_graph(beams, clip.cells, axis)
        dist = self._beam_distances(near, beamR.key)
        ranked = []
        for b, h in self.adjacent_band_cells(clip.cells, i + 1, axis):
            nbeams = dist[self.beam_through(h, axis).key] + 1
            cb, cr = s.cells[b].center2(), s.cells[R].center2()
            manhattan = sum(abs(p - q) for p, q in zip(cb, cr))
            ranked.append((nbeams, manhattan, b, h))
        ranked.sort()
        if len(ranked) > 1 and ranked[0][:2] == ranked[1][:2] and ranked[0][2] != ranked[1][2]:
            raise InternalInvariantViolation(f"layer {i}: L_(i+1) not unique (Lemma 5)",
                                             {"candidates": ranked[:2]})
        _, _, nL, h = ranked[0]
        endkey = self.beam_through(h, axis).key
        bridge = [beamR]
        if endkey != beamR.key:
            # every beam on some shortest beam path from beam(R) to beam(L_next)
            back = self._beam_distances(near, endkey)
            total = dist[endkey]
            perp = 1 - axis
            ref = s.cells[beamR.cells[0]].base[perp]
            middle = [beams[k] for k in beams
                      if k not in (beamR.key, endkey) and dist.get(k, -1) + back.get(k, -1) == total]
            middle.sort(key=lambda b: (abs(s.cells[b.cells[0]].base[perp] - ref), min(b.cells)))
            bridge.extend(middle)
            bridge.append(self.beam_of(nL, "bottom"))
        nd = d if s.cells[R].normal == s.cells[nL].normal else flip(d)
        return R, tuple(bridge), nL, nd


def selection_report(sels: list[BandSelection]) -> str:
    return "".join(sel.report_line() + "\n" for sel in sels)


def lemma_oracles(bg: BandGraph, sels: list[BandSelection]) -> dict:
    """Brute-force re-check of the structural claims behind the selection.

    Returns a mapping lemma name -> list of violation strings (empty when the
    lemma holds on this instance).
    """
    s = bg.s
    out: dict = {"lemma5": [], "lemma6": [], "lemma7": [], "lemma8": [], "lemma9": [], "lemma10": []}
    m = s.num_layers
    for sel in sels:
        i = sel.layer
        d = sel.direction
        R, L = sel.R, sel.L
        visited = sel.visited_set
        band = s.bands[i]
        # uniqueness and existence: R really is the last candidate on the walk
        if 1 < i < m:
            walk = bg.walk(L, d)
            last = [c for c in walk if bg.is_r_candidate(c, d)]
            if not last or last[-1] != R:
                out["lemma5"].append(f"layer {i}: R_i is not the last candidate")
        # bridge shape
        if sel.bridge:
            cols = [(s.cells[c].base[0], s.cells[c].base[1]) for c in sel.bridge_cells]
            if not is_connected_2d(cols) or not is_orthogonally_convex(cols):
                out["lemma6"].append(f"layer {i}: bridge not connected/orthogonally convex")
            if sel.bridge_kind == "bottom" and len(sel.bridge) != 1:
                out["lemma6"].append(f"layer {i}: bottom bridge has {len(sel.bridge)} beams")
        rn = s.cells[R].normal
        for u in band:
            if u in visited:
                continue
            clip = bg.clip_of(u, d)
            beam = bg.beam_of(u, "top")
            if clip.empty or s.cells[next(iter(clip.cells))].kind != "top":
                out["lemma7"].append(f"layer {i}: unvisited {u} has empty/bottom clip")
            elif bg.adjacent_band_cells(clip.cells, i + 1, s.cells[u].axis):
                out["lemma7"].append(f"layer {i}: clip of unvisited {u} touches parallel upper band")
            if beam.empty or beam.kind != "top":
                out["lemma7"].append(f"layer {i}: unvisited {u} has empty/bottom beam")
            elif i < m and any(s.cells[b].layer == i + 1 and s.cells[b].axis == s.cells[u].axis
                               for b, _ in bg.adjacent_band_cells(beam.cells, i + 1)):
                out["lemma7"].append(f"layer {i}: beam of unvisited {u} touches parallel upper band")
            if bg.parallel(u, R):
                other = beam.anchors[1] if not beam.empty else None
                if other is None or s.cells[other].layer != i or other not in visited:
                    out["lemma8"].append(f"layer {i}: unvisited {u} parallel to R_i lacks a visited anchor")
            if s.cells[u].axis == s.cells[R].axis and s.cells[u].normal != rn:
                out["lemma9"].append(f"layer {i}: cell {u} opposite-facing to R_i is unvisited")
            if len(sel.bridge) > 1 and bg.parallel(u, R):
                out["lemma10"].append(f"layer {i}: multi-beam bridge but {u} parallel to R_i unvisited")
        if bg.opposite(R) == L and L != R:
            out["lemma9"].append(f"layer {i}: L_i lies opposite R_i")
    return out
