"""Debug-mode net property checks.

Each property is evaluated as a vacancy or relocatability query over the
current net.  Checks never raise; they return human-readable violation
strings so the fuzzer can count and report them.
"""
from __future__ import annotations

from collections import defaultdict

from .bandgraph import Beam


class _Occupancy:
    """Column and row index of the net, built once per checkpoint."""

    def __init__(self, net):
        self.net = net
        self.cols = defaultdict(list)
        self.rows = defaultdict(list)
        for (x, y), c in net.occ.items():
            self.cols[x].append((y, c))
            self.rows[y].append((x, c))

    def vacant(self, cells, direction, ignore=()) -> bool:
        cells = set(cells)
        skip = cells | set(ignore)
        dx, dy = direction
        ext = {}
        for c in cells:
            x, y = self.net.pos[c]
            k, v = (x, y) if dx == 0 else (y, x)
            s = dy if dx == 0 else dx
            if k not in ext or (v - ext[k]) * s > 0:
                ext[k] = v
        lines = self.cols if dx == 0 else self.rows
        s = dy if dx == 0 else dx
        for k, v in ext.items():
            for w, o in lines[k]:
                if (w - v) * s > 0 and o not in skip:
                    return False
        return True

    def at(self, cell, direction):
        x, y = self.net.pos[cell]
        return self.net.occ.get((x + direction[0], y + direction[1]))


class PropertyChecker:
    """Evaluates the net properties of every layer against one net state."""

    def __init__(self, unfolder):
        self.u = unfolder
        self.s = unfolder.s
        self.bg = unfolder.bg
        self.net = unfolder.net
        self.occ = _Occupancy(self.net)
        self.m = self.s.num_layers
        self._top = {}
        self._bottom = {}

    # helpers ---------------------------------------------------------------

    def sel(self, j):
        return self.u.sel(j)

    def top_partition(self, j) -> set:
        if j not in self._top:
            axis = self.s.cells[self.sel(j).R].axis
            self._top[j] = {b.key for b in self.bg.partition(self.bg.top_cells(j), axis)}
        return self._top[j]

    def bottom_partition(self, j) -> set:
        if j not in self._bottom:
            sel = self.sel(j)
            axis = self.s.cells[sel.L if sel.quasi_adjacent else sel.R].axis
            self._bottom[j] = {b.key for b in self.bg.partition(self.bg.bottom_cells(j), axis)}
        return self._bottom[j]

    def lower_bridge(self, j) -> frozenset:
        return self.sel(j - 1).bridge_cells if j > 1 else frozenset()

    def side_vacant(self, r, side) -> bool:
        if r not in self.net.place:
            return False
        return self.occ.vacant([r], self.net.side_direction(r, side))

    def stable(self, beam: Beam, j) -> bool:
        """Beam on the bottom of layer ``j``: every piece left after removing
        the lower bridge still touches a layer-``j`` band anchor."""
        lower = self.lower_bridge(j)
        runs = [[]]
        for c in beam.cells:
            if c in lower:
                runs.append([])
            else:
                runs[-1].append(c)
        for k, run in enumerate(runs):
            if not run:
                continue
            ends = []
            if k == 0:
                ends.append(beam.anchors[0])
            if k == len(runs) - 1:
                ends.append(beam.anchors[1])
            if not any(self.s.cells[a].layer == j for a in ends):
                return False
        return True

    # properties ------------------------------------------------------------

    def p1(self, j, only=None) -> list[str]:
        """Visited cells whose lower beam is not hung below them stay open below."""
        if not 1 <= j <= self.m:
            return []
        sel, bg = self.sel(j), self.bg
        idx = {c: k for k, c in enumerate(sel.visited)}
        lower = self.lower_bridge(j)
        out = []
        for r in sel.visited:
            if r == sel.L or (only is not None and not only(r)):
                continue
            B = bg.beam_of(r, "bottom")
            in_part = not B.empty and B.kind == "bottom" and B.key in self.bottom_partition(j)
            applies = B.empty or not in_part
            if in_part and not (B.cellset & lower):
                anchors = B.anchors
                if all(self.s.cells[a].layer == j for a in anchors):
                    other = B.other(r)
                    if other in idx:
                        applies = idx[r] < idx[other]
                    else:
                        # a quasi-adjacent layer hangs this beam below r itself
                        applies = not sel.quasi_adjacent
            if applies and not self.side_vacant(r, "bottom"):
                out.append(f"P1({j}) cell {r}")
        return out

    def p2(self, j, only=None) -> list[str]:
        """Visited cells keep the space across their top edge open."""
        if not 1 <= j <= self.m:
            return []
        sel, bg, s = self.sel(j), self.bg, self.s
        upper = self.sel(j + 1) if j < self.m else None
        vis = sel.visited_set
        out = []
        for r in sel.visited:
            if r == sel.R or (only is not None and not only(r)):
                continue
            B = bg.beam_of(r, "top")
            if B.empty:
                u = bg.side_neighbor(r, "top")
                hung = (upper is not None and upper.quasi_adjacent and u not in upper.visited_set
                        and u in self.net.glue.get(r, ()))
                if hung:
                    if not self.occ.vacant([u], self.net.side_direction(r, "top")):
                        out.append(f"P2({j}) cell {u} above {r}")
                elif not self.side_vacant(r, "top"):
                    out.append(f"P2({j}) cell {r}")
                continue
            in_top = B.kind == "top" and B.key in self.top_partition(j)
            if B.kind == "top" and not in_top:
                if not self.side_vacant(r, "top"):
                    out.append(f"P2a({j}) cell {r}")
            elif B.kind == "bottom" and upper is not None and self.stable(B, j + 1):
                anchor = B.other(r)
                if not upper.quasi_adjacent or anchor in upper.visited_set:
                    if not self.side_vacant(r, "top"):
                        out.append(f"P2b({j}) cell {r}")
            if in_top:
                other = B.other(r)
                unvisited_band = s.cells[other].layer == j and other not in vis
                anchored_next = upper is not None and upper.L in B.anchors
                if anchored_next or unvisited_band:
                    continue
                ext = ()
                if (upper is not None and upper.quasi_adjacent and s.cells[other].layer == j + 1
                        and other not in upper.visited_set
                        and B.from_anchor(r).cells[-1] in self.net.glue.get(other, ())):
                    ext = (other,)  # beam extended by an upper band cell
                cells = [c for c in B.cells + ext if c in self.net.place]
                if len(cells) != len(B.cells) + len(ext) or r not in self.net.place:
                    out.append(f"P2c({j}) beam at {r} unplaced")
                elif not self.occ.vacant(cells, self.net.side_direction(r, "top")):
                    out.append(f"P2c({j}) beam at {r}")
        return out

    def p3(self, j) -> list[str]:
        if not 1 <= j < self.m:
            return []
        sel, s = self.sel(j), self.s
        out = []
        for r in sel.visited:
            u = self.bg.side_neighbor(r, "top")
            if s.cells[u].kind != "band" or s.cells[u].layer != j + 1:
                continue
            if r not in self.net.place:
                out.append(f"P3({j}) cell {r} unplaced")
                continue
            o = self.occ.at(r, self.net.side_direction(r, "top"))
            if o is not None and o != u:
                out.append(f"P3({j}) cell {r} covered by {o}")
        return out

    def _bridge(self, j, side, skip) -> list[str]:
        if not 1 <= j <= self.m:
            return []
        sel = self.sel(j)
        out = []
        for B in sel.bridge:
            if skip in B.anchors:
                continue
            cells = [c for c in B.cells if c not in self.net.relocated]
            if not cells:
                continue
            if any(c not in self.net.place for c in cells) or sel.R not in self.net.place:
                out.append(f"bridge beam {B.key} of layer {j} unplaced")
                continue
            # R_j and the next layer's L are the bridge's own connectors
            ends = (sel.R, sel.next_L)
            if not self.occ.vacant(cells, self.net.side_direction(sel.R, side), ignore=ends):
                out.append(f"{'P4' if side == 'top' else 'P5'}({j}) bridge beam {B.key}")
        return out

    def p4(self, j) -> list[str]:
        if not 1 <= j <= self.m:
            return []
        return self._bridge(j, "top", self.sel(j).next_L)

    def p5(self, j) -> list[str]:
        if not 1 <= j <= self.m:
            return []
        return self._bridge(j, "bottom", self.sel(j).R)

    def p6(self, j) -> list[str]:
        if not 1 <= j <= self.m:
            return []
        sel, bg, s, net = self.sel(j), self.bg, self.s, self.net
        out = []
        if j > 1:
            lower = self.sel(j - 1)
            B = bg.beam_of(sel.R, "bottom")
            if not B.empty and B.key not in {b.key for b in lower.bridge}:
                if B.kind == "top" and B.key in self.top_partition(j - 1):
                    x = B.from_anchor(sel.R).cells[0]
                    if (len(B) > 1 or lower.L not in B.anchors) and not net.relocatable([x]):
                        out.append(f"P6a({j}) cell {x}")
                elif (B.kind == "bottom" and B.key in self.bottom_partition(j)
                      and all(s.cells[a].layer == j for a in B.anchors)):
                    # the part inside the lower bridge stays with the bridge
                    part = [c for c in B.cells if c not in self.lower_bridge(j)]
                    if not net.relocatable(part):
                        out.append(f"P6b({j}) beam {B.key}")
        bridge = {b.key for b in sel.bridge}
        vis = sel.visited_set
        axis = s.cells[sel.R].axis
        for Y in bg.partition(bg.top_cells(j), axis):
            if Y.key in bridge or sel.L in Y.anchors:
                continue
            if all(a in vis for a in Y.anchors) and not net.relocatable(Y.cells):
                out.append(f"P6c({j}) beam {Y.key}")
        return out


def check_net_properties(unfolder) -> list[str]:
    """All six properties for every layer (end of the third stage)."""
    pc = PropertyChecker(unfolder)
    out = []
    for j in range(1, pc.m + 1):
        out += pc.p1(j) + pc.p2(j) + pc.p3(j) + pc.p4(j) + pc.p5(j) + pc.p6(j)
    return out


def check_local_invariant(unfolder, i: int) -> list[str]:
    """The invariant that must hold right before layer ``i`` is completed."""
    pc = PropertyChecker(unfolder)
    bg, m = pc.bg, pc.m
    out = []
    prev = pc.sel(i - 1) if i > 1 else None
    L = pc.sel(i).L
    near_L = set(unfolder.s.neighbors[L].values())
    # part 1
    if prev is not None and prev.quasi_adjacent:
        out += pc.p1(i - 1, only=lambda r: r == prev.R)
    out += pc.p1(i, only=lambda r: r not in near_L)
    for j in range(i + 1, m + 1):
        out += pc.p1(j)
    # part 2
    if prev is not None and len(prev.visited) > 1:
        before = prev.visited[-2]
        out += pc.p2(i - 1, only=lambda r: r == before)
    for j in range(i, m + 1):
        out += pc.p2(j)
    # parts 3 and 4
    for j in range(max(1, i - 1), m + 1):
        out += pc.p3(j) + pc.p4(j)
    # part 5
    if prev is not None:
        adjacent = prev.L in unfolder.s.neighbors[prev.R].values()
        beam = bg.beam_of(prev.R, "top")
        incident = prev.L in beam.anchors or any(
            prev.L in unfolder.s.neighbors[c].values() for c in beam.cells)
        if adjacent or not incident:
            out += pc.p5(i - 1)
    for j in range(i, m + 1):
        out += pc.p5(j)
    # part 6
    for j in range(i, m + 1):
        out += pc.p6(j)
    return [f"I({i}): {v}" for v in out]
