"""Four-stage edge unfolding of polycubes with orthogonally convex layers.

Stage 1 lays out visited band segments and bridges, stage 2 hangs the top
beams, stage 3 the bottom beams, and stage 4 inserts the remaining band
segments layer by layer.  Each rule only decides which piece is glued to
which; positions always come from exact development in :mod:`netplan`.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .bandgraph import CCW, BandGraph, BandSelection, Beam, flip
from .model import (InternalInvariantViolation, Polycube, Surface, ValidationError, extract_surface,
                    validate)
from .netplan import OverlapError, UnfoldingNet

log = logging.getLogger(__name__)


@dataclass
class TraceEvent:
    layer: int
    stage: int
    action: str
    detail: str = ""

    def line(self) -> str:
        return f"stage{self.stage} layer={self.layer} {self.action}" + (f" {self.detail}" if self.detail else "")


@dataclass
class SegmentCase:
    """How one unvisited straight band segment was handled in stage 4."""
    layer: int
    cells: tuple
    case: int
    side: str  # "left" / "right" in the frame of R_i
    mirrored: bool  # pointer is cw
    scenario: str = ""  # common scenario label, e.g. "2" or "4.3"
    action: str = ""

    def label(self) -> str:
        s = f"case{self.case}-{self.side}"
        if self.scenario:
            s += f"/common{self.scenario}"
        if self.mirrored:
            s += "/mirrored"
        return s


@dataclass
class UnfoldResult:
    surface: Surface
    graph: BandGraph
    selections: list[BandSelection]
    net: UnfoldingNet
    trace: list[TraceEvent] = field(default_factory=list)
    segments: list[SegmentCase] = field(default_factory=list)
    checks: dict = field(default_factory=dict)

    def records(self) -> list[dict]:
        return self.net.records()

    def explain(self) -> str:
        s = self.surface
        out = []
        for sel in self.selections:
            out.append(f"layer {sel.layer}: L={s.cells[sel.L].label()} R={s.cells[sel.R].label()} "
                       f"pointer={sel.direction} visited={len(sel.visited)} "
                       f"bridge_beams={len(sel.bridge)} quasi_adjacent={'yes' if sel.quasi_adjacent else 'no'}")
        for seg in self.segments:
            out.append(f"layer {seg.layer}: segment of {len(seg.cells)} cells -> {seg.label()} ({seg.action})")
        for ev in self.trace:
            out.append(ev.line())
        return "\n".join(out) + "\n"


class Unfolder:
    def __init__(self, surface: Surface, debug: bool = False, strict: bool = False):
        self.s = surface
        self.strict = strict
        self.bg = BandGraph(surface)
        self.sels = self.bg.select_all()
        self.net = UnfoldingNet(surface)
        self.debug = debug
        self.trace: list[TraceEvent] = []
        self.segments: list[SegmentCase] = []
        self.checks: dict = {}

    # small helpers --------------------------------------------------------

    def sel(self, i: int) -> BandSelection:
        return self.sels[i - 1]

    def event(self, layer: int, stage: int, action: str, detail: str = "") -> None:
        self.trace.append(TraceEvent(layer, stage, action, detail))

    def placed(self, c: int) -> bool:
        return c in self.net.place

    def _visit_index(self, sel: BandSelection) -> dict:
        return {c: k for k, c in enumerate(sel.visited)}

    def fail(self, msg: str, **dump):
        raise InternalInvariantViolation(msg, dump)

    # stage 1 --------------------------------------------------------------

    def stage1(self) -> None:
        net = self.net
        for sel in self.sels:
            if sel.layer == 1:
                net.set_root(sel.L)
            row = sel.visited
            for prev, cur in zip(row, row[1:]):
                net.attach(cur, prev)
            self.event(sel.layer, 1, "row", f"{len(row)} cells")
            if sel.next_L is None:
                continue
            if sel.bridge:
                cells = [c for b in sel.bridge for c in b.cells]
                net.attach_piece(cells, [sel.R], label=f"bridge {sel.layer}")
                last = self.bg.beam_of(sel.next_L, "bottom")
                net.attach(sel.next_L, last.cells[0])
            else:
                net.attach(sel.next_L, sel.R)
            self.event(sel.layer, 1, "bridge", f"{len(sel.bridge)} beams")

    # stage 2 --------------------------------------------------------------

    def stage2(self) -> None:
        s, bg, net = self.s, self.bg, self.net
        for sel in self.sels:
            i = sel.layer
            tops = [h for h in bg.top_cells(i) if h not in sel.bridge_cells]
            idx = self._visit_index(sel)
            for beam in bg.partition(tops, s.cells[sel.R].axis):
                r, q = beam.anchors
                vis = [a for a in (r, q) if a in idx]
                if not vis:
                    self.fail(f"layer {i}: top beam without a visited anchor", beam=beam.cells)
                if len(vis) == 1:
                    anchor = vis[0]
                    other = beam.other(anchor)
                    net.attach_piece(beam.cells, [anchor], label=f"top beam {i}")
                    if s.cells[other].layer == i and not self.placed(other):
                        net.attach_piece([other], beam.cells, label=f"top anchor {i}")
                elif sel.L in vis:
                    anchor = sel.L
                    net.attach_piece(beam.cells, [anchor], label=f"top beam {i}")
                else:
                    anchor = max(vis, key=idx.__getitem__)
                    net.attach_piece(beam.cells, [anchor], label=f"top beam {i}")
                self.event(i, 2, "top-beam", f"{len(beam)} cells on {anchor}")

    # stage 3 --------------------------------------------------------------

    def stage3(self) -> None:
        s, bg, net = self.s, self.bg, self.net
        for sel in self.sels:
            i = sel.layer
            idx = self._visit_index(sel)
            lower = self.sel(i - 1).bridge_cells if i > 1 else frozenset()
            axis = s.cells[sel.L].axis if sel.quasi_adjacent else s.cells[sel.R].axis
            bottoms = bg.bottom_cells(i)
            for beam in bg.partition(bottoms, axis):
                cs = beam.cellset
                if cs <= lower:
                    continue
                if cs & lower:
                    self._stage3_split(i, beam, lower)
                    continue
                a1, a2 = beam.anchors
                on_i = [a for a in (a1, a2) if s.cells[a].layer == i]
                vis = [a for a in on_i if a in idx]
                unv = [a for a in on_i if a not in idx]
                if sel.quasi_adjacent:
                    if len(on_i) == 2 and len(vis) == 1:
                        net.attach_piece(beam.cells, vis, label=f"bottom beam {i}")
                        if not self.placed(unv[0]):
                            net.attach_piece(unv, beam.cells, label=f"bottom anchor {i}")
                    elif len(on_i) == 2 and len(vis) == 2:
                        net.attach_piece(beam.cells, [max(vis, key=idx.__getitem__)], label=f"bottom beam {i}")
                    elif len(on_i) == 1 and unv:
                        q = beam.other(unv[0])
                        net.attach_piece(beam.cells, [q], label=f"bottom beam {i}")
                        if not self.placed(unv[0]):
                            net.attach_piece(unv, beam.cells, label=f"bottom anchor {i}")
                    elif len(on_i) == 1:
                        net.attach_piece(beam.cells, vis, label=f"bottom beam {i}")
                    else:
                        self.fail(f"layer {i}: bottom beam anchored on two unvisited cells", beam=beam.cells)
                else:
                    if len(unv) == 2:
                        self.fail(f"layer {i}: bottom beam anchored on two unvisited cells", beam=beam.cells)
                    if unv:
                        net.attach_piece(beam.cells, unv, label=f"bottom beam {i}")
                    elif len(vis) == 1:
                        net.attach_piece(beam.cells, vis, label=f"bottom beam {i}")
                    elif len(vis) == 2:
                        net.attach_piece(beam.cells, [max(vis, key=idx.__getitem__)], label=f"bottom beam {i}")
                    else:
                        self.fail(f"layer {i}: bottom beam with no anchor on its layer", beam=beam.cells)
                self.event(i, 3, "bottom-beam", f"{len(beam)} cells")
            if sel.quasi_adjacent:
                for u in s.bands[i]:
                    if u in idx or self.placed(u):
                        continue
                    v = bg.side_neighbor(u, "bottom")
                    if s.cells[v].kind == "band":
                        net.attach(u, v)
                        self.event(i, 3, "band-drop", f"{u} below-attached to {v}")
                    elif self.placed(v):
                        # lower beam lies on top of the layer below: extend it by u
                        net.attach_piece([u], [v], label=f"beam-extend {i}")
                        self.event(i, 3, "beam-extend", f"{u} on lower top beam")

    def _stage3_split(self, i: int, beam: Beam, lower) -> None:
        runs: list[list[int]] = [[]]
        for c in beam.cells:
            if c in lower:
                runs.append([])
            else:
                runs[-1].append(c)
        first, last = runs[0], runs[-1]
        for run, anchor in ((first, beam.anchors[0]), (last, beam.anchors[1])):
            if run:
                self.net.attach_piece(run, [anchor], label=f"sub-beam {i}")
                self.event(i, 3, "sub-beam", f"{len(run)} cells on {anchor}")
        if any(runs[1:-1]):
            self.fail(f"layer {i}: bottom beam crosses the bridge more than once", beam=beam.cells)

    # stage 4 --------------------------------------------------------------

    def stage4(self) -> None:
        for sel in self.sels:
            if sel.layer == 1 or sel.quasi_adjacent:
                self._check_layer_done(sel.layer)
                continue
            if self.debug:
                from .invariants import check_local_invariant
                self.checks.setdefault("I", []).extend(check_local_invariant(self, sel.layer))
                self.checks["checkpoints"] = self.checks.get("checkpoints", 1) + 1
            self._stage4_layer(sel)
            self._check_layer_done(sel.layer)

    def _check_layer_done(self, i: int) -> None:
        missing = [c for c in self.s.bands[i] if not self.placed(c)]
        if missing:
            self.fail(f"layer {i}: band cells left out of the net", cells=missing)

    def _segments(self, sel: BandSelection) -> list[tuple[int, list[int], int]]:
        """Maximal straight runs holding unplaced cells, in pointer order from R_i."""
        s, bg = self.s, self.bg
        walk = bg.walk(sel.R, sel.direction)
        n = len(walk)
        # rotate so the walk starts right after a corner
        start = 0
        for k in range(n):
            if s.cells[walk[k]].normal != s.cells[walk[k - 1]].normal:
                start = k
                break
        walk = walk[start:] + walk[:start]
        runs: list[list[int]] = []
        for c in walk:
            if runs and s.cells[runs[-1][-1]].normal == s.cells[c].normal:
                runs[-1].append(c)
            else:
                runs.append([c])
        out = []
        for run in runs:
            if all(self.placed(c) for c in run):
                continue
            a = bg.step(run[0], flip(sel.direction))
            b = bg.step(run[-1], sel.direction)
            out.append((a, run, b))
        # enumerate starting from R_i in pointer order
        pos = {c: k for k, c in enumerate(bg.walk(sel.R, sel.direction))}
        out.sort(key=lambda t: pos[t[1][0]])
        return out

    def _stage4_layer(self, sel: BandSelection) -> None:
        i = sel.layer
        for a, S, b in self._segments(sel):
            if all(self.placed(c) for c in S):
                continue
            try:
                self._stage4_segment(sel, a, S, b)
            except InternalInvariantViolation as exc:
                if self.strict:
                    raise
                self._repair(sel, S, str(exc))

    def _repair(self, sel: BandSelection, S: list[int], why: str) -> None:
        """Place what is left of a segment on any placed neighbour that fits."""
        net, i = self.net, sel.layer
        todo = [c for c in S if not self.placed(c)]
        try:
            net.attach_piece(todo, list(net.place), label=f"repair {i}")
            self.event(i, 4, "fallback", f"{why}; segment attached whole")
            return
        except InternalInvariantViolation:
            pass
        while todo:
            for c in todo:
                nbrs = [n for n in self.s.neighbors[c].values() if self.placed(n)]
                if nbrs:
                    try:
                        net.attach_piece([c], nbrs, label=f"repair {i}")
                    except OverlapError:
                        continue
                    todo.remove(c)
                    break
            else:
                self.fail(f"layer {i}: segment cannot be repaired ({why})", segment=S)
        self.event(i, 4, "fallback", f"{why}; segment attached cell by cell")

    def _side(self, frame_cell: int, d: str, cell: int) -> str:
        tx, ty = self.bg.tangent(frame_cell, d)
        nx, ny = self.s.cells[cell].normal_vec2()
        if (nx, ny) == (tx, ty):
            return "right"
        if (nx, ny) == (-tx, -ty):
            return "left"
        return "front" if self.s.cells[cell].normal == self.s.cells[frame_cell].normal else "back"

    def _stage4_segment(self, sel: BandSelection, a: int, S: list[int], b: int) -> None:
        s, bg, net = self.s, self.bg, self.net
        i, d, R, L = sel.layer, sel.direction, sel.R, sel.L
        vis = sel.visited_set
        if bg.parallel(S[0], R):
            self.fail(f"layer {i}: unplaced segment parallel to R_i", segment=S)
        side = self._side(R, d, S[0])
        av, bv = a in vis, b in vis
        case = {(False, False): 1, (True, False): 2, (True, True): 3, (False, True): 4}[(av, bv)]
        seg = SegmentCase(i, tuple(S), case, side, d != CCW)
        self.segments.append(seg)
        S_star = [c for c in S if c not in vis]
        if case == 1:
            a2, b2 = bg.opposite(a), bg.opposite(b)
            S2 = bg.segment(b2, a2, d, closed=False)
            if len(S) <= len(S2):
                net.attach_piece(S, [a], label=f"case1 {i}")
                seg.action = "attach to a"
            else:
                left = bg.step(a2, flip(d))
                shift = net.cut_and_shift([(a2, left)], S, [{a}, {b}], label=f"case1 {i}")
                seg.action = f"cut left of a' and shift by {shift}"
        elif case == 2:
            if side == "right":
                net.attach_piece(S, bg.beam_of(a, "top").cells, label=f"case2 {i}")
                seg.action = "attach to beam(a)"
            else:
                b2 = bg.opposite(b)
                net.attach_piece(S, bg.beam_of(b2, "top").cells, label=f"case2 {i}")
                seg.action = "attach to beam(b')"
        elif case == 3:
            if b != L:
                self.fail(f"layer {i}: case 3 with b != L_i", segment=S)
            if side == "right":
                net.attach_piece(S, bg.beam_of(R, "top").cells, label=f"case3 {i}")
                seg.action = "attach to beam(R)"
            else:
                self._common(sel, S, seg)
        else:
            front = s.cells[b].normal == s.cells[R].normal
            if front and side == "right":
                a2 = bg.opposite(a)
                net.attach_piece(S_star, bg.beam_of(a2, "top").cells, label=f"case4 {i}")
                seg.action = "attach to beam(a')"
            elif b == L and (side == "left" or not front):
                self._common(sel, S, seg)
            else:
                B = bg.beam_of(b, "top")
                if B.empty:
                    self.fail(f"layer {i}: case 4 with empty beam(b)", b=b)
                first = B.cells[0]
                if b not in net.glue.get(first, ()):
                    net.relocate(B.cells, [b], label=f"case4 relocate {i}")
                net.attach_piece(S_star, B.cells, label=f"case4 {i}")
                seg.action = "attach to beam(b)"
        self.event(i, 4, seg.label(), seg.action)

    def _common(self, sel: BandSelection, S: list[int], seg: SegmentCase) -> None:
        s, bg, net = self.s, self.bg, self.net
        i, d, R, L = sel.layer, sel.direction, sel.R, sel.L
        lower = self.sel(i - 1)
        beamL = bg.beam_of(L, "top")
        if beamL.empty:
            self.fail(f"layer {i}: common scenario with empty beam(L_i)")
        ell = beamL.cells[0]
        in_bridge = beamL.key in {b.key for b in sel.bridge}
        if L not in net.glue[ell]:
            if net.relocatable([ell]):
                net.relocate([ell], [L], label=f"relocate l {i}")
        connected = L in net.glue[ell]
        B = bg.beam_of(L, "bottom")
        f = B.other(L) if not B.empty else bg.side_neighbor(L, "bottom")
        y = bg.step(f, flip(d))
        Y = bg.beam_of(y, "top")
        Sset = set(S)

        def touches(cells) -> bool:
            return any(n in Sset for c in cells for n in s.neighbors[c].values())

        if not connected:
            self._scenario4(sel, S, seg, ell)
            return
        if not B.empty and B.kind == "bottom":
            seg.scenario = "3"
            if Y.empty or Y.kind == "bottom" or not touches(Y.cells):
                try:
                    net.attach_piece(S, B.cells, label=f"common3 {i}")
                    seg.action = "attach to B"
                except OverlapError:
                    if self.strict:
                        raise
                    net.attach_piece(S, [ell], label=f"common3 {i}")
                    seg.action = "attach to l (B overlaps)"
                    self.event(i, 4, "fallback", "common3: S attached to l")
            else:
                shift = net.cut_and_shift([(y, lower.R)], S, [set(Y.cells), {ell}], label=f"common3 {i}")
                seg.action = f"cut y|R_(i-1), attach to Y and l, shift {shift}"
            return
        if len(lower.bridge) <= 1:
            seg.scenario = "1"
            in_partition = not Y.empty and Y.kind == "top" and bg.parallel(y, lower.R)
            if not in_partition or (not touches(Y.cells) and not B.empty):
                net.attach_piece(S, [ell], label=f"common1 {i}")
                seg.action = "attach to l"
            else:
                shift = net.cut_and_shift([(y, lower.R)], S, [set(Y.cells), {ell}], label=f"common1 {i}")
                seg.action = f"cut y|R_(i-1), attach to Y and l, shift {shift}"
            return
        seg.scenario = "2"
        keys = [b.key for b in lower.bridge]
        if B.key not in keys:
            self.fail(f"layer {i}: (i-1)-beam(L_i) not in the lower bridge")
        k = keys.index(B.key)
        T = lower.bridge[k - 1] if k > 0 else lower.bridge[k + 1]
        if touches(T.cells):
            Bset = B.cellset
            seam = [(t, n) for t in T.cells for n in net.glue[t] if n in Bset]
            shift = net.cut_and_shift(seam, S, [set(T.cells), {ell}], label=f"common2 {i}")
            seg.action = f"split bridge T|B, attach to T and l, shift {shift}"
        else:
            net.attach_piece(S, [ell], label=f"common2 {i}")
            seg.action = "attach to l"

    def _scenario4(self, sel: BandSelection, S: list[int], seg: SegmentCase, ell: int) -> None:
        s, bg, net = self.s, self.bg, self.net
        i, R, L = sel.layer, sel.R, sel.L
        g, h = bg.opposite(L), bg.opposite(R)
        near = [c for c in S if R in s.neighbors[c].values()]
        if not near:
            self.fail(f"layer {i}: scenario 4 but S does not touch R_i", segment=S)
        z = near[0]
        Zb = bg.beam_of(z, "bottom")
        if Zb.empty:
            seg.scenario = "4.1"
            u = bg.side_neighbor(z, "bottom")
            net.attach(z, u)
            Rb = bg.beam_of(R, "bottom")
            if not Rb.empty:
                net.relocate(Rb.cells, [h], label=f"common4.1 {i}")
            rest = [c for c in S if c != z]
            if rest:
                net.attach_piece(rest, list(sel.bridge_cells), label=f"common4.1 {i}")
            seg.action = "z on u, relocate beam(R) to h, rest on bridge"
        elif Zb.kind == "bottom":
            seg.scenario = "4.2"
            G = bg.beam_of(g, "bottom")
            net.attach_piece(S, G.cells, label=f"common4.2 {i}")
            seg.action = "attach to G"
        else:
            seg.scenario = "4.3"
            x = bg.beam_of(R, "bottom").cells[0]
            net.relocate([x], [R], label=f"common4.3 {i}")
            br = sel.bridge
            first, second = br[0].cellset, br[1].cellset
            seam = [(p, n) for p in first for n in net.glue[p] if n in second]
            shift = net.cut_and_shift(seam, S, [{x}, {ell}], label=f"common4.3 {i}")
            seg.action = f"relocate x below R, split bridge, shift {shift}"

    # driver ---------------------------------------------------------------

    def run(self) -> UnfoldResult:
        self.stage1()
        self.stage2()
        self.stage3()
        if self.debug:
            from .invariants import check_net_properties
            self.checks["P"] = check_net_properties(self)
            self.checks["checkpoints"] = 1
        self.stage4()
        if len(self.net.place) != len(self.s.cells):
            self.fail("net does not cover the surface",
                      missing=[c.id for c in self.s.cells if c.id not in self.net.place])
        if not self.net.relocatable([]):
            self.fail("net is not connected")
        return UnfoldResult(self.s, self.bg, self.sels, self.net, self.trace, self.segments, self.checks)


def unfold(p: Polycube | Surface, debug: bool = False, strict: bool = False) -> UnfoldResult:
    """Unfold ``p``; ``strict`` raises where the stage rules need a fallback."""
    if isinstance(p, Surface):
        surface = p
    else:
        report = validate(p)
        if not report.ok:
            raise ValidationError(report)
        surface = extract_surface(p)
    return Unfolder(surface, debug=debug, strict=strict).run()
