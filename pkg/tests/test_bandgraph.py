from orthounfold import extract_surface, load_voxels
from orthounfold.bandgraph import BandGraph, flip, lemma_oracles

from conftest import model


def graph(p):
    s = extract_surface(p)
    return s, BandGraph(s)


def cid(s, base, normal):
    return s.index[(tuple(base), normal)]


def test_flip():
    assert flip("ccw") == "cw" and flip("cw") == "ccw"


def test_cube_selection(cube):
    s, bg = graph(cube)
    (sel,) = bg.select_all()
    assert sel.L == cid(s, (0, 0, 0), "-x")
    assert sel.R == cid(s, (0, 1, 0), "+y")
    assert sel.direction == "ccw"
    assert len(sel.visited) == 4 and sel.bridge == ()
    assert sel.quasi_adjacent


def test_cube_top_beam(cube):
    s, bg = graph(cube)
    top = cid(s, (0, 0, 1), "+z")
    b = bg.beam_of(cid(s, (0, 1, 0), "+y"), "top")
    assert b.kind == "top" and b.cells == (top,)
    assert set(b.anchors) == {cid(s, (0, 1, 0), "+y"), cid(s, (0, 0, 0), "-y")}
    assert b.other(b.anchors[0]) == b.anchors[1]
    assert b.from_anchor(b.anchors[1]).anchors[0] == b.anchors[1]


def test_tower_without_horizontal_cells_between_layers(tower):
    s, bg = graph(tower)
    one, two = bg.select_all()
    assert one.R == cid(s, (0, 0, 0), "-x")
    assert one.L == s.ccw_next(one.R)
    assert one.bridge == ()
    assert one.next_L == cid(s, (0, 0, 1), "-x")
    assert two.L == one.next_L
    assert two.R == s.ccw_prev(two.L)
    assert len(two.visited) == 4


def test_empty_beam_between_stacked_band_cells(tower):
    s, bg = graph(tower)
    b = bg.beam_of(cid(s, (0, 0, 0), "-x"), "top")
    assert b.empty and b.kind == ""


def test_partition_covers_face_once():
    p = load_voxels("###\n###\n")
    s, bg = graph(p)
    tops = bg.top_cells(1)
    for axis in (0, 1):
        beams = bg.partition(tops, axis)
        cells = [c for b in beams for c in b.cells]
        assert sorted(cells) == sorted(tops)
        assert all(b.axis == axis for b in beams)


def test_walk_visits_whole_band():
    p = load_voxels("###\n#..\n")
    s, bg = graph(p)
    start = s.bands[1][0]
    assert sorted(bg.walk(start, "ccw")) == sorted(s.bands[1])
    assert bg.walk(start, "cw")[1] == s.ccw_prev(start)


def test_lemma_oracles_clean_on_fixtures():
    for name in ("cube.txt", "tower.txt"):
        s, bg = graph(model(name))
        assert not any(lemma_oracles(bg, bg.select_all()).values())


def test_staircase_bridge_is_one_top_beam():
    # layer 2 sits on the far end of layer 1; the bridge crosses the exposed top
    p = load_voxels("###\n\n..#\n")
    s, bg = graph(p)
    one = bg.select_all()[0]
    west = cid(s, (0, 0, 0), "-x")
    up = cid(s, (2, 0, 1), "-x")
    assert one.R == west and one.next_L == up
    (beam,) = one.bridge
    assert beam.kind == "top" and beam.anchors == (west, up)
    assert sorted(beam.cells) == sorted(bg.top_cells(1))
    assert not any(lemma_oracles(bg, bg.select_all()).values())


def test_clip_wrapping_around_a_smaller_layer():
    # the top layer-5 cells sit inside the footprint of layer 6, so the bottom
    # of layer 6 is a ring; the y-facing cell at the far end of the bridge beam
    # is one beam away, the one across the ring is not
    p = model("ring_overhang.txt")
    s, bg = graph(p)
    five = bg.select_all()[4]
    assert five.R == cid(s, (7, 6, 4), "-y")
    assert five.next_L == cid(s, (7, 4, 5), "-y")
    (beam,) = five.bridge
    assert beam.kind == "bottom" and beam.anchors == (five.R, five.next_L)
    assert not any(lemma_oracles(bg, bg.select_all()).values())


def test_ring_model_unfolds():
    from orthounfold import unfold, verify_net

    p = model("ring_overhang.txt")
    assert verify_net(p, unfold(p).records()).ok


def test_worked_example_selection_facts():
    p = model("worked_example.txt")
    s, bg = graph(p)
    sels = bg.select_all()
    assert [len(x.bridge) for x in sels[:-1]] == [1, 5, 6, 1, 1, 0]
    assert [x.bridge_kind for x in sels[:-2]] == ["top", "top", "top", "top", "bottom"]
    assert {b.axis for b in sels[1].bridge + sels[2].bridge} == {0}
    assert sels[3].bridge[0].axis == sels[4].bridge[0].axis == 1
    # layer 2 ends are orthogonal with a straight run between them, layer 3 ends are parallel
    assert sels[1].quasi_adjacent
    assert bg.parallel(sels[2].L, sels[2].R) and not sels[2].quasi_adjacent
    assert sels[2].direction == "cw"
    # the 3-bridge covers the whole 3-face
    assert sels[2].bridge_cells == frozenset(bg.top_cells(3))
    assert not any(lemma_oracles(bg, sels).values())
