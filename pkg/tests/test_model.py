import pytest

from orthounfold import ParseError, Polycube, extract_surface, load_voxels, validate
from orthounfold.model import is_connected_2d, is_orthogonally_convex

from conftest import model


def test_coordinate_and_block_formats_agree():
    a = load_voxels("0 0 0\n1 0 0\n0 0 1\n")
    b = load_voxels("##\n\n#\n")
    assert a == b


def test_coordinates_are_normalised_to_origin():
    p = load_voxels("5 -3 2  # comment\n")
    assert p.cubes == frozenset({(0, 0, 0)})


@pytest.mark.parametrize("text", ["", "1 2\n", "1 2 x\n", "#.#\nabc\n"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        load_voxels(text)


def test_cube_surface_counts(cube):
    s = extract_surface(cube)
    assert len(s.cells) == 6
    assert (s.V, s.E, s.F) == (8, 12, 6)
    assert s.euler == 2
    assert len(s.bands[1]) == 4


def test_band_is_a_ccw_cycle(tower):
    s = extract_surface(tower)
    for i in (1, 2):
        band = s.bands[i]
        normals = [s.cells[c].normal for c in band]
        k = normals.index("-x")
        assert normals[k:] + normals[:k] == ["-x", "-y", "+x", "+y"]
        for c in band:
            assert s.ccw_prev(s.ccw_next(c)) == c


def test_surface_area_matches_face_count():
    p = load_voxels("###\n#..\n\n.#.\n")
    s = extract_surface(p)
    shared = sum(1 for (x, y, z) in p.cubes for d in ((1, 0, 0), (0, 1, 0), (0, 0, 1))
                 if (x + d[0], y + d[1], z + d[2]) in p.cubes)
    assert len(s.cells) == 6 * len(p.cubes) - 2 * shared


def test_cube_is_valid(cube):
    r = validate(cube)
    assert r.ok and r.chi == 2


def test_torus_fails_euler_only_by_topology():
    r = validate(model("torus.txt"))
    assert (r.V, r.E, r.F, r.chi) == (32, 64, 32, 0)
    assert not r.euler_ok
    assert not r.layers_orthoconvex
    assert r.face_connected and r.edge_manifold and r.vertex_manifold


def test_u_layer_fails_orthoconvexity_only():
    r = validate(model("u_layer.txt"))
    assert not r.layers_orthoconvex
    assert [k for k, v in r.flags().items() if not v] == ["layers_orthoconvex"]
    assert r.chi == 2


def test_pinched_vertex_is_non_manifold():
    r = validate(model("pinched.txt"))
    failed = [k for k, v in r.flags().items() if not v]
    assert failed == ["vertex_manifold", "euler_ok"]
    assert r.chi == 1


def test_vertex_only_contact_is_disconnected_and_non_manifold():
    r = validate(model("vertex_only.txt"))
    assert not r.face_connected and not r.vertex_manifold
    assert (r.V, r.E, r.F) == (15, 24, 12)


def test_edge_contact_is_non_manifold():
    # two cubes sharing only an edge, joined through a third layer
    p = Polycube.from_cubes([(0, 0, 0), (1, 1, 0), (0, 0, 1), (1, 0, 1), (1, 1, 1)])
    r = validate(p)
    assert not r.edge_manifold


def test_polyomino_predicates():
    assert is_orthogonally_convex({(0, 0), (1, 0), (1, 1)})
    assert not is_orthogonally_convex({(0, 0), (1, 0), (2, 0), (0, 1), (2, 1)})
    assert is_connected_2d({(0, 0), (0, 1)})
    assert not is_connected_2d({(0, 0), (1, 1)})
