"""Property-based checks over random stacks of orthogonally convex layers."""
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from orthounfold import Polycube, extract_surface, oracle_suite, unfold, validate, verify_net
from orthounfold.netplan import records_to_json


@st.composite
def stacks(draw, max_layers=4, max_extent=4):
    """Stacks of axis-aligned staircase polyominoes, each overlapping the one below."""
    m = draw(st.integers(1, max_layers))
    cubes = []
    prev = None
    for z in range(m):
        h = draw(st.integers(1, max_extent))
        rows = []
        lo = hi = None
        for y in range(h):
            a = draw(st.integers(0, max_extent - 1))
            b = draw(st.integers(a, max_extent - 1))
            if lo is not None:
                # keep consecutive rows overlapping so the layer stays connected
                a, b = min(a, hi), max(b, lo)
            rows.append((a, b))
            lo, hi = a, b
        layer = {(x, y) for y, (a, b) in enumerate(rows) for x in range(a, b + 1)}
        dx = draw(st.integers(-2, 2))
        dy = draw(st.integers(-2, 2))
        layer = {(x + dx, y + dy) for x, y in layer}
        if prev is not None and not layer & prev:
            layer = prev
        cubes += [(x, y, z) for x, y in layer]
        prev = layer
    return Polycube.from_cubes(cubes)


SETTINGS = settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@SETTINGS
@given(stacks())
def test_valid_stacks_unfold_to_accepted_nets(p):
    assume(validate(p).ok)
    r = unfold(p)
    assert verify_net(p, r.records()).ok
    assert len(r.records()) == len(extract_surface(p).cells)


@SETTINGS
@given(stacks())
def test_structural_oracles_hold(p):
    assume(validate(p).ok)
    assert not any(oracle_suite(p).values())


@settings(max_examples=60, deadline=None)
@given(stacks())
def test_unfolding_is_deterministic(p):
    assume(validate(p).ok)
    a = records_to_json(p.to_text(), unfold(p).records())
    b = records_to_json(p.to_text(), unfold(Polycube.from_cubes(sorted(p.cubes, reverse=True))).records())
    assert a == b


@SETTINGS
@given(stacks())
def test_euler_characteristic_of_valid_stacks(p):
    r = validate(p)
    if r.ok:
        assert r.chi == 2 and extract_surface(p).euler == 2


@settings(max_examples=60, deadline=None)
@given(stacks(), st.integers(0, 10**6))
def test_any_moved_cell_is_caught(p, pick):
    assume(validate(p).ok)
    recs = unfold(p).records()
    k = pick % len(recs)
    recs[k] = dict(recs[k], col=recs[k]["col"] + 1000)
    assert not verify_net(p, recs).ok
