"""Acceptance suite: one PASS/FAIL line per criterion, printed even under capture.

Budgets are pinned here and never relaxed by the tests themselves.
"""
import os
import statistics
import subprocess
import sys
import time
from pathlib import Path

import pytest

from orthounfold import ValidationError, oracle_suite, unfold, validate, verify_net
from orthounfold.gen import GenConfig, generate
from orthounfold.netplan import records_to_json

from conftest import DATA, model

SMALL_BUDGET_S = 1e-3  # cube and tower, per unfold
WORKED_BUDGET_S = 10e-3  # worked seven-layer example
FUZZ_BUDGET_S = 60.0  # 1000 instances, generate + unfold + verify
DEBUG_FACTOR = 3  # debug fuzz may take this multiple of the fuzz budget
FUZZ_SEED, FUZZ_COUNT = 42, 1000
FUZZ_CFG = GenConfig(max_layers=6, max_extent=10)
TIMING_REPEATS = 200

LEMMAS = ("lemma1", "lemma2", "lemma4", "lemma7", "lemma8", "lemma9", "lemma10")
WORKED_BRIDGES = [1, 5, 6, 1, 1, 0]
WORKED_AREA = 90
WORKED_LAYERS = 7


@pytest.fixture
def report(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
    return emit


def median_seconds(fn, repeats=TIMING_REPEATS):
    fn()  # warm caches
    ts = []
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t)
    return statistics.median(ts)


# 1 -------------------------------------------------------------------------


def test_criterion1_small_nets(report):
    lines, ok = [], True
    for name in ("cube", "tower"):
        p = model(f"{name}.txt")
        r = unfold(p)
        accepted = verify_net(p, r.records()).ok
        golden = records_to_json(p.to_text(), r.records()) == (DATA / f"{name}.net.json").read_text()
        t = median_seconds(lambda: unfold(p))
        good = accepted and golden and t < SMALL_BUDGET_S
        ok &= good
        lines.append(f"{name} accepted={accepted} golden={golden} median={t * 1e3:.3f}ms")
    report(1, ok, "; ".join(lines) + f" (budget {SMALL_BUDGET_S * 1e3:g}ms)")
    assert ok


# 2 -------------------------------------------------------------------------


def _segments_by_layer(result):
    out = {}
    for seg in result.segments:
        out.setdefault(seg.layer, []).append(seg)
    return out


def test_criterion2_worked_example(report):
    p = model("worked_example.txt")
    r = unfold(p)
    area = len(r.records())
    bridges = [len(sel.bridge) for sel in r.selections[:-1]]
    segs = _segments_by_layer(r)

    def has(layer, case, side=None, scenario=None, mirrored=None):
        for s in segs.get(layer, []):
            if s.case != case:
                continue
            if side is not None and s.side != side:
                continue
            if scenario is not None and s.scenario != scenario:
                continue
            if mirrored is not None and s.mirrored != mirrored:
                continue
            return True
        return False

    labels = {
        "S3": has(3, 3, scenario="2", mirrored=True),
        "S4": has(4, 2, side="left"),
        "S5": has(4, 1, side="right") or has(5, 1, side="right"),
        "S6": has(6, 4, side="left", scenario="3"),
    }
    accepted = verify_net(p, r.records()).ok
    t = median_seconds(lambda: unfold(p), repeats=50)
    ok = (p.num_layers == WORKED_LAYERS and area == WORKED_AREA and bridges == WORKED_BRIDGES
          and all(labels.values()) and accepted and t < WORKED_BUDGET_S)
    got = {k: [s.label() for s in v] for k, v in sorted(segs.items())}
    report(2, ok, f"layers={p.num_layers} cells={area} bridges={bridges} labels={labels} "
                  f"segments={got} accepted={accepted} median={t * 1e3:.2f}ms")
    assert ok


# 3 -------------------------------------------------------------------------


def test_criterion3_fuzz(report):
    t = time.perf_counter()
    bad = []
    for k in range(FUZZ_COUNT):
        p = generate(FUZZ_SEED, k, FUZZ_CFG)
        try:
            recs = unfold(p).records()
        except Exception as exc:  # any failure counts as a rejection
            bad.append((k, repr(exc)))
            continue
        if not verify_net(p, recs).ok:
            bad.append((k, "net rejected"))
    elapsed = time.perf_counter() - t
    ok = not bad and elapsed < FUZZ_BUDGET_S
    report(3, ok, f"{FUZZ_COUNT - len(bad)}/{FUZZ_COUNT} accepted in {elapsed:.1f}s "
                  f"(budget {FUZZ_BUDGET_S:g}s){' first bad: ' + str(bad[0]) if bad else ''}")
    assert ok


# 4 and 5 share one debug fuzz run ------------------------------------------


@pytest.fixture(scope="module")
def debug_run():
    t = time.perf_counter()
    lemma_hits, prop_hits, errors = [], [], []
    checkpoints = 0
    for k in range(FUZZ_COUNT):
        p = generate(FUZZ_SEED, k, FUZZ_CFG)
        try:
            r = unfold(p, debug=True)
        except Exception as exc:
            errors.append((k, repr(exc)))
            continue
        suite = oracle_suite(p, r)
        lemma_hits += [(k, v) for name in LEMMAS for v in suite[name]]
        checkpoints += r.checks["checkpoints"]
        prop_hits += [(k, v) for v in r.checks.get("P", []) + r.checks.get("I", [])]
    return {"elapsed": time.perf_counter() - t, "lemmas": lemma_hits, "props": prop_hits,
            "errors": errors, "checkpoints": checkpoints}


def test_criterion4_lemma_oracles(report, debug_run):
    budget = DEBUG_FACTOR * FUZZ_BUDGET_S
    hits, errors = debug_run["lemmas"], debug_run["errors"]
    ok = not hits and not errors and debug_run["elapsed"] < budget
    report(4, ok, f"{len(hits)} lemma violations over {', '.join(LEMMAS)}; {len(errors)} errors; "
                  f"debug run {debug_run['elapsed']:.1f}s (budget {budget:g}s)"
                  f"{' first: ' + str(hits[0]) if hits else ''}")
    assert ok


def test_criterion5_net_properties(report, debug_run):
    hits = debug_run["props"]
    instances = sorted({k for k, _ in hits})
    ok = not hits and not debug_run["errors"]
    report(5, ok, f"{len(hits)} property/invariant violations on {len(instances)} instances "
                  f"{instances} across {debug_run['checkpoints']} checkpoints"
                  f"{' first: ' + str(hits[0]) if hits else ''}")
    assert ok


# 6 -------------------------------------------------------------------------


def test_criterion6_negative_validation(report):
    torus = validate(model("torus.txt"))
    u = validate(model("u_layer.txt"))
    pinched = validate(model("pinched.txt"))
    checks = {
        "torus chi": not torus.euler_ok and torus.chi == 0,
        "U orthoconvexity": not u.layers_orthoconvex,
        "vertex-glued manifold": not pinched.vertex_manifold,
    }
    refused = 0
    for name in ("torus.txt", "u_layer.txt", "pinched.txt"):
        try:
            unfold(model(name))
        except ValidationError:
            refused += 1
    ok = all(checks.values()) and refused == 3
    report(6, ok, f"{checks} unfold refused {refused}/3")
    assert ok


# 7 -------------------------------------------------------------------------


def _cli_outputs(tmp: Path, hashseed: str) -> dict:
    env = dict(os.environ, PYTHONHASHSEED=hashseed)
    out = {}
    jobs = [("cube", DATA / "cube.txt"), ("tower", DATA / "tower.txt")]
    for k in (0, 7, 123):
        path = tmp / f"fuzz{k}.txt"
        path.write_text(generate(FUZZ_SEED, k, FUZZ_CFG).to_text())
        jobs.append((f"fuzz{k}", path))
    for name, src in jobs:
        net, explain, svg = tmp / f"{name}.{hashseed}.json", tmp / f"{name}.{hashseed}.txt", tmp / f"{name}.{hashseed}.svg"
        subprocess.run([sys.executable, "-m", "orthounfold.cli", "unfold", str(src), "-o", str(net),
                        "--explain", str(explain), "--svg", str(svg)], env=env, check=True)
        out[name] = (net.read_bytes(), explain.read_bytes(), svg.read_bytes())
    return out


def test_criterion7_determinism(report, tmp_path):
    a = _cli_outputs(tmp_path, "1")
    b = _cli_outputs(tmp_path, "2024")
    same = {k: a[k] == b[k] for k in a}
    ok = all(same.values())
    report(7, ok, f"net/explain/svg bytes identical across hash seeds: {same}")
    assert ok
