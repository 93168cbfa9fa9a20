import json

import pytest

from conftest import DATA


def test_validate_ok(run_cli):
    code, out, _ = run_cli("validate", DATA / "cube.txt")
    assert code == 0
    assert "V=8 E=12 F=6 chi=2" in out and out.endswith("valid\n")


@pytest.mark.parametrize("name,flag", [
    ("torus.txt", "euler_ok: FAIL"),
    ("u_layer.txt", "layers_orthoconvex: FAIL"),
    ("pinched.txt", "vertex_manifold: FAIL"),
])
def test_validate_rejects(run_cli, name, flag):
    code, out, _ = run_cli("validate", DATA / name)
    assert code == 1 and flag in out and out.endswith("invalid\n")


def test_unfold_writes_golden_net(run_cli, tmp_path):
    out = tmp_path / "tower.json"
    code, _, err = run_cli("unfold", DATA / "tower.txt", "-o", out)
    assert code == 0 and err == ""
    assert out.read_text() == (DATA / "tower.net.json").read_text()


def test_unfold_stdout_and_explain(run_cli, tmp_path):
    code, out, _ = run_cli("unfold", DATA / "cube.txt", "--explain", tmp_path / "x.txt")
    assert code == 0
    assert json.loads(out)["format"] == "orthounfold-net/1"
    assert (tmp_path / "x.txt").read_text() == (DATA / "cube.explain.txt").read_text()


def test_unfold_invalid_model_exits_2(run_cli):
    code, _, err = run_cli("unfold", DATA / "torus.txt")
    assert code == 2 and "error" in err


def test_missing_and_malformed_input_exit_2(run_cli, tmp_path):
    assert run_cli("validate", tmp_path / "nope.txt")[0] == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2\n")
    assert run_cli("validate", bad)[0] == 2
    notjson = tmp_path / "net.json"
    notjson.write_text("{")
    assert run_cli("verify", DATA / "cube.txt", notjson)[0] == 2
    assert run_cli("frobnicate")[0] == 2


def test_verify_accepts_and_rejects(run_cli, tmp_path):
    code, out, _ = run_cli("verify", DATA / "cube.txt", DATA / "cube.net.json")
    assert code == 0 and "verdict: ACCEPT" in out
    doc = json.loads((DATA / "cube.net.json").read_text())
    doc["cells"][1]["col"] += 7
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, out, _ = run_cli("verify", DATA / "cube.txt", bad)
    assert code == 1 and "verdict: REJECT" in out
    # a net for another model
    code, _, _ = run_cli("verify", DATA / "tower.txt", DATA / "cube.net.json")
    assert code == 1


def test_render_is_deterministic(run_cli, tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    assert run_cli("render", DATA / "tower.net.json", "-o", a, "--title", "tower", "--labels")[0] == 0
    assert run_cli("render", DATA / "tower.net.json", "-o", b, "--title", "tower", "--labels")[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().lstrip().startswith("<?xml")


def test_generate_and_fuzz(run_cli, tmp_path):
    code, out, _ = run_cli("generate", "--seed", 3, "--max-layers", 2, "--max-extent", 3)
    assert code == 0 and out.strip()
    code, _, _ = run_cli("generate", "--seed", 3, "--count", 3, "-o", tmp_path)
    assert code == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == [f"seed3_{k:05d}.txt" for k in range(3)]
    code, out, _ = run_cli("fuzz", "--seed", 42, "--count", 25)
    assert "25/25 accepted" in out
    assert code in (0, 1)
    assert run_cli("fuzz", "--max-extent", 0)[0] == 2


def test_fuzz_exit_code_matches_summary(run_cli):
    code, out, _ = run_cli("fuzz", "--seed", 42, "--count", 10)
    lines = out.splitlines()
    clean = lines[-2] == "10/10 accepted" and lines[-1] == "0 instances with property violations"
    assert code == (0 if clean else 1)
