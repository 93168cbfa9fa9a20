from pathlib import Path

import pytest

from orthounfold import load_voxels

DATA = Path(__file__).parent / "data"


def model(name: str):
    return load_voxels((DATA / name).read_text())


@pytest.fixture
def cube():
    return model("cube.txt")


@pytest.fixture
def tower():
    return model("tower.txt")


@pytest.fixture
def run_cli(capsys):
    """Run the CLI in-process; returns (exit code, stdout, stderr)."""
    from orthounfold.cli import main

    def run(*argv):
        code = main([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err

    return run
