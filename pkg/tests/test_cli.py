import subprocess
import sys

import pytest

from cgdae.cli import main
from cgdae.study import HEADER, read_csv


def test_circuit_study(tmp_path):
    out = tmp_path / "c.csv"
    code = main(["study", "--problem", "circuit", "--degrees", "1,2", "--dt0", "0.05", "--levels", "3",
                 "--baseline", "radau2", "--out", str(out)])
    assert code == 0
    rows = read_csv(out)
    assert out.read_text().splitlines()[0] == ",".join(HEADER)
    assert [(r["r"], r["family"]) for r in rows] == [(1, "equispaced")] * 3 + [(2, "equispaced")] * 3 \
        + [(2, "radau2")] * 3


def test_heat_options(tmp_path):
    out = tmp_path / "h.csv"
    code = main(["study", "--problem", "heat", "--degrees", "1", "--dt0", "0.025", "--levels", "2",
                 "--c1", "3", "--c2", "1", "--ref-steps", "80", "--family", "gauss-lobatto", "--out", str(out)])
    assert code == 0
    assert {r["family"] for r in read_csv(out)} == {"gauss-lobatto"}


def test_bad_step_exit_code(tmp_path, capsys):
    code = main(["study", "--problem", "circuit", "--dt0", "-1", "--out", str(tmp_path / "x.csv")])
    assert code == 2
    assert "dt0" in capsys.readouterr().err


def test_unknown_problem_rejected(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["study", "--problem", "spring", "--out", str(tmp_path / "x.csv")])
    assert info.value.code == 2


def test_newton_failure_exit_code(tmp_path, monkeypatch):
    monkeypatch.setenv("CGDAE_NEWTON_TOL", "1e-30")
    out = tmp_path / "p.csv"
    code = main(["study", "--problem", "pendulum", "--degrees", "1", "--levels", "1", "--ref-steps", "32",
                 "--out", str(out)])
    assert code == 2
    assert "failed" in out.read_text()


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run([sys.executable, "-m", "cgdae", "study", "--problem", "circuit", "--degrees", "1",
                           "--levels", "2", "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert len(out.read_text().splitlines()) == 3
