import json
import subprocess
import sys
from pathlib import Path

import pytest

from gktorus import cli

SHIPPED = ["standard_split", "standard_nonsplit", "identity_fiber_map", "quaternionic_fiber_map"]


def run(*argv):
    return cli.main(list(argv))


def _json(tmp_path, *argv):
    out = tmp_path / "out.json"
    code = run(*argv, "--json", str(out))
    return code, json.loads(out.read_text())


def test_solve_inoue_golden(tmp_path):
    code, rep = _json(tmp_path, "solve-inoue", "inoue_1_0")
    assert code == 0
    res = rep["results"]
    assert res["m"] == 1 and res["n"] == 0
    assert res["t0"] == pytest.approx(0.382245085840036, abs=1e-14)
    assert res["p"] == pytest.approx(4.8567754308507, abs=1e-12)
    assert "wall_clock_seconds" not in rep


def test_solve_inoue_not_admissible(tmp_path, capsys):
    path = tmp_path / "id.json"
    path.write_text(json.dumps({"matrix": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}))
    assert run("solve-inoue", str(path)) == 2
    assert "repeated eigenvalue 1" in capsys.readouterr().out


def test_solve_inoue_enumerate(tmp_path):
    code, rep = _json(tmp_path, "solve-inoue", "--enumerate", "-6", "6", "-6", "6")
    assert code == 0
    assert rep["results"]["count"] == 42


@pytest.mark.parametrize("name", SHIPPED)
def test_verify_gk_shipped(name, tmp_path):
    code, rep = _json(tmp_path, "verify-gk", name)
    assert code == 0
    assert rep["results"]["structure"]["H"] == {"x1^x2^x3": "-1"}
    assert all(c["pass"] for c in rep["checks"])


def test_verify_gk_missing_field_is_usage_error(tmp_path):
    cfg = {"inoue": {"matrix": [[0, 0, 1], [1, 0, 0], [0, 1, 1]]}, "frame": {"a1": "(exp t)", "b2": "1"}}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    assert run("verify-gk", str(path)) == 64


def test_verify_gk_bad_frame_fails(tmp_path):
    cfg = {"inoue": {"matrix": [[0, 0, 1], [1, 0, 0], [0, 1, 1]]},
           "frame": {"a1": "(add 1 t)", "b2": "(mul (exp (mul (rat -1 2) t)) (cos (mul p t)))",
                     "b3": "(mul -1 (exp (mul (rat -1 2) t)) (sin (mul p t)))"}}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    assert run("verify-gk", str(path)) == 1


def test_verify_gk_rejected_fiber_map(tmp_path):
    cfg = {"inoue": {"matrix": [[0, 0, 1], [1, 0, 0], [0, 1, 1]]}, "fiber": {"mode": "hyperkahler", "k": 1},
           "psi": [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    code, rep = _json(tmp_path, "verify-gk", str(path))
    assert code == 1
    assert any(c["item"] == "psi_omega2" and not c["pass"] for c in rep["checks"])


def test_cohomology_and_borel(tmp_path):
    code, rep = _json(tmp_path, "cohomology", "quaternionic_fiber_map_cohomology")
    assert code == 0 and rep["results"]["dims"] == [1, 1, 4, 5, 2, 5, 4, 1, 1]
    code, rep = _json(tmp_path, "borel", "inoue_torus4")
    assert code == 0 and rep["results"]["collapsed"]["table"]["h"][0][1] == 3


def test_borel_degenerate_needs_justification():
    assert run("borel", "inoue_torus4", "--degenerate") == 64
    assert run("borel", "inoue_torus4", "--degenerate", "--justification", "product bundle") == 0


def test_formality_configs(tmp_path):
    code, rep = _json(tmp_path, "formality", "sm_model")
    assert code == 0
    code, rep = _json(tmp_path, "formality", "lambda_presentation")
    assert code == 1
    assert rep["results"]["quasi_iso"]["first_failure"] == 5


def test_usage_errors():
    assert run("cohomology") == 64
    assert run("cohomology", "no_such_config") == 64
    with pytest.raises(SystemExit) as err:
        run("bogus")
    assert err.value.code == 64


def test_thread_variable(monkeypatch):
    monkeypatch.setenv("GKTORUS_THREADS", "zero")
    assert run("solve-inoue", "inoue_1_0") == 64
    monkeypatch.setenv("GKTORUS_THREADS", "2")
    assert run("solve-inoue", "inoue_1_0") == 0


def test_json_is_deterministic(tmp_path, monkeypatch):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run("all-paper-checks", "--json", str(a))
    monkeypatch.setenv("GKTORUS_THREADS", "3")
    run("all-paper-checks", "--json", str(b))
    assert a.read_text() == b.read_text()


def test_timing_flag(tmp_path):
    code, rep = _json(tmp_path, "solve-inoue", "inoue_1_0", "--timing")
    assert rep["wall_clock_seconds"] >= 0


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "gktorus.cli", "cohomology", "inoue_surface"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "dims: 1 1 0 1 1" in proc.stdout


GOLDEN = Path(__file__).parent / "golden"


@pytest.mark.parametrize("command, name", [
    ("cohomology", "identity_fiber_map_cohomology"),
    ("cohomology", "quaternionic_fiber_map_cohomology"),
    ("cohomology", "inoue_surface"),
    ("formality", "sm_model"),
    ("formality", "lambda_presentation"),
    ("borel", "inoue_torus4"),
])
def test_golden_reports(command, name, tmp_path):
    out = tmp_path / "out.json"
    run(command, name, "--json", str(out))
    assert out.read_text() == (GOLDEN / f"{name}.json").read_text()
