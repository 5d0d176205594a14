import csv
import io
import json
import subprocess
import sys

import pytest

from heisplane import cli


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def report(text):
    return json.loads(text[: text.index("\n}\n") + 2] if "\n}\n" in text else text)


def test_constant_default(capsys):
    code, out, _ = run(["constant", "--seed", "42"], capsys)
    rep = report(out)
    assert code == 0 and rep["schema"] == "heis-plane/1"
    assert rep["value"] == pytest.approx(65.898, rel=1e-3)
    assert rep["config"]["budget"] == 10**7 and rep["config"]["seed"] == 42
    assert rep["methods_agree"]


def test_identities_pass_and_fault(capsys):
    code, out, _ = run(["identities", "--points", "2e3"], capsys)
    rep = report(out)
    assert code == 0 and rep["pass"]
    assert all(v["max_residual"] <= 1e-10 for v in rep["residuals"].values() if v["gating"])
    code, _, err = run(["identities", "--points", "500", "--inject-fault"], capsys)
    assert code == 2 and "violated" in err and "[" in err


def test_flux_csv_and_dilation(tmp_path, capsys):
    out = tmp_path / "flux.json"
    code, _, _ = run(["flux", "--budget", "262144", "--out", str(out)], capsys)
    rep = json.loads(out.read_text())
    rows = list(csv.DictReader(io.StringIO(out.with_suffix(".csv").read_text())))
    assert code == 0 and rep["decreasing"] and len(rows) == 3
    assert list(rows[0]) == ["eps", "value", "error", "abs_dev"]
    assert rep["dilation"]["difference"] <= 1e-10


def test_flux_degenerate_pole(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# pole at the characteristic point\nz = 0,0,0,0\n")
    code, _, err = run(["flux", "--config", str(cfg)], capsys)
    assert code == 3 and "DegeneratePoint" in err


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("budget = 65536\nmethod = mc\neps-grid = 0.1,0.05,0.02\n")
    code, out, _ = run(["flux", "--config", str(cfg), "--method", "adaptive"], capsys)
    rep = report(out)
    assert rep["config"]["budget"] == 65536
    assert rep["config"]["method"] == "adaptive"
    assert [r["eps"] for r in rep["rows"]] == [0.1, 0.05, 0.02]


def test_bad_config_line(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("budget\n")
    code, _, err = run(["constant", "--config", str(cfg)], capsys)
    assert code == 3 and "key=value" in err


def test_reconstruct(capsys, tmp_path):
    out = tmp_path / "rec.json"
    code, _, _ = run(["reconstruct", "--out", str(out)], capsys)
    rep = json.loads(out.read_text())
    names = [r["config"] for r in rep["rows"]]
    assert code == 0 and names == ["center", "off_center", "near_outside", "zero", "rotated"]
    zero = rep["rows"][3]
    assert zero["term_zero_order"] == 0.0
    assert out.with_suffix(".csv").read_text().startswith("config,target,")


def test_ball_volume(capsys):
    code, out, _ = run(["ball-volume", "--budget", "65536"], capsys)
    rep = report(out)
    assert code == 0
    assert rep["fits"][0]["slope"] == pytest.approx(5.0, abs=1e-9)
    assert all(abs(f["slope"] - 5) <= 0.05 for f in rep["fits"])


def test_ball_volume_needs_four_radii(tmp_path, capsys):
    cfg = tmp_path / "r.cfg"
    cfg.write_text("radii = 1\n")
    code, _, err = run(["ball-volume", "--config", str(cfg)], capsys)
    assert code == 3 and "4 radii" in err


def test_budget_exhausted_exit(capsys):
    code, _, err = run(["reconstruct", "--budget", "4096", "--quad-tol", "1e-9"], capsys)
    assert code == 4 and "BudgetExhausted" in err


def test_tolerance_exit(capsys):
    code, _, _ = run(["ball-volume", "--budget", "4096", "--tol", "1e-12"], capsys)
    assert code == 2


def test_console_script_threads(tmp_path):
    env = {"HEIS_PLANE_THREADS": "1", "PATH": "/usr/bin:/bin"}
    res = subprocess.run([sys.executable, "-m", "heisplane.cli", "identities", "--points", "100"],
                         capture_output=True, text=True, env=env)
    assert res.returncode == 0 and json.loads(res.stdout)["schema"] == "heis-plane/1"


def test_deterministic_reports(capsys):
    a = report(run(["flux", "--budget", "65536", "--method", "mc", "--seed", "0x10"], capsys)[1])
    b = report(run(["flux", "--budget", "65536", "--method", "mc", "--seed", "16"], capsys)[1])
    assert a["rows"] == b["rows"]
