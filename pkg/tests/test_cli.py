import json
import subprocess
import sys

import pytest

from nlsint import catalog, save_scenario
from nlsint.cli import main

SMALL = "-5,5,101,0,1,21"


def run(tmp_path, *argv):
    code = main([*argv, "--out", str(tmp_path)])
    return code, json.loads((tmp_path / "report.json").read_text())


def test_check_catalog_entry_passes(tmp_path):
    code, rep = run(tmp_path, "check", "--catalog", "case3", f"--grid={SMALL}")
    assert code == 0
    assert rep["exit_status"] == 0
    assert [r["condition"] for r in rep["reports"]] == ["fg", "gamma", "v", "painleve"]


def test_check_detects_wrong_potential(tmp_path):
    code, rep = run(tmp_path, "check", "--catalog", "case1", "--coef", "v=x^2", f"--grid={SMALL}")
    assert code == 1
    bad = [r for r in rep["reports"] if not r["pass"]]
    assert [r["condition"] for r in bad] == ["v", "painleve"]


def test_check_scenario_file_and_param(tmp_path):
    path = tmp_path / "hd.json"
    save_scenario(catalog("hd-case1", n=3), path)
    code, rep = run(tmp_path, "check", "--scenario", str(path), "--grid=1,3,201,0,1,11")
    assert code == 0
    code, _ = run(tmp_path, "check", "--catalog", "hd-case1", "--param", "n=1", "--grid=1,3,201,0,1,11")
    assert code == 0


def test_check_env_tolerance(tmp_path, monkeypatch):
    monkeypatch.setenv("NLS_TOL", "1e-30")
    code, rep = run(tmp_path, "check", "--catalog", "case4", "--grid=0.5,3,101,0,1,11")
    assert rep["reports"][0]["tolerance"] == 1e-30
    assert code in (0, 1)


@pytest.mark.parametrize(
    "argv",
    [
        ["check"],
        ["check", "--catalog", "nope"],
        ["check", "--catalog", "case1", "--grid=1,0,5"],
        ["check", "--catalog", "case1", "--coef", "v=x^^2"],
        ["construct", "--g", "0", "--grid=0,1,11,0,1,11"],
        ["simulate", "--scenario", "case2", "--dt", "0.1", "--T", "1"],
    ],
)
def test_usage_errors(tmp_path, argv):
    code, rep = run(tmp_path, *argv)
    assert code == 2
    assert rep["error"]


def test_construct_writes_scenario_and_v(tmp_path):
    code, rep = run(tmp_path, "construct", "--g", "1 + x^2", "--c2", "exp(0.3*t)", "--grid=-1,1,201,0,1,11")
    assert code == 0
    assert {"scenario.json", "v.csv"} <= set(rep["artifacts"])
    assert (tmp_path / "v.csv").read_text().startswith("x,t,")


def test_map_eq19(tmp_path):
    code, rep = run(tmp_path, "map", "--gauge", "eq19", "--grid=0.7,3,201,0.5,2,31")
    assert code == 0
    assert (tmp_path / "psi.csv").exists()


def test_lax(tmp_path):
    code, rep = run(tmp_path, "lax", "--scenario", "case1", "--akns", "1.0", f"--grid={SMALL}")
    assert code == 0
    assert [r["condition"] for r in rep["reports"]] == ["eq2", "eq8", "eq5", "eq3", "eq7", "eq4", "eq6", "eq1"]


def test_simulate(tmp_path):
    code, rep = run(tmp_path, "simulate", "--scenario", "case1", "--dt", "0.01", "--T", "0.2",
                    "--grid=-20,20,513,0,1,2", "--accuracy", "1e-2")
    assert code == 0
    assert rep["metrics"]["linf_error"] <= 1e-2


def test_simulate_accuracy_failure(tmp_path):
    code, _ = run(tmp_path, "simulate", "--scenario", "case1", "--dt", "0.1", "--T", "0.2",
                  "--grid=-20,20,65,0,1,2", "--accuracy", "1e-8")
    assert code == 1


def test_catalog_list(tmp_path, capsys):
    code, rep = run(tmp_path, "catalog", "--list")
    assert code == 0
    assert len(rep["metrics"]["entries"]) == 8
    assert "eq19" in capsys.readouterr().out


def test_report_is_deterministic(tmp_path):
    reports = []
    for k in range(2):
        d = tmp_path / str(k)
        _, rep = run(d, "check", "--catalog", "all", f"--grid={SMALL}")
        rep.pop("wall_time")
        reports.append(json.dumps(rep, sort_keys=True))
    assert reports[0] == reports[1]


def test_parallel_jobs_match_serial(tmp_path):
    _, a = run(tmp_path / "a", "check", "--catalog", "case1", "--catalog", "case2", f"--grid={SMALL}")
    _, b = run(tmp_path / "b", "check", "--catalog", "case1", "--catalog", "case2", f"--grid={SMALL}", "--jobs", "2")
    assert a["reports"] == b["reports"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "nlsint", "catalog", "--list", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "case1" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "nlsint", "frobnicate"], capture_output=True, text=True)
    assert proc.returncode == 2


def test_construct_power_law_matches_catalog(tmp_path):
    code, rep = run(tmp_path, "construct", "--g", "x^1", "--grid=0.5,3,401,0,1,21")
    assert code == 0
    assert all(r["pass"] for r in rep["reports"])


def test_construct_harmonic(tmp_path):
    code, rep = run(tmp_path, "construct", "--g", "1", "--c2", "exp(0.3*t)", "--grid=-5,5,201,0,1,21")
    assert code == 0
    scn = json.loads((tmp_path / "scenario.json").read_text())
    assert scn["coefficients"]["gamma"] == "(-0.15)"


def test_simulate_spec_run(tmp_path):
    code, rep = run(tmp_path, "simulate", "--scenario", "case1", "--dt", "1e-3", "--T", "1")
    assert code == 0
    assert rep["metrics"]["linf_error"] <= 1e-3


def test_lax_zero_lambda(tmp_path):
    code, rep = run(tmp_path, "lax", "--scenario", "case1", "--akns", "0", f"--grid={SMALL}")
    assert code == 0 and all(r["max_abs"] == 0.0 for r in rep["reports"])
