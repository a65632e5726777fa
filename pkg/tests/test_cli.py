"""CLI: calibration artifacts, scenario runs, policy comparison, determinism."""

import json
import os
import subprocess
import sys

import pytest

from pnav.cli import main
from conftest import REPO_ROOT


@pytest.fixture(scope="module")
def calib_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("calib")
    # small but adequate training run to keep the suite quick
    rc = main(["calibrate", "--out", str(out), "--samples", "3000", "--epochs", "500"])
    assert rc == 0
    return out


@pytest.fixture(scope="module")
def mini_scenario(tmp_path_factory):
    d = tmp_path_factory.mktemp("scn")
    path = d / "mini.scn"
    path.write_text(
        "map = corridor.map\n"
        "start.x = 2.5\nstart.y = 3.0\n"
        "goal.1 = 5.5 3.0\n"
        "loops = 1\nseed = 3\n"
        "planner.clearance_cap = 0.5\ncoordinator.t_d = 1.0\n"
        "sensor.beams = 120\nsim.time_limit = 120.0\n"
    )
    # the map path in a scenario is relative to the scenario file
    import shutil

    shutil.copy(os.path.join(REPO_ROOT, "scenarios", "corridor.map"), d / "corridor.map")
    return path


def test_calibrate_writes_all_artifacts(calib_dir):
    names = sorted(os.listdir(calib_dir))
    assert names == [
        "embedded_model.txt",
        "motor_model.txt",
        "motor_plant.txt",
        "timeline_profile.txt",
    ]


def test_calibrate_is_reproducible(calib_dir, tmp_path):
    again = tmp_path / "calib2"
    rc = main(["calibrate", "--out", str(again), "--samples", "3000", "--epochs", "500"])
    assert rc == 0
    for name in os.listdir(calib_dir):
        a = (calib_dir / name).read_bytes()
        b = (again / name).read_bytes()
        assert a == b, f"{name} differs between identical calibrate runs"


def test_run_writes_csv_and_summary(calib_dir, mini_scenario, tmp_path):
    csv = tmp_path / "m.csv"
    rc = main([
        "run", "--scenario", str(mini_scenario), "--policy", "PNAV",
        "--out", str(csv), "--calib-dir", str(calib_dir),
    ])
    assert rc == 0
    lines = csv.read_text().splitlines()
    assert lines[0] == "# pnav-metrics v1"
    assert lines[1].startswith("time_s,mode,f_cpu_mhz,f_gpu_mhz,")
    assert len(lines) > 10
    summary = json.loads((tmp_path / "m.csv.summary.json").read_text())
    assert summary["policy"] == "PNAV"
    assert summary["goals_reached"] == 1


def test_run_is_deterministic(calib_dir, mini_scenario, tmp_path):
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        rc = main([
            "run", "--scenario", str(mini_scenario), "--policy", "SP_UDVFS",
            "--seed", "9", "--out", str(path), "--calib-dir", str(calib_dir),
            "--summary", str(tmp_path / (name + ".json")),
        ])
        assert rc == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert (tmp_path / "a.csv.json").read_bytes() == (tmp_path / "b.csv.json").read_bytes()


def test_run_missing_calibration_is_instructive(mini_scenario, tmp_path, capsys):
    rc = main([
        "run", "--scenario", str(mini_scenario), "--policy", "SP",
        "--out", str(tmp_path / "x.csv"), "--calib-dir", str(tmp_path / "nope"),
    ])
    assert rc == 2
    assert "pnav calibrate" in capsys.readouterr().err


def test_run_bad_scenario_reports_line(calib_dir, tmp_path, capsys):
    bad = tmp_path / "bad.scn"
    bad.write_text("map = corridor.map\nstart.x = 2.5\nstart.y = 3.0\ngoal.1 = x y\n")
    rc = main([
        "run", "--scenario", str(bad), "--policy", "SP",
        "--out", str(tmp_path / "x.csv"), "--calib-dir", str(calib_dir),
    ])
    assert rc == 2
    assert "line 4" in capsys.readouterr().err


def test_unknown_policy_is_usage_error(mini_scenario, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main([
            "run", "--scenario", str(mini_scenario), "--policy", "WARP",
            "--out", str(tmp_path / "x.csv"),
        ])
    assert exc.value.code == 2


def test_compare_requires_two_policies(calib_dir, mini_scenario, tmp_path, capsys):
    rc = main([
        "compare", "--scenario", str(mini_scenario), "--policies", "SP",
        "--out", str(tmp_path / "r.json"), "--calib-dir", str(calib_dir),
    ])
    assert rc == 2


def test_compare_emits_report_with_reductions(calib_dir, mini_scenario, tmp_path):
    report_path = tmp_path / "report.json"
    rc = main([
        "compare", "--scenario", str(mini_scenario), "--policies", "SP,PNAV",
        "--seed", "3", "--out", str(report_path), "--calib-dir", str(calib_dir),
        "--csv-dir", str(tmp_path / "csvs"),
    ])
    assert rc == 0
    report = json.loads(report_path.read_text())
    assert set(report["summaries"]) == {"SP", "PNAV"}
    red = report["reductions_vs_pnav"]["SP"]
    sp = report["summaries"]["SP"]
    pnav = report["summaries"]["PNAV"]
    want = (sp["total_energy_j"] - pnav["total_energy_j"]) / sp["total_energy_j"]
    assert red["energy"] == pytest.approx(want, rel=1e-12)
    # both runs must describe the identical scenario
    assert sp["map"] == pnav["map"] and sp["goals"] == pnav["goals"] and sp["seed"] == pnav["seed"]
    assert os.path.exists(tmp_path / "csvs" / "metrics_SP.csv")
    assert os.path.exists(tmp_path / "csvs" / "metrics_PNAV.csv")


def test_cli_entrypoint_runs_as_module():
    proc = subprocess.run(
        [sys.executable, "-m", "pnav.cli", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "calibrate" in proc.stdout and "compare" in proc.stdout
