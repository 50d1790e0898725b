import json
import os
import pathlib
import subprocess

import pytest

CLI = os.environ.get("RBSDE_CLI")
SCENARIOS = pathlib.Path(__file__).resolve().parents[2] / "scenarios"

pytestmark = pytest.mark.skipif(CLI is None, reason="RBSDE_CLI not set")


def run(*args, **kwargs):
    return subprocess.run([CLI, *args], capture_output=True, text=True, **kwargs)


def test_solve_writes_solution_and_diagnostics(tmp_path):
    result = run("solve", str(SCENARIOS / "two_period.json"), "--out", str(tmp_path))
    assert result.returncode == 0, result.stderr
    csv = (tmp_path / "solution.csv").read_text()
    assert "node,0,0,0,0,0,0.75,0.75,0,0,0" in csv
    diag = json.loads((tmp_path / "diagnostics.json").read_text())
    assert diag["converged"]


def test_solve_output_is_byte_identical_across_runs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run("solve", str(SCENARIOS / "affine.json"), "--out", str(out)).returncode == 0
    assert (a / "solution.csv").read_bytes() == (b / "solution.csv").read_bytes()
    assert (a / "diagnostics.json").read_bytes() == (b / "diagnostics.json").read_bytes()


def test_campaign_mode_with_jobs(tmp_path):
    result = run(
        "solve",
        str(SCENARIOS / "two_period.json"),
        str(SCENARIOS / "constant.json"),
        str(SCENARIOS / "right_jump.json"),
        "--out",
        str(tmp_path),
        "--jobs",
        "3",
    )
    assert result.returncode == 0, result.stderr
    for stem in ("two_period", "constant", "right_jump"):
        assert (tmp_path / stem / "solution.csv").exists()


def test_verify_passes_on_well_posed_scenarios(tmp_path):
    for name in ("two_period.json", "affine.json", "right_jump.json"):
        result = run("verify", str(SCENARIOS / name), "--out", str(tmp_path))
        assert result.returncode == 0, (name, result.stderr)
        report = json.loads((tmp_path / "verify.json").read_text())
        assert report["all_pass"], (name, report)


def test_compare_orders_the_pair(tmp_path):
    result = run("compare", str(SCENARIOS / "compare_pair.json"), "--out", str(tmp_path))
    assert result.returncode == 0, result.stderr
    report = json.loads((tmp_path / "compare.json").read_text())
    assert report["in_hypothesis"]
    assert report["conclusion_holds"]
    assert report["y1_root"] <= report["y2_root"] + 1e-10


def test_oracle_prints_matching_values():
    result = run("oracle", str(SCENARIOS / "two_period.json"))
    assert result.returncode == 0, result.stderr
    assert "enumeration 0.75" in result.stdout
    assert "backward-induction 0.75" in result.stdout


def test_malformed_kernel_exits_2_and_names_the_period(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(
        json.dumps(
            {
                "horizon": 1.0,
                "periods": 2,
                "marks": ["a", "b"],
                "event_prob": 0.5,
                "mark_kernel": [[0.5, 0.5], [0.5, 0.4]],
                "obstacle": {"type": "constant", "value": 0.0},
            }
        )
    )
    result = run("solve", str(bad), "--out", str(tmp_path))
    assert result.returncode == 2
    assert "period 2" in result.stderr


def test_log_env_var_controls_verbosity(tmp_path):
    env = dict(os.environ, RBSDE_LOG="info")
    result = subprocess.run(
        [CLI, "solve", str(SCENARIOS / "two_period.json"), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
        env=env,
    )
    assert result.returncode == 0
    assert "[rbsde]" in result.stderr
    quiet = run("solve", str(SCENARIOS / "two_period.json"), "--out", str(tmp_path))
    assert "[rbsde]" not in quiet.stderr


def test_nonconvergence_exits_3(tmp_path):
    result = run(
        "solve",
        str(SCENARIOS / "affine.json"),
        "--out",
        str(tmp_path),
        "--max-iter",
        "1",
        "--tol",
        "1e-14",
    )
    assert result.returncode == 3
    assert "iterations" in result.stderr
