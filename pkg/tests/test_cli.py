from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest
from typer.testing import CliRunner

from mintime.main import create_app
from mintime.solver import field_from_csv


@pytest.fixture()
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture()
def out_dir(tmp_path: Path, monkeypatch) -> Path:
    out = tmp_path / "out"
    monkeypatch.setenv("MINTIME_OUT", str(out))
    return out


def invoke(runner: CliRunner, *args: str):
    return runner.invoke(create_app(), list(args))


def write_config(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "run.cfg"
    path.write_text(text, encoding="utf-8")
    return path


def test_version(runner: CliRunner):
    result = invoke(runner, "version")

    assert result.exit_code == 0
    assert result.output.strip() == "0.1.0"


def test_solve_requires_grid_spacing(runner: CliRunner, out_dir: Path):
    result = invoke(runner, "solve", "--scenario", "eikonal")

    assert result.exit_code == 2
    assert "missing key: grid.h" in result.output
    assert not out_dir.exists()


def test_solve_requires_a_scenario_or_model(runner: CliRunner, out_dir: Path):
    result = invoke(runner, "solve", "--h", "0.1")

    assert result.exit_code == 2
    assert "missing key: scenario" in result.output


def test_solve_writes_field_and_meta(runner: CliRunner, out_dir: Path):
    result = invoke(runner, "solve", "--scenario", "eikonal", "--h", "0.1")

    assert result.exit_code == 0, result.output
    assert "solved eikonal" in result.output
    lines = (out_dir / "T.csv").read_text().splitlines()
    assert lines[0] == "x1,x2,T"
    assert len(lines) == 1 + 21 * 21

    meta = json.loads((out_dir / "meta.json").read_text())
    assert meta["tool_version"] == "0.1.0"
    assert meta["scenario"] == "eikonal"
    assert meta["seed"] == 0
    assert meta["converged"] is True
    assert meta["grid"]["counts"] == [21, 21]
    assert meta["constants"]["sources"]["K2"] == "provided"
    assert meta["oracle"]["max_abs_error"] < 0.25


def test_solve_is_byte_identical_across_runs(runner: CliRunner, tmp_path: Path):
    for name in ("a", "b"):
        result = invoke(
            runner, "solve", "--scenario", "example1", "--h", "0.1", "--out", str(tmp_path / name)
        )
        assert result.exit_code == 0, result.output

    for artifact in ("T.csv", "meta.json"):
        assert (tmp_path / "a" / artifact).read_bytes() == (tmp_path / "b" / artifact).read_bytes()


def test_solve_reports_non_convergence(runner: CliRunner, out_dir: Path, tmp_path: Path):
    config = write_config(tmp_path, "scenario = eikonal\ngrid.h = 0.1\nsolver.max_sweeps = 1\n")

    result = invoke(runner, "solve", "--config", str(config))

    assert result.exit_code == 3
    assert json.loads((out_dir / "meta.json").read_text())["converged"] is False


def test_flags_override_config_and_environment(runner: CliRunner, out_dir: Path, tmp_path: Path):
    config = write_config(
        tmp_path,
        "# coarse run\nscenario = eikonal\ngrid.h = 0.2\noutput.dir = ignored\n",
    )
    flag_out = tmp_path / "flag"

    result = invoke(runner, "solve", "--config", str(config), "--h", "0.1", "--out", str(flag_out))

    assert result.exit_code == 0, result.output
    assert len((flag_out / "T.csv").read_text().splitlines()) == 1 + 21 * 21
    assert not out_dir.exists()


def test_inline_model_and_target(runner: CliRunner, out_dir: Path, tmp_path: Path):
    config = write_config(
        tmp_path,
        "\n".join(
            [
                "model.form = ball",
                "model.radius = 1",
                "target.form = ball-complement",
                "grid.lower = -1, -1",
                "grid.upper = 1, 1",
                "grid.h = 0.1",
            ]
        ),
    )

    result = invoke(runner, "solve", "--config", str(config))

    assert result.exit_code == 0, result.output
    assert json.loads((out_dir / "meta.json").read_text())["scenario"] == "ball/ball-complement"


def test_inline_box_model(runner: CliRunner, out_dir: Path, tmp_path: Path):
    config = write_config(
        tmp_path,
        "\n".join(
            [
                "model.form = box",
                "model.generators = -1, 0, 0, -1",
                "target.form = ball-complement",
                "grid.lower = -1, -1",
                "grid.upper = 1, 1",
                "grid.h = 0.1",
            ]
        ),
    )

    result = invoke(runner, "solve", "--config", str(config))

    assert result.exit_code == 0, result.output
    meta = json.loads((out_dir / "meta.json").read_text())
    assert meta["scenario"] == "box/ball-complement"
    assert meta["field"]["model"]["generators"] == [-1, 0, 0, -1]
    field = field_from_csv(out_dir / "T.csv")
    # Fastest exit runs along the diagonal (-1, -1).
    assert field.value_at(np.zeros(2)) == pytest.approx(math.sqrt(0.5), abs=0.15)


@pytest.mark.parametrize(
    ("text", "message"),
    [
        ("scenario = eikonal\ngrid.hh = 0.1\n", "unknown key: grid.hh"),
        ("scenario = eikonal\nscenario = example1\n", "duplicate key: scenario"),
        ("scenario = eikonal\nseed = -1\n", "invalid value for seed"),
        ("scenario = spiral\ngrid.h = 0.1\n", "unknown scenario: spiral"),
        ("scenario eikonal\n", "line 1: expected 'key = value'"),
    ],
)
def test_config_errors_exit_with_code_2(runner, out_dir, tmp_path, text, message):
    config = write_config(tmp_path, text)

    result = invoke(runner, "solve", "--config", str(config))

    assert result.exit_code == 2
    assert message in result.output


def test_shoot_writes_arc(runner: CliRunner, out_dir: Path):
    result = invoke(
        runner,
        "shoot",
        "--scenario",
        "eikonal",
        "--terminal",
        "1,0",
        "--normal=-1,0",
        "--r",
        "0.5",
    )

    assert result.exit_code == 0, result.output
    assert "lambda 1" in result.output
    lines = (out_dir / "arc.csv").read_text().splitlines()
    assert lines[0] == "s,x1,x2,p1,p2"
    assert len(lines) == 1 + 501
    s, x1, x2, p1, p2 = (float(v) for v in lines[-1].split(","))
    assert (s, x1, x2, p1, p2) == pytest.approx((0.5, 0.5, 0.0, -1.0, 0.0), abs=1e-9)


def test_shoot_with_zero_length_gives_a_single_row(runner: CliRunner, out_dir: Path):
    result = invoke(
        runner, "shoot", "--scenario", "example1", "--terminal", "1,-0.5", "--normal=-1,0", "--r", "0"
    )

    assert result.exit_code == 0, result.output
    assert (out_dir / "arc.csv").read_text().splitlines() == ["s,x1,x2,p1,p2", "0,1,-0.5,-1,0"]


def test_shoot_rejects_zero_normal(runner: CliRunner, out_dir: Path):
    result = invoke(
        runner, "shoot", "--scenario", "eikonal", "--terminal", "1,0", "--normal", "0,0", "--r", "0.5"
    )

    assert result.exit_code == 2
    assert "normal vector vanishes" in result.output


def test_shoot_requires_arc_length(runner: CliRunner, out_dir: Path):
    result = invoke(runner, "shoot", "--scenario", "eikonal", "--terminal", "1,0", "--normal=-1,0")

    assert result.exit_code == 2
    assert "missing key: shoot.r" in result.output


def test_verify_petrov_fails_on_example1(runner: CliRunner, out_dir: Path):
    result = invoke(runner, "verify", "petrov", "--scenario", "example1", "--h", "0.05")

    assert result.exit_code == 5
    assert "PASS " in result.output
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["petrov"]["ok"] is False
    assert summary["petrov"]["failure"] == "petrov"
    assert summary["petrov"]["details"]["mu_min"] < 0.1
    records = json.loads((out_dir / "certificates.json").read_text())
    assert records and set(records[0]) == {"base", "value", "threshold", "pass"}


def test_verify_petrov_holds_on_eikonal(runner: CliRunner, out_dir: Path):
    result = invoke(runner, "verify", "petrov", "--scenario", "eikonal", "--h", "0.05")

    assert result.exit_code == 0, result.output
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["petrov"]["details"]["mu_min"] == pytest.approx(1.0)


def test_verify_attainable_on_ball_origin(runner: CliRunner, out_dir: Path, tmp_path: Path):
    config = write_config(
        tmp_path,
        "\n".join(
            [
                "scenario = ball-origin",
                "grid.h = 0.05",
                "verify.samples = 30",
                "verify.constructive_points = 2",
                "verify.theta_samples = 5",
            ]
        ),
    )

    result = invoke(runner, "verify", "attainable", "--config", str(config), "--T", "0.5")

    assert result.exit_code == 0, result.output
    assert "PASS 30/30" in result.output
    constructive = json.loads((out_dir / "constructive.json").read_text())
    assert len(constructive) == 10
    assert all(record["pass"] for record in constructive)
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["attainable"]["details"]["r0"] == pytest.approx(1.0)


def test_verify_attainable_needs_a_horizon(runner: CliRunner, out_dir: Path):
    result = invoke(runner, "verify", "attainable", "--scenario", "ball-origin", "--h", "0.1")

    assert result.exit_code == 2
    assert "missing key: verify.horizon" in result.output


def test_summaries_merge_and_report(runner: CliRunner, out_dir: Path, tmp_path: Path):
    config = write_config(
        tmp_path,
        "scenario = eikonal\ngrid.h = 0.1\nverify.samples = 10\nverify.threshold = 0\n",
    )

    assert invoke(runner, "solve", "--config", str(config)).exit_code == 0
    assert invoke(runner, "verify", "semiconcavity", "--config", str(config)).exit_code == 0
    assert invoke(runner, "verify", "petrov", "--config", str(config)).exit_code == 0
    result = invoke(runner, "report")

    assert result.exit_code == 0, result.output
    summary = json.loads((out_dir / "summary.json").read_text())
    assert list(summary) == ["petrov", "semiconcavity"]
    report = (out_dir / "report.md").read_text()
    assert report.startswith("# mintime report\n")
    assert "| T.csv | 441 |" in report
    assert "| meta.json | 1 |" in report
    assert "| semiconcavity | PASS" in report


def test_report_without_artifacts(runner: CliRunner, out_dir: Path):
    out_dir.mkdir()

    result = invoke(runner, "report")

    assert result.exit_code == 2
    assert "no artifacts found" in result.output


def test_verify_solves_again_for_another_scenario(runner, out_dir, tmp_path):
    assert invoke(runner, "solve", "--scenario", "eikonal", "--h", "0.05").exit_code == 0
    config = write_config(
        tmp_path,
        "\n".join(
            [
                "scenario = ball-origin",
                "grid.h = 0.05",
                "verify.samples = 30",
                "verify.constructive_points = 2",
                "verify.theta_samples = 5",
            ]
        ),
    )

    result = invoke(runner, "verify", "attainable", "--config", str(config), "--T", "0.5")

    assert result.exit_code == 0, result.output
    assert "PASS 30/30" in result.output
    meta = json.loads((out_dir / "meta.json").read_text())
    assert meta["field"]["scenario"] == "eikonal"


def test_verify_reuses_a_matching_field(runner: CliRunner, out_dir: Path, tmp_path: Path):
    config = write_config(
        tmp_path, "scenario = eikonal\ngrid.h = 0.1\nverify.samples = 10\nverify.threshold = 0\n"
    )
    assert invoke(runner, "solve", "--config", str(config)).exit_code == 0
    meta = json.loads((out_dir / "meta.json").read_text())
    assert meta["field"]["solver"]["velocity_samples"] == 32

    result = invoke(runner, "verify", "semiconcavity", "--config", str(config))

    assert result.exit_code == 0, result.output
    assert "Reusing" in result.output


def test_verify_hypo_on_eikonal(runner: CliRunner, out_dir: Path, tmp_path: Path):
    config = write_config(tmp_path, "scenario = eikonal\ngrid.h = 0.05\nverify.samples = 20\n")

    result = invoke(runner, "verify", "hypo", "--config", str(config))

    assert result.exit_code == 0, result.output
    assert "PASS " in result.output
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["hypo"]["ok"] is True
    records = json.loads((out_dir / "certificates.json").read_text())
    assert len(records) == 20
    assert list(records[0]) == [
        "base",
        "normal",
        "radius",
        "sigma_residual",
        "slack",
        "pass",
        "tested_count",
    ]
