import pytest
from click.testing import CliRunner

from app import config
from app.cli import EXIT_BAD_INPUT, EXIT_INFEASIBLE, EXIT_OK, cli
from app.schemas import run_schema
from app.schemas.run_schema import RunConfig
from app.services.workload_service import write_scenario
from tests.factories import SAMPLE_SCENARIO, unreachable_floor_scenario, worked_scenario


@pytest.fixture
def runner():
    return CliRunner()


def test_validate_sample_scenario(runner):
    result = runner.invoke(cli, ["validate", "--scenario", str(SAMPLE_SCENARIO)])

    assert result.exit_code == EXIT_OK
    assert "ok: 4 ventanas" in result.output


def test_infeasible_scenario_exits_with_one(runner, tmp_path):
    path = write_scenario(unreachable_floor_scenario(), tmp_path)

    result = runner.invoke(cli, ["validate", "--scenario", str(path)])

    assert result.exit_code == EXIT_INFEASIBLE
    assert "deployment-floor" in result.output


def test_missing_scenario_exits_with_two(runner, tmp_path):
    result = runner.invoke(cli, ["validate", "--scenario", str(tmp_path / "nope.yaml")])

    assert result.exit_code == EXIT_BAD_INPUT
    assert "missing-file" in result.output


def test_bad_predictor_exits_with_two(runner):
    result = runner.invoke(cli, ["plan", "--scenario", str(SAMPLE_SCENARIO), "--predictor", "arima"])

    assert result.exit_code == EXIT_BAD_INPUT


def test_plan_and_emit_lp_write_artifacts(runner, tmp_path):
    path = write_scenario(worked_scenario(), tmp_path / "scenario")
    out = tmp_path / "out"

    planned = runner.invoke(cli, ["plan", "--scenario", str(path), "--out", str(out), "--predictor", "oracle"])
    emitted = runner.invoke(cli, ["emit-lp", "--scenario", str(path), "--out", str(out), "--eq11-as-printed"])

    assert planned.exit_code == EXIT_OK
    assert emitted.exit_code == EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == ["model_w0.lp", "plan_w0.json"]


def test_simulate_prints_one_line_per_mode(runner, tmp_path):
    path = write_scenario(worked_scenario(), tmp_path / "scenario")

    result = runner.invoke(
        cli, ["simulate", "--scenario", str(path), "--out", str(tmp_path / "out"), "--mode", "fluid"]
    )

    assert result.exit_code == EXIT_OK
    assert "fluid: goodput=0.833333" in result.output


def test_validate_accepts_the_printed_reconfiguration_flag(runner):
    result = runner.invoke(cli, ["validate", "--scenario", str(SAMPLE_SCENARIO), "--eq11-as-printed"])

    assert result.exit_code == EXIT_OK


@pytest.mark.parametrize("flag", ["--eq11-as-printed", "--literal-reconfiguration"])
def test_printed_reconfiguration_flags_drop_the_move_indicator(runner, tmp_path, flag):
    path = write_scenario(worked_scenario(), tmp_path / "scenario")
    out = tmp_path / "out"

    result = runner.invoke(cli, ["emit-lp", "--scenario", str(path), "--out", str(out), flag])

    assert result.exit_code == EXIT_OK
    assert "mv_m0_s1" not in (out / "model_w0.lp").read_text(encoding="utf-8")


def test_corrected_reconfiguration_keeps_the_move_indicator(runner, tmp_path):
    path = write_scenario(worked_scenario(), tmp_path / "scenario")
    out = tmp_path / "out"

    result = runner.invoke(cli, ["emit-lp", "--scenario", str(path), "--out", str(out)])

    assert result.exit_code == EXIT_OK
    assert "mv_m0_s1" in (out / "model_w0.lp").read_text(encoding="utf-8")


def test_printed_reconfiguration_follows_the_environment(monkeypatch):
    monkeypatch.setenv("MIGSCHED_EQ11_AS_PRINTED", "true")
    monkeypatch.setattr(config, "settings", config.Settings())
    monkeypatch.setattr(run_schema, "settings", config.settings)

    assert RunConfig.from_settings(scenario=str(SAMPLE_SCENARIO)).literal_reconfiguration is True
