import json

import pytest

from app.schemas.run_schema import RunConfig
from app.services.pipeline_service import (
    PipelineService, run_compare, run_emit_lp, run_plan, run_simulate, run_validate
)
from app.services.plan_model_service import validate_lp
from app.services.workload_service import write_scenario
from tests.factories import make_scenario, profile, retraining, sub_catalog

CAPABILITY = {1: 2, 2: 4, 3: 5, 4: 7}
RT = {1: 2, 2: 1, 3: 1, 4: 1}


@pytest.fixture
def scenario_path(tmp_path):
    """Dos ventanas de 4 s y dos modelos; 3-2-1-1 deja lugar al reparto estático"""
    scenario = make_scenario(
        sub_catalog("4-3", "4-2-1", "3-2-1-1"),
        [profile("a", CAPABILITY, psi=0.5), profile("b", CAPABILITY, psi=0.5)],
        {"a": [3, 1, 4, 1, 5, 9, 2, 6], "b": [2, 7, 1, 8, 2, 8, 1, 8]},
        [
            {"a": retraining(RT, pre=0.5, post=0.75), "b": retraining(RT, pre=0.25, post=0.75)},
            {"a": retraining(RT, pre=0.75, post=1.0), "b": retraining(RT, pre=0.75, post=1.0)},
        ],
        window_size=4,
        name="pipeline"
    )
    return str(write_scenario(scenario, tmp_path / "scenario"))


def config_for(path, out, **overrides):
    values = {"scenario": path, "predictor": "persistence", "seed": 3, "out": str(out)}
    values.update(overrides)
    return RunConfig(**values)


def read_all(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


# ==================== PREDICCIÓN ====================

def test_first_window_falls_back_to_the_oracle(scenario_path, tmp_path):
    service = PipelineService(config_for(scenario_path, tmp_path))

    first, first_label = service.forecast(0)
    second, second_label = service.forecast(1)

    assert first_label == "oracle"
    assert first.series("a") == (3, 1, 4, 1)
    assert second_label == "persistence"
    assert second.series("b") == (2, 7, 1, 8)


# ==================== COMANDOS ====================

def test_plan_writes_one_document_per_window(scenario_path, tmp_path):
    paths = run_plan(config_for(scenario_path, tmp_path / "out"))

    assert [p.name for p in paths] == ["plan_w0.json", "plan_w1.json"]
    document = json.loads(paths[1].read_text(encoding="utf-8"))
    assert document["planner"] == "dp"
    assert document["predictor"] == "persistence"
    assert len(document["allocations"]) == 4


def test_simulate_writes_metrics_for_both_modes(scenario_path, tmp_path):
    metrics = run_simulate(config_for(scenario_path, tmp_path / "out"))

    assert set(metrics) == {"fluid", "requests"}
    assert (tmp_path / "out" / "metrics.json").exists()
    header = (tmp_path / "out" / "metrics.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header == "window,model,goodput,slo,acc,reconfigs"
    assert (tmp_path / "out" / "metrics_requests.csv").exists()


def test_compare_lists_the_three_planners(scenario_path, tmp_path):
    report = run_compare(config_for(scenario_path, tmp_path / "out", predictor="oracle"))

    assert [c.planner for c in report.columns] == ["dp", "static", "boundary"]
    assert report.columns[0].preinit is True
    dp = report.columns[0].planned_goodput
    assert all(dp >= c.planned_goodput - 1e-9 for c in report.columns[1:])


def test_emit_lp_writes_valid_documents(scenario_path, tmp_path):
    paths = run_emit_lp(config_for(scenario_path, tmp_path / "lp"))

    assert [p.name for p in paths] == ["model_w0.lp", "model_w1.lp"]
    for path in paths:
        assert validate_lp(path.read_text(encoding="utf-8")) == []


def test_validate_returns_every_window(scenario_path, tmp_path):
    assert run_validate(config_for(scenario_path, tmp_path)) == [0, 1]


# ==================== DETERMINISMO ====================

def test_simulate_is_byte_identical_across_runs(scenario_path, tmp_path):
    run_simulate(config_for(scenario_path, tmp_path / "first"))
    run_simulate(config_for(scenario_path, tmp_path / "second"))

    assert read_all(tmp_path / "first") == read_all(tmp_path / "second")


def test_worker_count_does_not_change_the_artifacts(scenario_path, tmp_path):
    run_compare(config_for(scenario_path, tmp_path / "one", workers=1))
    run_compare(config_for(scenario_path, tmp_path / "three", workers=3))

    assert read_all(tmp_path / "one") == read_all(tmp_path / "three")
