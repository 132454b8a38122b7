import pytest
import yaml

from app.exceptions import ScenarioError
from app.services.workload_service import (
    derive_rt_table, generate_bursty_pair, generate_uniform, load_scenario, rescale_counts, rescale_window,
    slo_target, write_scenario, write_trace
)
from tests.factories import DEFAULT_CATALOG, SAMPLE_SCENARIO, profile, worked_scenario


def write_files(directory, document, counts):
    """Escenario mínimo en disco con el catálogo por defecto"""
    document = {"catalog": str(DEFAULT_CATALOG), "trace": "trace.csv", **document}
    path = directory / "scenario.yaml"
    path.write_text(yaml.safe_dump(document), encoding="utf-8")
    write_trace(directory / "trace.csv", counts)
    return path


def tiny_document(**overrides):
    document = {
        "name": "tiny",
        "window_size": 4,
        "models": [{
            "name": "a",
            "gflops": 1.0,
            "min_deploy_gpcs": 1,
            "capability": {1: 10, 2: 20, 3: 30, 4: 40, 7: 70},
            "latency_full": 0.1,
        }],
        "windows": [
            {"retraining": {"a": {"data_volume": 10, "accuracy_pre": 0.6, "accuracy_post": 0.8}}},
            {"retraining": {"a": {"data_volume": 10, "accuracy_post": 0.9}}},
        ],
    }
    document.update(overrides)
    return document


# ==================== CARGA ====================

def test_sample_scenario_loads():
    scenario = load_scenario(SAMPLE_SCENARIO)

    assert scenario.window_size == 200
    assert scenario.window_count == 4
    assert scenario.model_names == ["resnet50", "vit"]
    assert all(len(series) == 800 for series in scenario.trace.counts.values())
    assert len(scenario.catalog.configurations) == 12


def test_accuracy_carries_over_between_windows():
    scenario = load_scenario(SAMPLE_SCENARIO)

    for name in scenario.model_names:
        assert scenario.windows[2].retraining[name].accuracy_pre == \
            scenario.windows[1].retraining[name].accuracy_post


def test_trace_one_second_short(tmp_path):
    path = write_files(tmp_path, tiny_document(), {"a": [1] * 7})

    with pytest.raises(ScenarioError) as error:
        load_scenario(path)

    assert error.value.code == "trace-length-mismatch"


def test_unknown_model_in_trace(tmp_path):
    path = write_files(tmp_path, tiny_document(), {"a": [1] * 8, "ghost": [1] * 8})

    with pytest.raises(ScenarioError) as error:
        load_scenario(path)

    assert error.value.code == "trace-unknown-model"


def test_unknown_key_reports_field_path(tmp_path):
    path = write_files(tmp_path, tiny_document(colour="red"), {"a": [1] * 8})

    with pytest.raises(ScenarioError) as error:
        load_scenario(path)

    assert error.value.field_path == "colour"


def test_first_window_needs_accuracy_pre(tmp_path):
    document = tiny_document()
    del document["windows"][0]["retraining"]["a"]["accuracy_pre"]
    path = write_files(tmp_path, document, {"a": [1] * 8})

    with pytest.raises(ScenarioError) as error:
        load_scenario(path)

    assert error.value.field_path == "windows.0.retraining.a.accuracy_pre"


def test_missing_scenario_file(tmp_path):
    with pytest.raises(ScenarioError) as error:
        load_scenario(tmp_path / "missing.yaml")

    assert error.value.code == "missing-file"


def test_rt_table_is_derived_for_sizes_above_the_floor(tmp_path):
    path = write_files(tmp_path, tiny_document(), {"a": [1] * 8})

    scenario = load_scenario(path)

    # RT[k] = ceil(3 · 10 / capability[k])
    assert scenario.windows[0].retraining["a"].rt_table == {1: 3, 2: 2, 3: 1, 4: 1, 7: 1}
    assert scenario.windows[1].retraining["a"].accuracy_pre == 0.8


def test_serialized_scenario_round_trips(tmp_path):
    scenario = load_scenario(SAMPLE_SCENARIO)

    reloaded = load_scenario(write_scenario(scenario, tmp_path))

    assert reloaded.models == scenario.models
    assert reloaded.windows == scenario.windows
    assert reloaded.trace == scenario.trace
    assert reloaded.catalog.configurations == scenario.catalog.configurations
    assert reloaded.window_size == scenario.window_size


# ==================== REGLAS DEL PERFIL ====================

def test_rt_follows_the_three_times_rule():
    model = profile("a", {1: 20, 4: 64, 7: 100})

    table = derive_rt_table(model, 1000)

    assert table[7] == 30
    assert table[4] == 47
    assert table[1] == 150


def test_rt_skips_sizes_below_the_floor():
    model = profile("a", {1: 0, 2: 20, 7: 100}, floor=2)

    assert sorted(derive_rt_table(model, 100)) == [2, 7]


def test_rt_rejects_empty_volume():
    with pytest.raises(ScenarioError):
        derive_rt_table(profile("a", {1: 20}), 0)


@pytest.mark.parametrize("latency, target", [(0.010, 0.020), (0.5, 1.0)])
def test_slo_is_twice_the_full_gpu_latency(latency, target):
    assert slo_target(profile("a", {1: 1}, latency=latency)) == pytest.approx(target)


def test_slo_needs_a_latency():
    with pytest.raises(ScenarioError) as error:
        slo_target(profile("a", {1: 1}, latency=0.0))

    assert error.value.code == "slo-undefined"


# ==================== GRANULARIDAD ====================

def test_rescale_counts_sums_and_splits():
    assert rescale_counts([1, 2, 3, 4], 2) == [3, 7]
    assert rescale_counts([3, 2], 0.5) == [2, 1, 1, 1]


def test_half_second_granularity_doubles_the_axis():
    scenario = worked_scenario(arrivals=(5, 4, 6))

    problem = rescale_window(scenario, 0, {"m": [5, 4, 6]}, 0.5)
    model = problem.models[0]

    assert problem.steps == 6
    assert problem.step_seconds == 0.5
    assert model.capability == {3: 3.0, 4: 4.0}
    assert model.rt_steps == {4: 2, 3: 4}
    assert model.arrivals == (3, 2, 2, 2, 3, 3)


def test_granularity_must_divide_the_window():
    scenario = worked_scenario()

    with pytest.raises(ScenarioError) as error:
        rescale_window(scenario, 0, None, 2.0)

    assert error.value.code == "granularity-invalid"


def test_window_out_of_range():
    with pytest.raises(ScenarioError) as error:
        rescale_window(worked_scenario(), 1)

    assert error.value.code == "window-out-of-range"


# ==================== GENERADORES ====================

def test_bursty_pair_is_anti_correlated():
    counts = generate_bursty_pair(20, period=10, high=60, low=5)

    assert counts["a"][:5] == [60] * 5
    assert counts["a"][5:10] == [5] * 5
    assert counts["b"][:5] == [5] * 5
    assert all(a + b == 65 for a, b in zip(counts["a"], counts["b"]))


def test_jittered_generators_are_seeded():
    first = generate_bursty_pair(50, jitter=True, seed=3)
    second = generate_bursty_pair(50, jitter=True, seed=3)

    assert first == second
    assert generate_uniform(10, 7) == {"a": [7] * 10}
    assert generate_uniform(30, 7, jitter=True, seed=1) == generate_uniform(30, 7, jitter=True, seed=1)
