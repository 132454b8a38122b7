import pytest
from fastapi.testclient import TestClient

from app.config import settings
from app.services.pipeline_service import PipelineService
from app.services.workload_service import write_scenario
from main import app
from tests.factories import DEFAULT_CATALOG, SAMPLE_SCENARIO, unreachable_floor_scenario, worked_scenario


@pytest.fixture
def client(monkeypatch):
    monkeypatch.setattr(settings, "DEFAULT_CATALOG", str(DEFAULT_CATALOG))
    return TestClient(app)


def allocation(second, config_id, **assignments):
    return {"second": second, "configuration_id": config_id, "assignments": assignments}


# ==================== HEALTH ====================

def test_health_reports_the_default_catalog(client):
    response = client.get("/health")

    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "healthy"
    assert body["configurations"] == 12
    assert response.headers["X-Request-ID"]
    assert float(response.headers["X-Elapsed-Ms"]) >= 0


def test_catalog_lists_configurations(client):
    response = client.get("/v1/catalog/")

    assert response.status_code == 200
    assert len(response.json()["configurations"]) == 12


# ==================== CATÁLOGO ====================

def test_shared_instance_is_a_violation(client):
    payload = allocation(0, "4-3", **{"a:infer": ["4g@0"], "b:infer": ["4g@0"]})

    response = client.post("/v1/catalog/validate-allocation", json=payload)

    assert response.status_code == 200
    body = response.json()
    assert body["ok"] is False
    assert [v["code"] for v in body["violations"]] == ["instance-shared"]


def test_diff_between_two_steps(client):
    payload = {
        "prev": allocation(0, "2-2-2-1", **{"a:infer": ["2g@4"]}),
        "next": allocation(1, "4-2-1", **{"a:infer": ["4g@0"]}),
    }

    response = client.post("/v1/catalog/diff", json=payload)

    assert response.status_code == 200
    assert response.json()["flags"] == {"a:infer": True}


# ==================== ESCENARIOS ====================

def test_sample_scenario_validates(client):
    response = client.post("/v1/scenarios/validate", json={"path": str(SAMPLE_SCENARIO)})

    assert response.status_code == 200
    body = response.json()
    assert (body["ok"], body["windows"], body["code"]) == (True, 4, None)


def test_infeasible_scenario_reports_its_code(client, tmp_path):
    path = write_scenario(unreachable_floor_scenario(), tmp_path)

    response = client.post("/v1/scenarios/validate", json={"path": str(path)})

    assert response.status_code == 200
    assert response.json()["ok"] is False
    assert response.json()["code"] == "deployment-floor-unsatisfiable"


# ==================== PLANES ====================

def test_plan_for_the_worked_window(client, tmp_path):
    path = write_scenario(worked_scenario(), tmp_path)

    response = client.post("/v1/plans", json={"path": str(path), "predictor": "oracle"})

    assert response.status_code == 200
    body = response.json()
    assert body["score"]["total"] == pytest.approx(12.5)
    assert len(body["allocations"]) == 3


def test_plan_forecasts_the_window_once(client, tmp_path, monkeypatch):
    path = write_scenario(worked_scenario(), tmp_path)
    calls = []
    forecast = PipelineService.forecast

    def counted(self, window):
        calls.append(window)
        return forecast(self, window)

    monkeypatch.setattr(PipelineService, "forecast", counted)

    response = client.post("/v1/plans", json={"path": str(path), "predictor": "oracle"})

    assert response.status_code == 200
    assert calls == [0]
    assert response.json()["score"]["total"] == pytest.approx(12.5)


def test_plan_of_an_infeasible_scenario_conflicts(client, tmp_path):
    path = write_scenario(unreachable_floor_scenario(), tmp_path)

    response = client.post("/v1/plans", json={"path": str(path)})

    assert response.status_code == 409


@pytest.mark.parametrize("payload", [
    {"path": "no/existe.yaml"},
    {"path": str(SAMPLE_SCENARIO), "window": 9},
    {"path": str(SAMPLE_SCENARIO), "solver": "simplex"},
])
def test_bad_plan_requests(client, payload):
    assert client.post("/v1/plans", json=payload).status_code == 400


def test_compare_returns_three_columns(client, tmp_path):
    path = write_scenario(worked_scenario(), tmp_path)

    response = client.post("/v1/compare", json={"path": str(path)})

    assert response.status_code == 200
    assert [c["planner"] for c in response.json()["columns"]] == ["dp", "static", "boundary"]
