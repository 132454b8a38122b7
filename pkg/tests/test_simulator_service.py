import pytest

from app.exceptions import InfeasiblePlanError, MigSchedError
from app.schemas.metrics_schema import JobMetrics, Metrics, WindowMetrics
from app.services.dp_solver import solve_problem_dp
from app.services.plan_evaluation_service import PlanTimeline
from app.services.simulator_service import (
    combine, goodput_report, metrics_rows, overhead_losses, run_fluid, run_requests
)
from app.services.workload_service import rescale_window
from tests.factories import (
    feasible_seeds, forecast_of, make_scenario, profile, random_scenario, retraining, sequence, step, sub_catalog,
    worked_plan
)


def steady_scenario(steps, arrivals, capability, latency, pre=0.5, post=0.5):
    return make_scenario(
        sub_catalog("4-3"),
        [profile("m", {3: capability, 4: capability}, floor=3, latency=latency)],
        {"m": [arrivals] * steps},
        [{"m": retraining({3: 1, 4: 1}, pre=pre, post=post)}]
    )


def steady_plan(steps):
    return sequence(
        step(0, "4-3", m_infer=["3g@4"], m_retrain=["4g@0"]),
        *(step(s, "4-3", m_infer=["3g@4"]) for s in range(1, steps))
    )


# ==================== MODO FLUIDO ====================

def test_fluid_matches_the_planned_score(worked):
    metrics = run_fluid(worked_plan(), None, worked)
    job = metrics.job("m")

    assert job.valid == pytest.approx(12.5)
    assert job.received == 15.0
    assert job.dropped == 0.0
    assert job.goodput == pytest.approx(12.5 / 15)


@pytest.mark.parametrize("index", range(0, 40, 3))
def test_fluid_valid_equals_the_dp_objective(index):
    scenario = random_scenario(feasible_seeds(40)[index])
    forecast = forecast_of(scenario)
    plan, total = solve_problem_dp(rescale_window(scenario, 0, forecast))

    metrics = run_fluid(plan, forecast.counts, scenario)

    assert metrics.valid == pytest.approx(total, abs=1e-9)


def test_long_overhead_spills_into_the_next_steps():
    scenario = make_scenario(
        sub_catalog("4-3"), [profile("m", {3: 6, 4: 8}, floor=3, psi=2.5)], {"m": [5] * 5},
        [{"m": retraining({4: 1, 3: 2})}]
    )
    plan = sequence(
        step(0, "4-3", m_retrain=["4g@0"], m_infer=["3g@4"]),
        *(step(s, "4-3", m_infer=["4g@0"]) for s in range(1, 5))
    )

    timeline = PlanTimeline(rescale_window(scenario, 0, {"m": [5] * 5}), plan, None)

    assert overhead_losses(timeline, "m").tolist() == [0.0, 1.0, 1.0, 0.5, 0.0]
    assert run_fluid(plan, None, scenario).job("m").valid == pytest.approx(2.5 + 0 + 0 + 4 + 5)


def test_zero_arrivals_count_as_full_goodput():
    scenario = steady_scenario(3, 0, 5, 0.1)

    job = run_fluid(steady_plan(3), None, scenario).job("m")

    assert job.received == 0
    assert (job.goodput, job.slo_attainment, job.accuracy) == (1.0, 1.0, 1.0)


def test_infeasible_plans_are_not_simulated(worked):
    plan = sequence(*(step(s, "4-3", m_infer=["4g@0"]) for s in range(3)))

    with pytest.raises(InfeasiblePlanError):
        run_fluid(plan, None, worked)


# ==================== MODO REQUESTS ====================

def test_queue_misses_the_deadline_after_the_first_step():
    # SLO = 1 s; capacidad 5 req/s: la mitad del lote inicial sale tarde
    scenario = make_scenario(
        sub_catalog("4-3"), [profile("m", {3: 5, 4: 5}, floor=3, latency=0.5)], {"m": [10, 0]},
        [{"m": retraining({3: 1, 4: 1})}]
    )

    job = run_requests(steady_plan(2), None, scenario, seed=0).job("m")

    assert job.served == 10
    assert job.timely == 5
    assert job.slo_attainment == pytest.approx(0.5)
    assert job.dropped == 0


def test_sampled_accuracy_is_close_to_the_expected_value():
    scenario = steady_scenario(100, 100, 1000, 1.0)

    job = run_requests(steady_plan(100), None, scenario, seed=11).job("m")

    assert job.timely == job.received == 10_000
    assert job.goodput == pytest.approx(0.5, abs=0.02)


def test_requests_are_reproducible_for_a_seed():
    scenario = steady_scenario(20, 30, 20, 0.2)

    first = run_requests(steady_plan(20), None, scenario, seed=5)
    second = run_requests(steady_plan(20), None, scenario, seed=5)

    assert first == second
    job = first.job("m")
    assert job.served + job.dropped + job.queued_end == job.received


def test_requests_need_a_seed(worked):
    with pytest.raises(MigSchedError) as error:
        run_requests(worked_plan(), None, worked, seed=None)

    assert error.value.code == "seed-required"


# ==================== REPORTES ====================

def two_job_metrics():
    jobs = [JobMetrics(model="a", received=10, served=9, valid=8), JobMetrics(model="b", received=6, served=2)]
    return Metrics(mode="fluid", jobs=jobs, windows=[WindowMetrics(window=0, jobs=jobs)])


def test_goodput_report_per_job_and_system():
    report = goodput_report(two_job_metrics())

    assert [row["goodput"] for row in report.jobs] == [pytest.approx(0.8), 0.0]
    assert report.system_goodput == pytest.approx(0.5)
    assert report.received == 16


def test_goodput_report_needs_jobs():
    with pytest.raises(MigSchedError) as error:
        goodput_report(Metrics(mode="fluid", jobs=[]))

    assert error.value.code == "no-jobs"


def test_combine_adds_the_windows():
    merged = combine([two_job_metrics(), two_job_metrics()], "fluid")

    assert merged.job("a").received == 20
    assert merged.system_goodput == pytest.approx(0.5)
    assert len(metrics_rows(merged)) == 4
    assert metrics_rows(merged)[0][:2] == (0, "a")
