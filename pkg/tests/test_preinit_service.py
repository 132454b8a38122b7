import numpy as np
import pytest

from app.exceptions import PreinitError
from app.schemas.preinit_schema import EffectivePlan, PreinitAction
from app.services.plan_evaluation_service import check_feasible, evaluate_plan
from app.services.preinit_service import apply_preinit, overhead_summary, plan_preinit, preinit_plan
from tests.factories import a100, sequence, step, worked_plan

RANDOM_SEQUENCES = 50


def test_freed_slices_allow_creating_the_next_instance(merge):
    scenario, plan = merge

    actions = plan_preinit(plan, scenario.catalog)

    assert [(a.fire_second, a.target.id, a.covers_tasks) for a in actions] == [(1, "4g@0", ("a:infer",))]


def test_fully_precreated_transition_is_hidden(merge):
    scenario, plan = merge

    effective = preinit_plan(plan, scenario.catalog)

    # b también cambia en s2 pero su 2g@4 ya existía ocupado por a
    assert effective.hidden_set() == {("a:infer", 2)}


def test_preinit_raises_the_planned_goodput(merge):
    scenario, plan = merge
    arrivals = {"a": [5, 5, 30], "b": [5, 5, 5]}
    assert check_feasible(plan, scenario) == []

    plain = evaluate_plan(plan, arrivals, scenario)
    hidden = evaluate_plan(preinit_plan(plan, scenario.catalog), arrivals, scenario)

    assert plain.by_task("a:infer")[2].throughput == pytest.approx(8.0)
    assert hidden.by_task("a:infer")[2].throughput == pytest.approx(30.0)
    assert hidden.total > plain.total


def test_partial_precreation_keeps_the_overhead(catalog):
    plan = sequence(
        step(0, "3-3-1", a_infer=["1g@3"], b_infer=["3g@4"]),
        step(1, "2-2-1-1-1", a_infer=["2g@0", "1g@4"], b_infer=["1g@6"]),
    )

    effective = preinit_plan(plan, catalog)

    # 1g@4 y 1g@6 pisan slices ocupados por b en s0
    assert [a.target.id for a in effective.actions] == ["2g@0"]
    assert effective.hidden_set() == set()


def test_identical_steps_need_no_actions(catalog):
    plan = sequence(*(step(s, "4-2-1", a_infer=["4g@0"], b_infer=["1g@6"]) for s in range(3)))

    assert plan_preinit(plan, catalog) == []


def test_disabled_preinit_returns_the_plain_plan(merge):
    scenario, plan = merge

    effective = preinit_plan(plan, scenario.catalog, enabled=False)

    assert effective == EffectivePlan.plain(plan)
    assert effective.overhead("a:infer", 2, 0.8) == 0.8


def test_without_actions_the_score_is_unchanged(worked):
    effective = preinit_plan(worked_plan(), worked.catalog)

    assert effective.actions == []
    assert evaluate_plan(effective, {"m": [5, 5, 5]}, worked).total == \
        evaluate_plan(worked_plan(), {"m": [5, 5, 5]}, worked).total


@pytest.mark.parametrize("fire_second, target, config_id", [
    (2, "4g@0", "4-2-1"),
    (1, "2g@4", "4-2-1"),
    (1, "7g@0", "7"),
])
def test_inconsistent_actions_are_rejected(merge, fire_second, target, config_id):
    scenario, plan = merge
    slot = scenario.catalog.get(config_id).slot(target)

    with pytest.raises(PreinitError):
        apply_preinit(plan, [PreinitAction(fire_second=fire_second, target=slot)], scenario.catalog)


def test_overhead_summary_counts_hidden_seconds(merge):
    scenario, plan = merge
    psi = {"a": 0.8, "b": 0.8}

    assert overhead_summary(preinit_plan(plan, scenario.catalog, enabled=False), scenario.catalog, psi) == \
        (2, pytest.approx(1.6))
    assert overhead_summary(preinit_plan(plan, scenario.catalog), scenario.catalog, psi) == \
        (2, pytest.approx(0.8))


# ==================== SECUENCIAS ALEATORIAS ====================

def random_sequence(rng, catalog, steps=10):
    """Dos inferencias con un slot cada una, configuración al azar en cada paso"""
    allocations = []
    for second in range(steps):
        config = catalog.configurations[int(rng.integers(len(catalog.configurations)))]
        while len(config.slots) < 2:
            config = catalog.configurations[int(rng.integers(len(catalog.configurations)))]
        first, second_slot = rng.choice(len(config.slots), size=2, replace=False)
        allocations.append(step(
            second, config.id,
            a_infer=[config.slots[int(first)].id],
            b_infer=[config.slots[int(second_slot)].id]
        ))
    return sequence(*allocations)


def test_preinit_never_adds_overhead_and_often_removes_it():
    catalog = a100()
    rng = np.random.default_rng(7)
    psi = {"a": 1.0, "b": 1.0}
    improved = 0

    for _ in range(RANDOM_SEQUENCES):
        plan = random_sequence(rng, catalog)
        base = overhead_summary(preinit_plan(plan, catalog, enabled=False), catalog, psi)
        with_preinit = overhead_summary(preinit_plan(plan, catalog), catalog, psi)

        assert with_preinit[0] == base[0]
        assert with_preinit[1] <= base[1]
        improved += with_preinit[1] < base[1]

    assert improved >= 0.3 * RANDOM_SEQUENCES
