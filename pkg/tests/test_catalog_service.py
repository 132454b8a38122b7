import pytest

from app.exceptions import CatalogError
from app.schemas.catalog_schema import Allocation
from app.services.catalog_service import (
    enumerate_configurations, load_catalog, placements, reconfiguration_diff, size_multisets,
    validate_allocation
)
from tests.factories import DEFAULT_CATALOG, step


def catalog_doc(*configurations, rules=None):
    document = {
        "id": "test",
        "configurations": [{"id": cid, "slots": list(slots)} for cid, slots in configurations],
    }
    if rules is not None:
        document["placement_rules"] = rules
    return document


# ==================== CARGA ====================

def test_minimal_catalog_has_one_configuration():
    catalog = load_catalog(catalog_doc(("7", ["7@0"])))

    assert len(catalog.configurations) == 1
    assert catalog.configurations[0].slots[0].id == "7g@0"


def test_default_catalog_has_twelve_full_configurations(catalog):
    assert len(catalog.configurations) == 12
    assert max(config.total_size for config in catalog.configurations) == 7
    assert all(config.total_size == 7 for config in catalog.configurations)


def test_yaml_text_is_accepted():
    text = "id: tiny\nconfigurations:\n  - id: half\n    slots: ['4@0', '3@4']\n"
    catalog = load_catalog(text)

    assert catalog.id == "tiny"
    assert [slot.id for slot in catalog.get("half").slots] == ["4g@0", "3g@4"]


@pytest.mark.parametrize("slots, code", [
    (["4@0", "3@2"], "overlapping-slices"),
    (["4@5"], "size-out-of-range"),
    (["1@0", "1@0"], "duplicate-slot-id"),
    (["cuatro@0"], "parse-failure"),
])
def test_invalid_configuration_is_rejected_with_code(slots, code):
    with pytest.raises(CatalogError) as error:
        load_catalog(catalog_doc(("bad", slots)))

    assert error.value.code == code
    assert error.value.config_id == "bad"


def test_duplicate_configuration_id_is_rejected():
    with pytest.raises(CatalogError) as error:
        load_catalog(catalog_doc(("x", ["7@0"]), ("x", ["4@0", "3@4"])))

    assert error.value.code == "duplicate-configuration-id"


def test_placement_rules_are_enforced():
    with pytest.raises(CatalogError) as error:
        load_catalog(catalog_doc(("odd", ["4@3"]), rules={4: [0]}))

    assert error.value.code == "placement-rule-violation"
    assert error.value.config_id == "odd"


def test_missing_catalog_file(tmp_path):
    with pytest.raises(CatalogError) as error:
        load_catalog(str(tmp_path / "nope.yaml"))

    assert error.value.code == "missing-file"


# ==================== ENUMERACIÓN ====================

def test_enumerator_recovers_the_twelve_size_multisets(catalog):
    found = enumerate_configurations(catalog.placement_rules)
    multisets = size_multisets(found)

    assert len(multisets) == 12
    assert set(multisets) == {config.size_multiset for config in catalog.configurations}


def test_enumerated_placements_are_maximal(catalog):
    rules = catalog.placement_rules
    for placement in enumerate_configurations(rules):
        used = {s for start, size in placement for s in range(start, start + size)}
        free = set(range(7)) - used
        for size, starts in rules.items():
            for start in starts:
                span = set(range(start, start + size))
                assert not (start + size <= 7 and span <= free)


def test_distinct_placements_of_default_catalog(catalog):
    found = placements(catalog)

    assert (0, 7) in found
    assert (4, 3) in found
    assert len(found) == len(set(found))


# ==================== VALIDACIÓN ====================

def test_unknown_configuration(catalog):
    alloc = Allocation(second=0, configuration_id="8-8", assignments={"a:infer": frozenset({"7g@0"})})

    violations = validate_allocation(catalog, alloc)

    assert [v.code for v in violations] == ["unknown-configuration"]


def test_shared_instance(catalog):
    alloc = step(0, "4-3", a_infer=["4g@0"], b_infer=["4g@0"])

    violations = validate_allocation(catalog, alloc)

    assert [v.code for v in violations] == ["instance-shared"]


def test_retraining_on_two_instances(catalog):
    alloc = step(0, "4-2-1", a_infer=["4g@0"], a_retrain=["2g@4", "1g@6"])

    violations = validate_allocation(catalog, alloc)

    assert [v.code for v in violations] == ["retraining-multi-instance"]


def test_valid_allocation_has_no_violations(catalog):
    alloc = step(0, "4-2-1", a_infer=["4g@0"], a_retrain=["2g@4"], b_infer=["1g@6"])

    assert validate_allocation(catalog, alloc) == []


# ==================== DIFERENCIAS ====================

def test_identical_allocations_have_no_diff(catalog):
    alloc = step(0, "4-2-1", a_infer=["4g@0"], b_infer=["1g@6"])

    diff = reconfiguration_diff(alloc, alloc, catalog)

    assert not any(diff.flags.values())
    assert diff.created == [] and diff.destroyed == []


def test_merge_into_larger_instance_reconfigures_both_tasks(catalog):
    before = step(0, "2-2-2-1", task1_infer=["2g@4"], task2_infer=["1g@6"])
    after = step(1, "4-2-1", task1_infer=["4g@0"], task2_infer=["2g@4", "1g@6"])

    diff = reconfiguration_diff(before, after, catalog)

    assert diff.flags == {"task1:infer": True, "task2:infer": True}
    assert [slot.id for slot in diff.created] == ["4g@0"]
    assert [slot.id for slot in diff.destroyed] == ["2g@0", "2g@2"]


def test_moving_an_instance_counts_as_reconfiguration(catalog):
    before = step(0, "2-2-2-1", a_infer=["2g@0"])
    after = step(1, "2-2-2-1", a_infer=["2g@2"])

    diff = reconfiguration_diff(before, after, catalog)

    assert diff.flags["a:infer"] is True
    assert diff.weak_flags["a:infer"] is False
    assert diff.reconfigured_tasks == ["a:infer"]


@pytest.mark.parametrize("name", ["nope.yml", "nope", "catalogs/a100"])
def test_missing_catalog_paths_of_any_shape(tmp_path, name):
    with pytest.raises(CatalogError) as error:
        load_catalog(str(tmp_path / name))

    assert error.value.code == "missing-file"


def test_yml_and_path_sources_are_read_as_files(tmp_path):
    target = tmp_path / "a100.yml"
    target.write_text(DEFAULT_CATALOG.read_text(encoding="utf-8"), encoding="utf-8")

    assert len(load_catalog(str(target)).configurations) == 12
    assert len(load_catalog(target).configurations) == 12
