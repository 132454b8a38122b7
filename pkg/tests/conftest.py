from typing import Tuple

import pytest

from app.schemas.catalog_schema import Catalog
from app.schemas.plan_schema import AllocationSequence
from app.schemas.workload_schema import Scenario
from tests.factories import a100, merge_plan, merge_scenario, worked_scenario


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="Corre también los tests marcados slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="necesita --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def catalog() -> Catalog:
    return a100()


@pytest.fixture
def worked() -> Scenario:
    return worked_scenario()


@pytest.fixture
def merge() -> Tuple[Scenario, AllocationSequence]:
    return merge_scenario(), merge_plan()
