import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from avtrack.ingest import KHANEWAL, Scenario
from avtrack.planner import SimContext


@pytest.fixture(scope="session")
def base_scenario() -> Scenario:
    return Scenario(site=KHANEWAL)


@pytest.fixture(scope="session")
def ctx(base_scenario) -> SimContext:
    """Shared Khanewal context; simulation caches persist across tests."""
    return SimContext(base_scenario)


@pytest.fixture(scope="session")
def weather(ctx):
    return ctx.weather
