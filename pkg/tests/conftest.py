import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from foonc.config import DATA_DIR
from foonc.services.foon_parser import load_kitchen, load_subgraph
from foonc.services.foon_graph import resolve_goal
from foonc.services.scene import standard_scene

settings.register_profile("default", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("quick", max_examples=20, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def vodka_ice_graph():
    result = load_subgraph(DATA_DIR / "vodka_ice.foon")
    assert result.ok
    return result.graph


@pytest.fixture(scope="session")
def vodka_ice_kitchen():
    result = load_kitchen(DATA_DIR / "vodka_ice_kitchen.txt")
    assert result.ok
    return result.kitchen


@pytest.fixture(scope="session")
def vodka_ice_goal(vodka_ice_graph):
    return resolve_goal(vodka_ice_graph, "drinking_glass")


@pytest.fixture(scope="session")
def recipe_graph():
    result = load_subgraph(DATA_DIR / "bloody_mary.foon")
    assert result.ok
    return result.graph


@pytest.fixture(scope="session")
def recipe_goal(recipe_graph):
    return resolve_goal(recipe_graph, "drinking_glass")


@pytest.fixture
def scene():
    return standard_scene()


@pytest.fixture
def golden():
    def read(name):
        return (GOLDEN_DIR / name).read_text(encoding="utf-8")

    return read
