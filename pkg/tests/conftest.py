from __future__ import annotations

import os

import pytest

from repairsim.world import load_scenario_file

SCENARIO_DIR = os.path.join(os.path.dirname(__file__), "..", "scenarios")


def scenario_path(name: str) -> str:
    return os.path.realpath(os.path.join(SCENARIO_DIR, name))


@pytest.fixture(scope="session")
def canonical():
    return load_scenario_file(scenario_path("paper_trash_task"))


@pytest.fixture(scope="session")
def autoloop():
    return load_scenario_file(scenario_path("paper_trash_task_autoloop"))


@pytest.fixture(scope="session")
def l1clean():
    return load_scenario_file(scenario_path("paper_trash_task_l1clean"))


@pytest.fixture()
def canonical_text():
    with open(scenario_path("paper_trash_task"), "r", encoding="utf-8") as handle:
        return handle.read()
