import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from mealygroups.group import GroupHandle  # noqa: E402
from mealygroups.presets import preset, preset_indices  # noqa: E402


@pytest.fixture(scope="session")
def handles():
    cache = {}

    def get(index):
        if index not in cache:
            cache[index] = GroupHandle(preset(index))
        return cache[index]
    return get


@pytest.fixture(scope="session")
def classification():
    from mealygroups.classify import run_classification
    return run_classification()


ALL_PRESETS = preset_indices()


_ACCEPTANCE: dict[int, str] = {}


def record_acceptance(number: int, line: str) -> None:
    _ACCEPTANCE[number] = line


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[n])
