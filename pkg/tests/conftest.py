import math

import numpy as np
import pytest

from partialmeas.algebra import Direction, state_from_angles

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    num, title = marker.args
    key = (num, title)
    if report.when == "call" or (report.when == "setup" and report.failed):
        prev = _CRITERIA.get(key, "PASS")
        _CRITERIA[key] = "FAIL" if report.failed or prev == "FAIL" else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (num, title), status in sorted(_CRITERIA.items()):
        terminalreporter.write_line(f"[{status}] criterion {num}: {title}")


def random_state(rng):
    return state_from_angles(math.acos(rng.uniform(-1, 1)), rng.uniform(0, 2 * math.pi))


def random_direction(rng):
    return Direction(math.acos(rng.uniform(-1, 1)), rng.uniform(0, 2 * math.pi))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
