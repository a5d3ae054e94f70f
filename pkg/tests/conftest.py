import os
import sys
import time

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES = []
SUITE_BUDGET_SECONDS = 15 * 60
_START = {}


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_sessionstart(session):
    _START["t"] = time.perf_counter()


def _elapsed():
    return time.perf_counter() - _START.get("t", time.perf_counter())


def pytest_sessionfinish(session, exitstatus):
    # the suite-time half of criterion 9
    if ACCEPTANCE_LINES and _elapsed() > SUITE_BUDGET_SECONDS and exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
    elapsed = _elapsed()
    verdict = "PASS" if elapsed <= SUITE_BUDGET_SECONDS else "FAIL"
    terminalreporter.write_line(f"criterion 9 (suite time): {verdict} - {elapsed:.0f}s of {SUITE_BUDGET_SECONDS}s")
