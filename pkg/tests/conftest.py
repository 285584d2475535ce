from __future__ import annotations

import pytest

from superflag.bwb_engine import rigidity_report
from superflag.flag_geometry import FlagType

DESK = FlagType(5, 5, (5, 4, 2), (5, 4, 2))

CRITERIA: dict[int, tuple[bool, str]] = {}


class MemoryCache(dict):
    def get(self, key):  # type: ignore[override]
        return dict.get(self, key)

    def put(self, key, value):
        self[key] = value


@pytest.fixture(scope="session")
def table_cache() -> MemoryCache:
    return MemoryCache()


@pytest.fixture(scope="session")
def desk_report(table_cache):
    return rigidity_report(DESK, cache=table_cache)


@pytest.fixture
def record_criterion():
    """Record one acceptance line; the line is written even when the assertion later fails."""

    def record(number: int, passed: bool, detail: str) -> None:
        CRITERIA[number] = (passed, detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        passed, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")
