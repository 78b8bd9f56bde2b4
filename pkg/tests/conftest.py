import functools

import pytest

from siacline.harness import solve_case

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def solved(ic, k, N):
    """Solved DG field at the default final time and step rule, cached per session."""
    return solve_case(ic, k, N)


@pytest.fixture(scope="session")
def solve():
    return solved


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
