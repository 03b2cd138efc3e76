from __future__ import annotations

import pytest

from sigmaschur.magnus import enumerate_group


@pytest.fixture(scope="session")
def f13():
    return enumerate_group(3, 1, 3)


@pytest.fixture(scope="session")
def f14():
    return enumerate_group(3, 1, 4)


@pytest.fixture(scope="session")
def f23():
    return enumerate_group(3, 2, 3)


@pytest.fixture(scope="session")
def f24():
    return enumerate_group(3, 2, 4)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[k].line())
    passed = sum(r.passed for r in RESULTS.values())
    terminalreporter.write_line(f"{passed}/{len(RESULTS)} criteria passed")
