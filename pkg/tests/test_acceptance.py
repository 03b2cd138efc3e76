"""The eleven acceptance criteria at full scale.

Each test prints one PASS/FAIL line; the lines are also collected and shown
in the terminal summary at the end of the run.
"""

from __future__ import annotations

import pytest

from sigmaschur import acceptance

RESULTS: dict[int, acceptance.CriterionResult] = {}


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number):
    res = acceptance.CRITERIA[number]()
    RESULTS[number] = res
    print(res.line())
    assert res.passed, res.detail
