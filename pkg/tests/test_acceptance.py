"""Acceptance criteria 1-10, one test each, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.  Budgets
are pinned in :data:`ccm_lab.verify.CRITERIA`.
"""

import pytest

from ccm_lab.verify import CRITERIA, run_criterion


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA], ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number):
    r = run_criterion(number)
    print(r.line())
    assert r.passed, r.detail
