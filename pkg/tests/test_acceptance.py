"""Acceptance suite: one test per criterion, each printing its pass/fail line.

Criterion 5 is expected to fail on its third check: with the bifurcation
placed at eta = 2, the datum (1, 0) at eta = 3 still reaches the symmetric
point, so the population bound cannot hold. The check is run as written and
marked as a strict expected failure.
"""

import pytest

from multiwell.acceptance import format_line, run_criterion

EXPECTED_FAILURES = {5: "eta = 3 datum (1, 0) is not self-trapped when the bifurcation sits at eta = 2"}


def params():
    for k in range(1, 13):
        marks = [pytest.mark.slow] if k in (4, 6, 12) else []
        if k in EXPECTED_FAILURES:
            marks.append(pytest.mark.xfail(strict=True, reason=EXPECTED_FAILURES[k]))
        yield pytest.param(k, marks=marks, id=f"criterion_{k:02d}")


@pytest.mark.parametrize("k", list(params()))
def test_criterion(k, capsys):
    res = run_criterion(k, seed=0)
    with capsys.disabled():
        print("\n" + format_line(res))
    assert res.passed, res.detail


def test_criterion_5_partial_checks():
    res = run_criterion(5)
    assert res.values["birth"] == pytest.approx(2.0, abs=0.05)
    assert res.values["crossings"] >= 1
    # full transfer: the eta = 3 trajectory reaches the other well
    assert res.values["min_pop_eta3"] < 0.01
