"""Acceptance battery: one test per criterion, each printing a PASS/FAIL line with its runtime.

Run directly (``python3 tests/test_acceptance.py``) for the bare report, or via
pytest, where the lines are repeated in the terminal summary.
"""

import sys

import pytest

from bimix.validation import CHECKS, run_check

LINES: list[str] = []


def _line(res) -> str:
    return f"{'PASS' if res.passed else 'FAIL'}  criterion {res.id:2d}  {res.name:<36s} {res.seconds:7.2f} s"


@pytest.mark.slow
@pytest.mark.parametrize("cid", [c[0] for c in CHECKS], ids=[f"c{c[0]:02d}-{c[2].__name__[6:]}" for c in CHECKS])
def test_criterion(cid):
    res = run_check(cid)
    line = _line(res)
    LINES.append(line)
    print(line)
    assert res.passed, res.detail


if __name__ == "__main__":
    ok = True
    for cid, _, _ in CHECKS:
        res = run_check(cid)
        print(_line(res), flush=True)
        ok &= res.passed
    sys.exit(0 if ok else 1)
