"""Acceptance criteria 1-11, each at its stated tolerance.

Every criterion prints one PASS/FAIL line.  The lines are repeated in the
terminal summary of the pytest run.  The module also runs as a script.
"""

import json
import sys

import pytest

from disclab import acceptance

SEED = 7
_results = {}
LINES = []


def _record(c):
    line = f"{'PASS' if c.passed else 'FAIL'}  {c.number:>2}  {c.name}  {json.dumps(c.detail, sort_keys=True, default=str)}"
    LINES.append(line)
    print(line)
    return c


def _criterion(n):
    if n not in _results:
        _results[n] = _record(acceptance.run_criterion(n, SEED))
    return _results[n]


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number):
    c = _criterion(number)
    assert c.passed, json.dumps(c.detail, sort_keys=True, default=str)


def test_criterion_11_determinism():
    first = acceptance.report_json([_criterion(n) for n in sorted(acceptance.CRITERIA)])
    c = _record(acceptance.determinism(SEED, first))
    assert c.passed, json.dumps(c.detail, sort_keys=True)


if __name__ == "__main__":
    results = acceptance.run_all(SEED)
    for c in results:
        _record(c)
    sys.exit(0 if all(c.passed for c in results) else 1)
