"""The ten acceptance criteria, each at its stated tolerance and runtime limit.

Every test prints one ``PASS criterion N`` or ``FAIL criterion N`` line, visible even
under pytest's output capture.
"""

from __future__ import annotations

import json
import time

import pytest

from hol.cli import dumps
from hol.config import DEFAULT
from hol.verify import SUITES

# (criterion, suite, runtime limit in seconds)
CRITERIA = [
    (1, "levels", 5.0),
    (2, "dyadic-sum", 1.0),
    (3, "oinarov", 5.0),
    (4, "hardy", 60.0),
    (5, "p-inf", 10.0),
    (6, "bracket", 30.0),
    (7, "gamma", 10.0),
    (8, "min", 30.0),
    (9, "bands", 300.0),
]

_artifacts: dict[str, str] = {}


@pytest.fixture
def report(pytestconfig):
    capture = pytestconfig.pluginmanager.getplugin("capturemanager")

    def emit(number: int, ok: bool, detail: str = "") -> None:
        with capture.global_and_fixture_disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}{': ' + detail if detail else ''}")

    return emit


def _run(name: str) -> tuple[dict, float]:
    start = time.perf_counter()
    res = SUITES[name](DEFAULT)
    return res, time.perf_counter() - start


@pytest.mark.parametrize("number, name, limit", CRITERIA, ids=[f"criterion_{c[0]}_{c[1]}" for c in CRITERIA])
def test_criterion(number, name, limit, report):
    res, elapsed = _run(name)
    _artifacts[name] = dumps(res)
    ok = bool(res["pass"]) and elapsed < limit
    report(number, ok, f"{name} in {elapsed:.2f}s (limit {limit:.0f}s)")
    assert res["pass"], json.dumps(res, indent=1, default=str)
    assert elapsed < limit


def test_criterion_10_determinism(report):
    mismatched = []
    for _, name, _ in CRITERIA:
        first = _artifacts.get(name) or dumps(_run(name)[0])
        second = dumps(_run(name)[0])
        if first != second:
            mismatched.append(name)
    report(10, not mismatched, "byte-identical suite JSON" if not mismatched else f"differs: {mismatched}")
    assert not mismatched
