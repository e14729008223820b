import re

import pytest

from mploss.dispatch import CANONICAL
from mploss.loss_synth import derive

_CRITERIA = {}


@pytest.fixture(scope="session")
def canonical_derived():
    """(loss, day-ahead partition, real-time partition) for the canonical spec."""
    return derive(CANONICAL)


@pytest.fixture(scope="session")
def canonical_loss(canonical_derived):
    return canonical_derived[0]


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_c(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2))
    failed = report.failed
    if report.when == "call" or failed:
        _CRITERIA[key] = _CRITERIA.get(key, True) and not failed and not report.skipped


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (num, name), ok in sorted(_CRITERIA.items()):
        terminalreporter.write_line(f"criterion {num:2d} {name}: {'PASS' if ok else 'FAIL'}")
