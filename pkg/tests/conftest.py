import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from biasedtree import make_params  # noqa: E402

ORACLE_DEGREES = (2, 3, 4, 5)


def oracle_lambdas(d):
    """The bias grid used by the exact-equality checks, deduplicated."""
    branch = d - 1
    values = [Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(branch), Fraction(2 * branch)]
    return list(dict.fromkeys(values))


def oracle_grid():
    return [make_params(d, lam) for d in ORACLE_DEGREES for lam in oracle_lambdas(d)]


@pytest.fixture
def simple3():
    return make_params(3, 1)


@pytest.fixture
def critical3():
    return make_params(3, 2)


_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py::test_criterion_" in report.nodeid:
        name = report.nodeid.split("::", 1)[1]
        number = int(name.split("_")[2])
        ok = _ACCEPTANCE.get(number, True) and report.passed
        _ACCEPTANCE[number] = ok


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        status = "PASS" if _ACCEPTANCE[number] else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {status}")
