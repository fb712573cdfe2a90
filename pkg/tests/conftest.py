import pytest

from substation_sci.cases import TEST_CASES
from substation_sci.nn import train_for
from substation_sci.topology import ArrangementKind

_criteria = []


@pytest.fixture(scope="session")
def specs():
    return {kind: make() for kind, make in TEST_CASES.items()}


@pytest.fixture(scope="session")
def models():
    return {kind: train_for(kind, seed=42)[0] for kind in ArrangementKind}


@pytest.fixture
def criterion():
    """Record one acceptance line; printed in the terminal summary."""

    def record(number, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}"
        _criteria.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for line in _criteria:
            terminalreporter.write_line(line)
