import numpy as np
import pytest
from hypothesis import settings

from vandamp import DampingSchedule, ScalarNonlinearity, SourceTerm, make_problem

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def scalar():
    """n = 1, A = [1], no nonlinearity."""
    return make_problem([[1.0]])


@pytest.fixture
def scalar_cubic():
    return make_problem([[1.0]], ScalarNonlinearity("cubic", 1.0, 0.0))


@pytest.fixture
def undamped():
    return DampingSchedule("tabulated", 1.0, 0.0, table_t=(0.0, 1.0), table_gamma=(0.0, 0.0))


def zero_source(n):
    return SourceTerm.zero(n)


def e1(n):
    d = np.zeros(n)
    d[0] = 1.0
    return d


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
