import numpy as np
import pytest

from phidiv.pmf import ProbabilityVector

SUPPORT = ("c1", "c2", "c3")
P_VALUES = (0.4, 0.25, 0.35)
Q_VALUES = (0.27, 0.32, 0.41)

_ACCEPTANCE_LINES = []


@pytest.fixture
def p():
    return ProbabilityVector(SUPPORT, P_VALUES)


@pytest.fixture
def q():
    return ProbabilityVector(SUPPORT, Q_VALUES)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
