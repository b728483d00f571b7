import numpy as np
import pytest

from nbody_blowup.newton import MassSystem

# Figure-eight choreography (Chenciner-Montgomery initial data).
EIGHT_X1 = np.array([0.97000436, -0.24308753])
EIGHT_V3 = np.array([-0.93240737, -0.86473146])
EIGHT_PERIOD = 6.3259


def figure_eight():
    q = np.array([EIGHT_X1, -EIGHT_X1, [0.0, 0.0]])
    v = np.array([-EIGHT_V3 / 2, -EIGHT_V3 / 2, EIGHT_V3])
    return q, v


def equilateral(side=1.0, orientation=1):
    q = side * np.array([[0.0, 0.0], [1.0, 0.0], [0.5, orientation * np.sqrt(3) / 2]])
    return q - q.mean(axis=0)


@pytest.fixture
def equal3():
    return MassSystem((1.0, 1.0, 1.0))


@pytest.fixture
def mixed3():
    return MassSystem((1.0, 2.0, 3.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
