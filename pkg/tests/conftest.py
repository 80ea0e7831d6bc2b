import numpy as np
import pytest

from photonwf import build_grid
from photonwf.gauge import BerryGauge

Z = BerryGauge((0.0, 0.0, 1.0))
X = BerryGauge((1.0, 0.0, 0.0))


def offaxis_center(theta=np.pi / 3, kmag=10.0):
    return kmag * np.array([np.sin(theta), 0.0, np.cos(theta)])


@pytest.fixture(scope="session")
def grid33():
    return build_grid(offaxis_center(), 0.5, 33, Z.vector)


@pytest.fixture(scope="session")
def grid21():
    return build_grid(offaxis_center(), 0.5, 21, Z.vector)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one summary line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def record_acceptance(number, title, passed, detail):
    ACCEPTANCE_LINES[number] = f"criterion {number} {'PASS' if passed else 'FAIL'}  {title}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
