import numpy as np
import pytest

from quasilab.geometry import Polyline
from quasilab.repellers import JordanDomain


def polygon_domain(vertices, basepoint=0j, name="polygon"):
    return JordanDomain(Polyline(np.asarray(vertices, dtype=complex), True), basepoint, name)


def circle_domain(n=4096, radius=1.0):
    t = 2 * np.pi * np.arange(n) / n
    return polygon_domain(radius * np.exp(1j * t), 0j, "circle")


@pytest.fixture(scope="session")
def unit_square():
    return polygon_domain([-0.5 - 0.5j, 0.5 - 0.5j, 0.5 + 0.5j, -0.5 + 0.5j], 0j, "square")


@pytest.fixture(scope="session")
def circle():
    return circle_domain()


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
