import numpy as np
import pytest

from quatell.lattice import diagonal_lattice, hurwitz_order, lipschitz_order

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def z4_ctx():
    return lipschitz_order()


@pytest.fixture(scope="session")
def z4(z4_ctx):
    return z4_ctx.lattice


@pytest.fixture(scope="session")
def hurwitz_ctx():
    return hurwitz_order()


@pytest.fixture(scope="session")
def hurwitz_lat(hurwitz_ctx):
    return hurwitz_ctx.lattice


@pytest.fixture(scope="session")
def diag235():
    return diagonal_lattice(2, 3, 5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
