import numpy as np
import pytest

from ricci_ovals import bryant, solver


@pytest.fixture(scope="session")
def bryant_table():
    return bryant.default_table()


@pytest.fixture(scope="session")
def oval_400():
    return solver.oval_ansatz(-400.0, n=8193)


@pytest.fixture(scope="session")
def oval_800():
    return solver.oval_ansatz(-800.0, n=8193)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20109)
