import numpy as np
import pytest

from fpsg.basis import build_basis
from fpsg.grid import VelocityGrid


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def unit_grid():
    return VelocityGrid(-1.0, 1.0, 41)


@pytest.fixture(scope="session")
def basis5():
    return build_basis(5)
