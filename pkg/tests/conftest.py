import numpy as np
import pytest

from mhdlp import DyadicFamily, Grid


@pytest.fixture(scope="session")
def grid64():
    return Grid(2, 64)


@pytest.fixture(scope="session")
def grid3d():
    return Grid(3, 16)


@pytest.fixture(scope="session")
def fam64(grid64):
    return DyadicFamily(grid64)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
