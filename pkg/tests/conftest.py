import numpy as np
import pytest

from services.catalog import get_algebra
from services.settings import Tolerances


@pytest.fixture
def tol():
    return Tolerances()


@pytest.fixture
def heis3():
    return get_algebra("heis3")


@pytest.fixture
def nil4():
    return get_algebra("nil4")


@pytest.fixture
def sol3():
    return get_algebra("sol3")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
