import numpy as np
import pytest

from epsflow.grid import make_grid


@pytest.fixture
def small_grid():
    return make_grid(33, 32, 8.0, 8.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
