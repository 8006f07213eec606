import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from orlicz_greedy.weights import DyadicGrid, DyadicWeight

settings.register_profile(
    "default", deadline=None, max_examples=40, derandomize=True, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid1():
    return DyadicGrid(1, 6, 0)


@pytest.fixture
def sqrt_weight():
    return DyadicWeight.power(DyadicGrid(1, 8, 2), 0.5)
