import numpy as np
import pytest

from pentalab.curves import random_curve_spec


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)


@pytest.fixture
def curve_d2():
    return random_curve_spec(2, seed=11)


@pytest.fixture
def curve_d3():
    return random_curve_spec(3, seed=23)
