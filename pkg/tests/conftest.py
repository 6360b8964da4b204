import math

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

TWO_PI = 2 * math.pi


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
