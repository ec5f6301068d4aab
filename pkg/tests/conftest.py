import math

import numpy as np
import pytest
from hypothesis import settings
from scipy.special import eval_hermite

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def hermite_function_oracle(k, x):
    """e_k from the explicit Hermite polynomial, independent of the package recurrence."""
    x = np.asarray(x, dtype=float)
    norm = math.sqrt(2.0**k * math.factorial(k) * math.sqrt(math.pi))
    return eval_hermite(k, x) * np.exp(-x * x / 2) / norm


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
