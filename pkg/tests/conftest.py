import numpy as np
import pytest

DARWIN = (49, 23, 56, -67, 28, 24, 8, 41, 75, 16, 14, 60, 6, 29, -48)


@pytest.fixture
def darwin():
    return DARWIN


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_sample(rng, n, scale=1.5):
    """Continuous sample with distinct, nonzero magnitudes."""
    z = rng.normal(0.3, scale, size=n)
    z[z == 0] = 0.1
    return z
