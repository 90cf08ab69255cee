import numpy as np
import pytest

from douglas_lab.sampling import gaussian


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def cgauss(rng, *shape):
    return gaussian(rng, *shape)


def assert_close(actual, expected, atol):
    actual = np.asarray(actual)
    expected = np.asarray(expected)
    err = np.max(np.abs(actual - expected)) if actual.size else 0.0
    assert err <= atol, f"max abs error {err:.3e} > {atol:.1e}"
