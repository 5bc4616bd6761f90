import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def random_unit(rng, k, n=None):
    if n is None:
        return unit(rng.standard_normal(k))
    v = rng.standard_normal((n, k))
    return v / np.linalg.norm(v, axis=1, keepdims=True)
