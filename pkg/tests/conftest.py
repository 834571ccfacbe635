import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)


@pytest.fixture
def random_symmetric(rng):
    def make(n, scale=1.0):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        return scale * (a + a.T)
    return make


@pytest.fixture
def random_pair_vector(rng):
    """Bilinearly normalized complex vector: sum(r**2) == 1."""
    def make(dim):
        while True:
            r = rng.normal(size=dim) + 1j * rng.normal(size=dim)
            cn = r @ r
            if abs(cn) > 1e-3:
                return r / np.sqrt(cn)
    return make
