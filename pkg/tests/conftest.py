import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_compositions(rng, n, J, spread=1.0):
    return rng.dirichlet(np.full(J, spread), size=n)
