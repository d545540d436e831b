import numpy as np
import pytest

from ionotto import make_context, reference_trap


@pytest.fixture(scope="session")
def trap():
    return reference_trap()


@pytest.fixture(scope="session")
def ctx(trap):
    return make_context(trap)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260808)


def random_density_matrix(rng, dim):
    """Full-rank random state: G G† normalized to unit trace."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
