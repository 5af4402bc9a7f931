import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def random_density_matrix(rng, dim, rank=None):
    """Random valid density matrix (Haar-ish eigenvectors, Dirichlet weights)."""
    rank = rank or dim
    vecs = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    q, _ = np.linalg.qr(vecs)
    w = rng.dirichlet(np.ones(rank))
    return (q * w) @ q.conj().T
