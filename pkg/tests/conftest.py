import numpy as np
import pytest


def random_orthogonal(dim, rng):
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def well_separated_symmetric(dim, seed, min_gap=1.0):
    """Random symmetric matrix whose consecutive eigengaps are >= ~min_gap.

    Spectrum: jittered integer ladder min_gap * (dim, dim-1, ..., 1), rotated
    by a seeded random orthogonal basis.  Returns (matrix, eigenvalues desc).
    """
    rng = np.random.default_rng(seed)
    values = min_gap * np.arange(dim, 0, -1, dtype=float) + rng.uniform(0.0, 0.3, dim)
    values = -np.sort(-values)
    rot = random_orthogonal(dim, rng)
    a = (rot * values) @ rot.T
    return (a + a.T) / 2.0, values


def frobenius_perturbation(shape, size, seed):
    """Random matrix with exact Frobenius norm ``size``."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal(shape)
    return g * (size / np.sqrt(np.sum(g * g)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
