import numpy as np
import pytest

from r2audit import gram_factory, miller_table, standardize


@pytest.fixture(scope="session")
def miller_design():
    X, y, names = miller_table()
    return standardize(X, y, names)


def make_orthogonal_design(r_y, n=None):
    """Exact-Gram design with mutually uncorrelated features and the given
    response correlations."""
    r = np.asarray(r_y, dtype=float)
    m = len(r)
    gram = np.eye(m + 1)
    gram[0, 1:] = gram[1:, 0] = r
    return gram_factory(gram, n if n is not None else m + 2)


def make_pair_design(r_y1, r_y2, r12, n=8):
    gram = np.array([[1.0, r_y1, r_y2], [r_y1, 1.0, r12], [r_y2, r12, 1.0]])
    return gram_factory(gram, n)


def make_noisy_design(seed, n=30, m=5, scale=0.6):
    """Generic full-rank standardized design with a correlated response."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, m))
    beta = rng.uniform(-1.0, 1.0, m)
    y = X @ beta + scale * rng.standard_normal(n)
    return standardize(X, y)


@pytest.fixture
def orthogonal_design():
    return make_orthogonal_design([0.6, 0.4, 0.2], n=8)
