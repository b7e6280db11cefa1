"""Shared fixtures: the two workhorse symbols and a seeded generator."""

import numpy as np
import pytest

from toepspec import Symbol


@pytest.fixture(scope="session")
def quad():
    """a(lam) = lam + lam^2  (d1=2, d2=0)."""
    return Symbol((0.0, 1.0, 1.0), 2, 0)


@pytest.fixture(scope="session")
def tri():
    """a(lam) = lam^{-1} + lam  (d1=1, d2=1): the symmetric tridiagonal symbol."""
    return Symbol((1.0, 0.0, 1.0), 1, 1)


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)


def random_complex(rng, n, m=None):
    m = n if m is None else m
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
