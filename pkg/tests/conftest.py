import numpy as np
import pytest

from natspline import make_grid


@pytest.fixture
def uniform7():
    """The reference uniform grid: 8 knots t_i = (i-1)/7 on [0, 1]."""
    return make_grid(np.arange(8) / 7)


def random_grid(rng, n=None, lo=0.05, hi=2.0):
    """Random grid with n intervals and spacings bounded away from zero."""
    if n is None:
        n = int(rng.integers(2, 21))
    start = rng.uniform(-2.0, 2.0)
    return make_grid(start + np.concatenate(([0.0], np.cumsum(rng.uniform(lo, hi, n)))))


GL5_NODES, GL5_WEIGHTS = np.polynomial.legendre.leggauss(5)


def integrate_piecewise(grid, f, nodes=GL5_NODES, weights=GL5_WEIGHTS):
    """Gauss-Legendre quadrature of f over the grid, interval by interval.

    Five nodes per interval: exact for polynomial integrands up to degree 9,
    comfortably above the degree-6 products of two cubics.
    """
    total = 0.0
    for a, b in zip(grid.knots[:-1], grid.knots[1:]):
        x = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        total += 0.5 * (b - a) * np.sum(weights * f(x))
    return total
