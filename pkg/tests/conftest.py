"""Shared fixtures: small grids and the standard experiment set.

The standard set (n=2, m in {1,2}, quadratic and quartic potentials,
angular boundary data, r_max in {4, 8}) is solved once per session and
reused by the competitor, covering, monotonicity and acceptance tests.
"""

import numpy as np
import pytest

from vacmin.boundary import angular, initial_field
from vacmin.field import Grid, VectorField
from vacmin.minimizer import minimize
from vacmin.potentials import power, quadratic

STANDARD_H = 0.1
STANDARD_TOL = 1e-6
STANDARD_MAG = 0.6


class StandardRun:
    def __init__(self, label, grid, pot, magnitude, u, report):
        self.label = label
        self.grid = grid
        self.pot = pot
        self.magnitude = magnitude
        self.u = u
        self.report = report


def _solve_standard(m, family, r_max):
    zero = [0.0] * m
    pot = quadratic(zero) if family == "quadratic" else power(zero, 4)
    grid = Grid(2, STANDARD_H, r_max)
    fn = angular(pot, STANDARD_MAG, windings=1)
    u0 = initial_field(grid, pot, fn)
    u, rep = minimize(u0, pot, tol=STANDARD_TOL, max_iter=100_000)
    label = f"m{m}-{family}-R{r_max:g}"
    assert rep.converged, f"standard run {label} did not converge"
    return StandardRun(label, grid, pot, STANDARD_MAG, u, rep)


@pytest.fixture(scope="session")
def standard_runs():
    runs = []
    for m in (1, 2):
        for family in ("quadratic", "power4"):
            for r_max in (4.0, 8.0):
                runs.append(_solve_standard(m, family, r_max))
    return runs


@pytest.fixture(scope="session")
def small_grid():
    return Grid(2, 0.1, 2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_interior_field(grid, m, seed, scale=0.3):
    """Seeded field: smooth-ish random values on the interior, zero outside."""
    r = np.random.default_rng(seed)
    vals = scale * r.standard_normal((m,) + grid.shape)
    vals[:, grid.mask != 1] = 0.0
    return VectorField(grid, vals)
