import numpy as np
import pytest

from semigroup_lab.elliptic import ExhaustionSchedule, assemble, laplace_field, ou_field
from semigroup_lab.engine import random_submarkov_generator
from semigroup_lab.grids import interval_grid, symmetric_interval_grid


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def small_grid():
    return symmetric_interval_grid(2.0, 0.25)


@pytest.fixture
def ou_generator(small_grid):
    return assemble(ou_field(), 2.0, small_grid)


@pytest.fixture
def laplace_generator(small_grid):
    return assemble(laplace_field(), 2.0, small_grid)


@pytest.fixture
def unit_interval_grid():
    # grid on [0, 1] used for the Dirichlet Laplacian closed forms
    return interval_grid(0.0, 1.0, 1.0 / 64)


@pytest.fixture
def random_generator(rng):
    return random_submarkov_generator(8, rng)


@pytest.fixture
def coarse_schedule():
    grid = symmetric_interval_grid(4.0, 0.1)
    return ExhaustionSchedule((2.0, 3.0, 4.0), grid)
