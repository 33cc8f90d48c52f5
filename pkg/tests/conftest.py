import numpy as np
import pytest

from app.geometry.fields import ScalarField
from app.geometry.grid import MetricGrid
from app.schemas.operator import OperatorSpec
from app.solver.problem import DirichletProblem

QUADRATIC = "(x**2 + y**2)/2"


def unit_square(shape=(17, 17)):
    return MetricGrid.flat([0.0, 0.0], [1.0, 1.0], shape)


def quadratic_problem(psi=1.0, shape=(17, 17), spec=None, ubar=QUADRATIC, chi=None):
    """sqrt(det D^2 u) = psi on the unit square with u = |x|^2/2 on the boundary."""
    grid = unit_square(shape)
    return DirichletProblem(
        spec or OperatorSpec.sigma_root(2, 2),
        grid,
        psi=ScalarField(grid, psi),
        phi=ScalarField.from_expression(grid, QUADRATIC),
        ubar=ScalarField.from_expression(grid, ubar),
        chi=chi,
    )


@pytest.fixture
def grid():
    return unit_square()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def sigma_root_2_3():
    return OperatorSpec.sigma_root(2, 3)
