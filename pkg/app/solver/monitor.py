"""
Discrete monitors for the a priori estimates.

Tracks sup |nabla^2 u|_g on the interior and on the boundary, sup |nabla u|_g,
and the ratio max_interior / (1 + max_boundary) that a second-derivative
estimate of the form sup_M |nabla^2 u| <= C (1 + sup_boundary |nabla^2 u|)
keeps bounded under refinement.
"""
from typing import NamedTuple

import numpy as np

from app.geometry.hessian import covariant_hessian, gradient, metric_norm_gradient, metric_norm_hessian
from app.schemas.report import SolveReport
from app.solver.problem import DirichletProblem


class MonitorValues(NamedTuple):
    max_hess_interior: float
    max_hess_boundary: float
    max_grad: float
    c1_ratio: float


def estimate_monitor(u, problem: DirichletProblem) -> MonitorValues:
    grid = problem.grid
    values = np.asarray(getattr(u, "values", u), dtype=np.float64).reshape(grid.shape)
    hess = metric_norm_hessian(covariant_hessian(values, grid), grid)
    grad = metric_norm_gradient(gradient(values, grid), grid)
    interior = float(hess[problem.interior].max())
    boundary = float(hess[problem.boundary].max())
    return MonitorValues(interior, boundary, float(grad.max()), interior / (1.0 + boundary))


def build_report(u, problem: DirichletProblem, **fields) -> SolveReport:
    """SolveReport with the monitor values of u filled in."""
    monitor = estimate_monitor(u, problem)
    if problem.exact is not None and "error_inf" not in fields:
        values = np.asarray(getattr(u, "values", u)).reshape(problem.grid.shape)
        fields["error_inf"] = float(np.abs(values - problem.exact).max())
    return SolveReport(**monitor._asdict(), **fields)
