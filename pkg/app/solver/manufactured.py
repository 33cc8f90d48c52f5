"""
Manufactured Dirichlet problems with a known smooth solution.

psi is built from the symbolic covariant Hessian of u*, so the discrete
error |u_h - u*|_inf measures only the finite-difference truncation.
"""
import logging
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np
import sympy as sp

from app.core.errors import DomainError
from app.geometry.fields import ScalarField, SymMatrixField, evaluate_expression
from app.geometry.grid import MetricGrid, coordinate_symbols
from app.matrix.spectral import big_f
from app.schemas.config import SolverConfig
from app.schemas.operator import OperatorSpec
from app.solver.pipeline import solve
from app.solver.problem import DirichletProblem

logger = logging.getLogger(__name__)

MONGE_AMPERE_SOLUTION = "exp((x**2 + y**2)/2)"
MONGE_AMPERE_PSI = "exp((x**2 + y**2)/2)*sqrt(1 + x**2 + y**2)"


def symbolic_covariant_hessian(expression, grid: MetricGrid) -> List[List[sp.Expr]]:
    """
    nabla_ij u for a flat or conformal grid.

    For g = exp(2w) delta: nabla_ij u = u_ij - w_i u_j - w_j u_i + delta_ij sum_k w_k u_k.

    Raises:
        DomainError: For raw tensor metrics
    """
    x = coordinate_symbols(grid.n)
    u = sp.sympify(expression, locals={s.name: s for s in x})
    hess = [[sp.diff(u, x[i], x[j]) for j in range(grid.n)] for i in range(grid.n)]
    if grid.is_flat:
        return hess
    w = getattr(grid, "conformal_w", None)
    if w is None:
        raise DomainError("manufactured problems need a flat or conformal metric")
    du = [sp.diff(u, xi) for xi in x]
    dw = [sp.diff(w, xi) for xi in x]
    trace = sum(dw[k] * du[k] for k in range(grid.n))
    return [
        [
            hess[i][j] - dw[i] * du[j] - dw[j] * du[i] + (trace if i == j else 0)
            for j in range(grid.n)
        ]
        for i in range(grid.n)
    ]


def manufactured_psi(spec: OperatorSpec, grid: MetricGrid, u_star, chi: Optional[SymMatrixField] = None) -> np.ndarray:
    """
    psi = F(nabla^2 u* + chi) at every node.

    Raises:
        AdmissibilityError: If u* is not admissible somewhere on the grid
    """
    entries = symbolic_covariant_hessian(u_star, grid)
    hess = np.empty(grid.shape + (grid.n, grid.n))
    for i in range(grid.n):
        for j in range(grid.n):
            hess[..., i, j] = evaluate_expression(entries[i][j], grid)
    if chi is not None:
        hess = hess + chi.values
    return big_f(hess, grid.metric, spec)


def manufactured_problem(
    spec: OperatorSpec,
    grid: MetricGrid,
    u_star: str,
    ubar: str,
    chi: Optional[SymMatrixField] = None,
    delta: float = 1e-6,
) -> DirichletProblem:
    """Problem with phi = u* on the boundary and psi derived from u*."""
    exact = ScalarField.from_expression(grid, u_star)
    psi = ScalarField(grid, manufactured_psi(spec, grid, u_star, chi))
    return DirichletProblem(
        spec, grid, psi=psi, phi=exact, ubar=ScalarField.from_expression(grid, ubar), chi=chi,
        exact=exact.values, delta=delta,
    )


def monge_ampere_problem(shape: Sequence[int] = (33, 33), A: float = 8.0, shift: float = -8.0) -> DirichletProblem:
    """
    sqrt(det D^2 u) = exp(r^2/2) sqrt(1 + r^2) on [0, 1]^2 with u* = exp(r^2/2).

    The subsolution A |x|^2 / 2 + shift is strict for A = 8 and lies below u*.
    """
    grid = MetricGrid.flat([0.0, 0.0], [1.0, 1.0], shape)
    ubar = f"{A / 2}*(x**2 + y**2) + ({shift})"
    return manufactured_problem(OperatorSpec.sigma_root(2, 2), grid, MONGE_AMPERE_SOLUTION, ubar)


class ConvergenceRow(NamedTuple):
    shape: tuple
    h: float
    error_inf: float
    ratio: Optional[float]


def convergence_study(
    build,
    shapes: Sequence[Sequence[int]],
    config: Optional[SolverConfig] = None,
) -> List[ConvergenceRow]:
    """
    Solve build(shape) on each grid and report |u_h - u*|_inf with the error
    ratio to the previous grid; ratios near 4 under halving mean second order.
    """
    rows: List[ConvergenceRow] = []
    for shape in shapes:
        problem = build(tuple(shape))
        _, report = solve(problem, config)
        ratio = rows[-1].error_inf / report.error_inf if rows and report.error_inf > 0 else None
        rows.append(ConvergenceRow(tuple(shape), float(problem.grid.spacing.max()), report.error_inf, ratio))
        logger.info(f"convergence {shape}: error {report.error_inf:.3e}" + (f", ratio {ratio:.3f}" if ratio else ""))
    return rows


def observed_orders(rows: Sequence[ConvergenceRow]) -> Dict[str, List[float]]:
    ratios = [r.ratio for r in rows if r.ratio is not None]
    return {"ratios": ratios, "orders": [float(np.log2(r)) for r in ratios]}
