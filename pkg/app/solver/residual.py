"""
Discrete residual and Newton Jacobian of the Dirichlet problem.

Interior rows hold F(nabla^2 u + chi) - psi, boundary rows u - phi. Node
vectors are row-major over the grid shape.
"""
from typing import NamedTuple, Optional

import numpy as np
import scipy.sparse as sparse

from app.core.errors import AdmissibilityError
from app.core.operator_factory import get_operator
from app.geometry.hessian import covariant_hessian, covariant_hessian_operators
from app.matrix.jacobi import jacobi_eigh
from app.matrix.spectral import cluster_average
from app.operators.cones import cone_margin, violated_inequality
from app.solver.problem import DirichletProblem


class LinearizationState(NamedTuple):
    """Everything one Newton step needs at the current iterate."""

    residual: np.ndarray
    # F^{ab} at every node, (*shape, n, n); zero on the boundary
    coefficients: np.ndarray
    spectra: np.ndarray


def _values(u, grid) -> np.ndarray:
    return np.asarray(getattr(u, "values", u), dtype=np.float64).reshape(grid.shape)


def admissible_spectra(u, problem: DirichletProblem):
    """
    Spectra and eigenframes of nabla^2 u + chi with respect to g.

    Raises:
        AdmissibilityError: If an interior spectrum leaves the cone, naming the node
    """
    grid = problem.grid
    U = covariant_hessian(_values(u, grid), grid) + problem.chi.values
    lam, v = jacobi_eigh(grid.metric.conjugate(U))
    margins = np.where(problem.interior, cone_margin(problem.spec.cone, lam), np.inf)
    if not np.all(margins > 0):
        node = np.unravel_index(int(np.argmin(margins)), grid.shape)
        raise AdmissibilityError(
            f"{problem.spec.label}: spectrum {lam[node].tolist()} leaves the cone at node {list(map(int, node))}",
            spectrum=lam[node],
            violated=violated_inequality(problem.spec.cone, lam[node]),
            node=[int(i) for i in node],
        )
    return lam, v


def interior_values(lam: np.ndarray, problem: DirichletProblem) -> np.ndarray:
    """F at every node; boundary nodes get 0."""
    op = get_operator(problem.spec)
    out = np.zeros(problem.grid.shape)
    out[problem.interior] = op.evaluate(lam[problem.interior], check=False)
    return out


def residual(u, problem: DirichletProblem, psi: Optional[np.ndarray] = None, phi: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Args:
        u: Node values or ScalarField
        problem: DirichletProblem
        psi: Right-hand side override, defaults to problem.psi
        phi: Boundary data override, defaults to problem.phi

    Returns:
        Residual on the grid shape

    Raises:
        AdmissibilityError: If u is not admissible at an interior node
    """
    lam, _ = admissible_spectra(u, problem)
    return _assemble_residual(_values(u, problem.grid), lam, problem, psi, phi)


def _assemble_residual(u, lam, problem, psi, phi) -> np.ndarray:
    psi = problem.psi.values if psi is None else psi
    phi = problem.phi.values if phi is None else phi
    r = interior_values(lam, problem) - psi
    return np.where(problem.boundary, u - phi, r)


def linearize(u, problem: DirichletProblem, psi=None, phi=None) -> LinearizationState:
    """Residual and the coefficients F^{ab}(nabla^2 u + chi) in one eigen-decomposition."""
    grid = problem.grid
    values = _values(u, grid)
    lam, v = admissible_spectra(values, problem)
    r = _assemble_residual(values, lam, problem, psi, phi)

    op = get_operator(problem.spec)
    f = np.zeros_like(lam)
    f[problem.interior] = cluster_average(lam[problem.interior], op.gradient(lam[problem.interior], check=False))
    coefficients = grid.metric.conjugate(np.einsum("...ik,...k,...jk->...ij", v, f, v))
    return LinearizationState(r, coefficients, lam)


def jacobian(state: LinearizationState, problem: DirichletProblem) -> sparse.csr_matrix:
    """
    Sparse Newton matrix: interior rows sum_ab diag(F^{ab}) L_ab, boundary rows the identity.
    """
    grid = problem.grid
    ops = covariant_hessian_operators(grid)
    interior = problem.interior.ravel().astype(np.float64)
    J = sparse.diags(1.0 - interior)
    for a in range(grid.n):
        for b in range(grid.n):
            J = J + sparse.diags(state.coefficients[..., a, b].ravel() * interior) @ ops[a][b]
    return J.tocsr()


def apply_coefficients(coefficients: np.ndarray, w, problem: DirichletProblem) -> np.ndarray:
    """F^{ab} nabla_ab w on the interior, 0 on the boundary, for frozen coefficients."""
    hess = covariant_hessian(_values(w, problem.grid), problem.grid)
    lw = np.einsum("...ab,...ab->...", coefficients, hess)
    return np.where(problem.interior, lw, 0.0)


def linearized_apply(u, problem: DirichletProblem, v) -> np.ndarray:
    """
    L_u v = F^{ab}(nabla^2 u + chi) nabla_ab v, the interior part of the Newton matrix.

    Raises:
        AdmissibilityError: If u is not admissible at an interior node
    """
    return apply_coefficients(linearize(u, problem).coefficients, v, problem)
