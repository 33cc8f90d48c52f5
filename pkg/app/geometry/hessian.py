"""
Covariant derivatives of scalar fields on a MetricGrid.
"""
from typing import List

import numpy as np
import scipy.sparse as sparse

from app.geometry.christoffel import christoffel
from app.geometry.grid import MetricGrid
from app.geometry.stencils import difference_operators


def gradient(u, grid: MetricGrid) -> np.ndarray:
    """Partial derivatives d_k u, shape (*shape, n)."""
    return difference_operators(grid).gradient(_values(u, grid))


def covariant_hessian(u, grid: MetricGrid) -> np.ndarray:
    """
    nabla_ij u = d_ij u - Gamma^k_ij d_k u, shape (*shape, n, n).

    Symmetric by construction; exact on quadratics for a flat grid.
    """
    values = _values(u, grid)
    ops = difference_operators(grid)
    hess = ops.hessian(values)
    if not grid.is_flat:
        hess = hess - np.einsum("...kij,...k->...ij", christoffel(grid), ops.gradient(values))
    return 0.5 * (hess + np.swapaxes(hess, -1, -2))


def covariant_hessian_operators(grid: MetricGrid) -> List[List[sparse.csr_matrix]]:
    """Sparse L[a][b] with L[a][b] @ u = nabla_ab u on row-major vectors."""
    cached = grid.__dict__.get("_covariant_operators")
    if cached is not None:
        return cached
    ops = difference_operators(grid)
    n = grid.n
    out = [[None] * n for _ in range(n)]
    symbols = None if grid.is_flat else christoffel(grid)
    for a in range(n):
        for b in range(a, n):
            op = ops.d2[a][b]
            if symbols is not None:
                for k in range(n):
                    op = op - sparse.diags(symbols[..., k, a, b].ravel()) @ ops.d1[k]
            op = op.tocsr()
            out[a][b] = op
            out[b][a] = op
    grid.__dict__["_covariant_operators"] = out
    return out


def metric_norm_hessian(hess: np.ndarray, grid: MetricGrid) -> np.ndarray:
    """|nabla^2 u|_g = |gamma H gamma|_F per node."""
    return np.linalg.norm(grid.metric.conjugate(hess), axis=(-2, -1))


def metric_norm_gradient(grad: np.ndarray, grid: MetricGrid) -> np.ndarray:
    """|nabla u|_g = sqrt(g^{ij} u_i u_j) per node."""
    return np.sqrt(np.maximum(np.einsum("...ij,...i,...j->...", grid.metric.g_inv, grad, grad), 0.0))


def _values(u, grid: MetricGrid) -> np.ndarray:
    values = getattr(u, "values", u)
    return np.asarray(values, dtype=np.float64).reshape(grid.shape)
