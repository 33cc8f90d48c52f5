"""
Sparse second-order finite-difference operators on a MetricGrid.

1-D stencils are central in the interior and one-sided second order at
non-periodic ends; n-D operators are Kronecker products in row-major order.
"""
from typing import List

import numpy as np
import scipy.sparse as sparse

from app.geometry.grid import MetricGrid


def first_derivative_1d(size: int, h: float, periodic: bool) -> sparse.csr_matrix:
    d = sparse.lil_matrix((size, size))
    for i in range(size):
        if periodic or 0 < i < size - 1:
            d[i, (i - 1) % size] = -1.0
            d[i, (i + 1) % size] = 1.0
        elif i == 0:
            d[i, 0], d[i, 1], d[i, 2] = -3.0, 4.0, -1.0
        else:
            d[i, i], d[i, i - 1], d[i, i - 2] = 3.0, -4.0, 1.0
    return d.tocsr() * (1.0 / (2.0 * h))


def second_derivative_1d(size: int, h: float, periodic: bool) -> sparse.csr_matrix:
    d = sparse.lil_matrix((size, size))
    for i in range(size):
        if periodic or 0 < i < size - 1:
            d[i, (i - 1) % size] += 1.0
            d[i, i] += -2.0
            d[i, (i + 1) % size] += 1.0
        elif i == 0:
            d[i, 0], d[i, 1], d[i, 2], d[i, 3] = 2.0, -5.0, 4.0, -1.0
        else:
            d[i, i], d[i, i - 1], d[i, i - 2], d[i, i - 3] = 2.0, -5.0, 4.0, -1.0
    return d.tocsr() * (1.0 / (h * h))


def _embed(grid: MetricGrid, axis: int, op: sparse.spmatrix) -> sparse.csr_matrix:
    result = None
    for a in range(grid.n):
        factor = op if a == axis else sparse.identity(grid.shape[a], format="csr")
        result = factor if result is None else sparse.kron(result, factor, format="csr")
    return result.tocsr()


class DifferenceOperators:
    """
    First and second derivative matrices acting on row-major node vectors.

    ``d1[a]`` approximates d/dx_a; ``d2[a][b]`` approximates d^2/dx_a dx_b,
    the mixed entries being products of central first differences (the
    4-point cross in the interior).
    """

    def __init__(self, grid: MetricGrid):
        self.grid = grid
        self.d1: List[sparse.csr_matrix] = [
            _embed(grid, a, first_derivative_1d(grid.shape[a], grid.spacing[a], grid.periodic[a]))
            for a in range(grid.n)
        ]
        pure = [
            _embed(grid, a, second_derivative_1d(grid.shape[a], grid.spacing[a], grid.periodic[a]))
            for a in range(grid.n)
        ]
        self.d2: List[List[sparse.csr_matrix]] = [[None] * grid.n for _ in range(grid.n)]
        for a in range(grid.n):
            self.d2[a][a] = pure[a]
            for b in range(a + 1, grid.n):
                mixed = (self.d1[a] @ self.d1[b]).tocsr()
                self.d2[a][b] = mixed
                self.d2[b][a] = mixed

    def gradient(self, u: np.ndarray) -> np.ndarray:
        """Partial derivatives, shape (*shape, n)."""
        flat = np.asarray(u, dtype=np.float64).ravel()
        return np.stack([(d @ flat).reshape(self.grid.shape) for d in self.d1], axis=-1)

    def hessian(self, u: np.ndarray) -> np.ndarray:
        """Coordinate second derivatives, shape (*shape, n, n)."""
        flat = np.asarray(u, dtype=np.float64).ravel()
        n = self.grid.n
        out = np.empty(self.grid.shape + (n, n))
        for a in range(n):
            for b in range(a, n):
                value = (self.d2[a][b] @ flat).reshape(self.grid.shape)
                out[..., a, b] = value
                out[..., b, a] = value
        return out


def difference_operators(grid: MetricGrid) -> DifferenceOperators:
    """Operators for a grid, built once and kept on the grid object."""
    ops = grid.__dict__.get("_difference_operators")
    if ops is None:
        ops = DifferenceOperators(grid)
        grid.__dict__["_difference_operators"] = ops
    return ops
