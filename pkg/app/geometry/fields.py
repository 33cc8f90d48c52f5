"""
Scalar and symmetric-matrix fields on a MetricGrid.
"""
from typing import Sequence, Union

import numpy as np
import sympy as sp

from app.core.errors import DomainError
from app.geometry.grid import MetricGrid, coordinate_symbols

SYMMETRY_TOL = 1e-12


def _parse(expression, n: int) -> sp.Expr:
    symbols = coordinate_symbols(n)
    try:
        expr = sp.sympify(expression, locals={s.name: s for s in symbols})
    except (sp.SympifyError, TypeError) as e:
        raise DomainError(f"cannot parse field expression '{expression}': {e}") from e
    extra = expr.free_symbols - set(symbols)
    if extra:
        raise DomainError(f"field expression '{expression}' uses unknown symbols {sorted(s.name for s in extra)}")
    return expr


def evaluate_expression(expression: Union[str, sp.Expr, float], grid: MetricGrid) -> np.ndarray:
    """Values of an expression in x, y (, z) at every node."""
    expr = _parse(expression, grid.n)
    fn = sp.lambdify(coordinate_symbols(grid.n), expr, "numpy")
    values = fn(*np.moveaxis(grid.coords, -1, 0))
    return np.array(np.broadcast_to(np.asarray(values, dtype=np.float64), grid.shape))


class ScalarField:
    """Finite node values on a grid."""

    def __init__(self, grid: MetricGrid, values):
        values = np.asarray(values, dtype=np.float64)
        if values.size == 1:
            values = np.full(grid.shape, float(values.ravel()[0]))
        values = values.reshape(grid.shape)
        if not np.all(np.isfinite(values)):
            raise DomainError("scalar field has non-finite values")
        self.grid = grid
        self.values = values

    @classmethod
    def from_expression(cls, grid: MetricGrid, expression) -> "ScalarField":
        return cls(grid, evaluate_expression(expression, grid))

    def boundary_values(self) -> np.ndarray:
        return self.values[self.grid.boundary_mask]

    def max_abs(self) -> float:
        return float(np.abs(self.values).max())

    def __repr__(self):
        return f"ScalarField(shape={self.grid.shape})"


class SymMatrixField:
    """A symmetric n x n matrix at every node."""

    def __init__(self, grid: MetricGrid, values):
        values = np.asarray(values, dtype=np.float64)
        n = grid.n
        if values.shape == (n, n):
            values = np.broadcast_to(values, grid.shape + (n, n))
        if values.shape != grid.shape + (n, n):
            raise DomainError(f"matrix field must have shape {grid.shape + (n, n)}, got {values.shape}")
        asym = np.abs(values - np.swapaxes(values, -1, -2)).max()
        if asym > SYMMETRY_TOL * max(1.0, np.abs(values).max()):
            raise DomainError(f"matrix field is not symmetric (asymmetry {asym:.3e})")
        self.grid = grid
        self.values = np.array(0.5 * (values + np.swapaxes(values, -1, -2)))

    @classmethod
    def zeros(cls, grid: MetricGrid) -> "SymMatrixField":
        return cls(grid, np.zeros(grid.shape + (grid.n, grid.n)))

    @classmethod
    def from_expressions(cls, grid: MetricGrid, entries: Sequence[Sequence]) -> "SymMatrixField":
        """Entries given as an n x n nested list of expressions or numbers."""
        n = grid.n
        if len(entries) != n or any(len(row) != n for row in entries):
            raise DomainError(f"matrix expression must be {n}x{n}")
        values = np.empty(grid.shape + (n, n))
        for i in range(n):
            for j in range(n):
                values[..., i, j] = evaluate_expression(entries[i][j], grid)
        return cls(grid, values)

    def __repr__(self):
        return f"SymMatrixField(shape={self.grid.shape})"
