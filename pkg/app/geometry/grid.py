"""
Box-domain grids carrying a Riemannian metric.
"""
import logging
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
import sympy as sp

from app.core.errors import DomainError, MetricError
from app.matrix.metric import MetricTensor

logger = logging.getLogger(__name__)

MIN_NODES = 5
COORDINATE_NAMES = ("x", "y", "z")


def coordinate_symbols(n: int):
    return sp.symbols(COORDINATE_NAMES[:n], real=True)


def parse_polynomial(expression: str, n: int) -> sp.Expr:
    """
    Parse a polynomial in the grid coordinates x, y (, z).

    Raises:
        DomainError: If the expression is not a polynomial in those symbols
    """
    symbols = coordinate_symbols(n)
    try:
        expr = sp.sympify(expression, locals={s.name: s for s in symbols})
    except (sp.SympifyError, TypeError) as e:
        raise DomainError(f"cannot parse '{expression}': {e}") from e
    if not expr.free_symbols <= set(symbols) or not expr.is_polynomial(*symbols):
        raise DomainError(f"'{expression}' is not a polynomial in {[s.name for s in symbols]}")
    return expr


class MetricGrid:
    """
    Tensor-product grid on a box with a metric at every node.

    Non-periodic axes include both endpoints (h = L/(N-1)); periodic axes
    drop the right endpoint (h = L/N). Nodes are stored in row-major order.
    """

    def __init__(
        self,
        lower: Sequence[float],
        upper: Sequence[float],
        shape: Sequence[int],
        periodic: Optional[Sequence[bool]] = None,
        g_field: Optional[np.ndarray] = None,
        metric_label: str = "flat",
    ):
        self.lower = np.asarray(lower, dtype=np.float64)
        self.upper = np.asarray(upper, dtype=np.float64)
        self.shape = tuple(int(s) for s in shape)
        self.n = len(self.shape)
        if self.n not in (2, 3):
            raise DomainError(f"grids must be 2- or 3-dimensional, got {self.n}")
        if self.lower.shape != (self.n,) or self.upper.shape != (self.n,):
            raise DomainError("box corners must match the grid dimension")
        if np.any(self.upper <= self.lower):
            raise DomainError(f"empty box {self.lower.tolist()} .. {self.upper.tolist()}")
        if min(self.shape) < MIN_NODES:
            raise DomainError(f"need at least {MIN_NODES} nodes per axis, got {self.shape}")
        self.periodic = tuple(bool(p) for p in (periodic or [False] * self.n))
        if len(self.periodic) != self.n:
            raise DomainError("periodic flags must match the grid dimension")

        lengths = self.upper - self.lower
        self.spacing = np.array([
            lengths[a] / (self.shape[a] if self.periodic[a] else self.shape[a] - 1) for a in range(self.n)
        ])
        self.axes = [self.lower[a] + self.spacing[a] * np.arange(self.shape[a]) for a in range(self.n)]
        self.metric_label = metric_label

        if g_field is None:
            self.g_field = None
        else:
            g_field = np.asarray(g_field, dtype=np.float64)
            if g_field.shape != self.shape + (self.n, self.n):
                raise MetricError(f"metric field must have shape {self.shape + (self.n, self.n)}, got {g_field.shape}")
            self.g_field = g_field
            self.validate()

    @classmethod
    def flat(cls, lower, upper, shape, periodic=None) -> "MetricGrid":
        return cls(lower, upper, shape, periodic)

    @classmethod
    def conformal(cls, lower, upper, shape, w: str, periodic=None) -> "MetricGrid":
        """g = exp(2w) delta with w a polynomial in the coordinates."""
        grid = cls(lower, upper, shape, periodic, metric_label=f"conformal({w})")
        expr = parse_polynomial(w, grid.n)
        values = sp.lambdify(coordinate_symbols(grid.n), expr, "numpy")(*np.moveaxis(grid.coords, -1, 0))
        values = np.broadcast_to(np.asarray(values, dtype=np.float64), grid.shape)
        g = np.exp(2.0 * values)[..., None, None] * np.eye(grid.n)
        grid.g_field = g
        grid.conformal_w = expr
        grid.validate()
        return grid

    @cached_property
    def coords(self) -> np.ndarray:
        """Node coordinates, shape (*shape, n)."""
        return np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def is_flat(self) -> bool:
        return self.g_field is None

    @cached_property
    def metric(self) -> MetricTensor:
        if self.g_field is None:
            return MetricTensor(np.broadcast_to(np.eye(self.n), self.shape + (self.n, self.n)))
        return MetricTensor(self.g_field)

    def validate(self) -> None:
        """
        Raises:
            MetricError: If g is not positive definite at some node
        """
        self.__dict__.pop("metric", None)
        _ = self.metric

    @property
    def g(self) -> np.ndarray:
        return self.metric.g

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        """Nodes on a face of a non-periodic axis."""
        mask = np.zeros(self.shape, dtype=bool)
        for a in range(self.n):
            if self.periodic[a]:
                continue
            index = [slice(None)] * self.n
            index[a] = 0
            mask[tuple(index)] = True
            index[a] = -1
            mask[tuple(index)] = True
        return mask

    @property
    def interior_mask(self) -> np.ndarray:
        return ~self.boundary_mask

    @property
    def has_boundary(self) -> bool:
        return not all(self.periodic)

    def header(self) -> dict:
        return {
            "dims": self.n,
            "shape": list(self.shape),
            "spacing": self.spacing.tolist(),
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "periodic": list(self.periodic),
            "metric": self.metric_label,
        }

    def refined(self, shape: Sequence[int]) -> "MetricGrid":
        """Same box and metric description on another resolution."""
        if self.metric_label.startswith("conformal("):
            return MetricGrid.conformal(self.lower, self.upper, shape, str(self.conformal_w), self.periodic)
        if self.g_field is not None:
            raise DomainError("cannot resample a raw metric tensor field")
        return MetricGrid(self.lower, self.upper, shape, self.periodic)

    def __repr__(self):
        return f"MetricGrid(shape={self.shape}, lower={self.lower.tolist()}, upper={self.upper.tolist()}, metric={self.metric_label})"
