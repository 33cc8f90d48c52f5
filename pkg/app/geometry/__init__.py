from app.geometry.christoffel import christoffel
from app.geometry.distance import boundary_distance
from app.geometry.fields import ScalarField, SymMatrixField
from app.geometry.grid import MetricGrid
from app.geometry.hessian import covariant_hessian, gradient

__all__ = [
    "MetricGrid",
    "ScalarField",
    "SymMatrixField",
    "christoffel",
    "covariant_hessian",
    "gradient",
    "boundary_distance",
]
