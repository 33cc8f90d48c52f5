import logging

import numpy as np

from app.core.errors import MetricError
from app.matrix.jacobi import jacobi_eigh

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12


class MetricTensor:
    """
    Riemannian metric at one point or a batch of points.

    Holds g, g^{-1} and gamma, the symmetric positive definite square root of
    g^{-1} (gamma gamma = g^{-1}). Eigenvalues of A with respect to g are the
    eigenvalues of gamma A gamma.
    """

    def __init__(self, g):
        g = np.array(g, dtype=np.float64)
        if g.ndim < 2 or g.shape[-1] != g.shape[-2]:
            raise MetricError(f"metric must be square, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise MetricError("metric has non-finite entries")
        asym = np.abs(g - np.swapaxes(g, -1, -2)).max()
        if asym > SYMMETRY_TOL * max(1.0, np.abs(g).max()):
            raise MetricError(f"metric is not symmetric (asymmetry {asym:.3e})")
        g = 0.5 * (g + np.swapaxes(g, -1, -2))
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError as e:
            raise MetricError(f"metric is not positive definite: {e}") from e

        w, v = jacobi_eigh(g)
        if np.any(w <= 0):
            raise MetricError("metric is singular")
        self.g = g
        self.n = g.shape[-1]
        self.g_inv = np.einsum("...ik,...k,...jk->...ij", v, 1.0 / w, v)
        self.gamma = np.einsum("...ik,...k,...jk->...ij", v, 1.0 / np.sqrt(w), v)
        self.is_identity = bool(np.allclose(g, np.eye(self.n), rtol=0.0, atol=0.0))

    @classmethod
    def identity(cls, n: int) -> "MetricTensor":
        return cls(np.eye(n))

    def conjugate(self, a: np.ndarray) -> np.ndarray:
        """gamma A gamma, broadcasting over batches."""
        if self.is_identity:
            return np.asarray(a, dtype=np.float64)
        return np.einsum("...ik,...kl,...lj->...ij", self.gamma, a, self.gamma)

    def __repr__(self):
        return f"MetricTensor(n={self.n}, batch={self.g.shape[:-2]})"


def as_metric(g, n: int) -> MetricTensor:
    """Accepts None (identity), a MetricTensor or a raw array."""
    if g is None:
        return MetricTensor.identity(n)
    if isinstance(g, MetricTensor):
        return g
    return MetricTensor(g)
