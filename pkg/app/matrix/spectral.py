"""
Matrix operator F(A) = f(lambda[A]) with respect to a metric, and its derivatives.
"""
import logging

import numpy as np

from app.core.errors import DomainError
from app.core.operator_factory import get_operator
from app.matrix.jacobi import jacobi_eigh
from app.matrix.metric import as_metric
from app.schemas.operator import OperatorSpec

logger = logging.getLogger(__name__)

MAX_DIM = 8
CLUSTER_TOL = 1e-9


def _symmetric(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise DomainError(f"expected square matrices, got shape {a.shape}")
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def eig_metric(A, g=None):
    """
    Eigenvalues of A with respect to g.

    Args:
        A: Symmetric matrix or batch (..., n, n)
        g: MetricTensor, raw metric array or None for the identity

    Returns:
        (spectrum sorted descending, orthonormal eigenframe of gamma A gamma)

    Raises:
        DomainError: If n exceeds the small-matrix path
        NumericalError: If Jacobi fails to converge
    """
    A = _symmetric(A)
    n = A.shape[-1]
    if n > MAX_DIM:
        raise DomainError(f"eig_metric handles n <= {MAX_DIM}, got n={n}")
    metric = as_metric(g, n)
    return jacobi_eigh(metric.conjugate(A))


def cluster_average(lam: np.ndarray, values: np.ndarray, tol: float = CLUSTER_TOL) -> np.ndarray:
    """
    Average values over clusters of (descending) eigenvalues closer than tol.

    Works on batches (..., n).
    """
    n = lam.shape[-1]
    gaps = lam[..., :-1] - lam[..., 1:]
    scale = np.maximum(1.0, np.abs(lam[..., :-1]))
    breaks = gaps > tol * scale
    group = np.concatenate([np.zeros(lam.shape[:-1] + (1,), dtype=int), np.cumsum(breaks, axis=-1)], axis=-1)
    onehot = (group[..., :, None] == np.arange(n)).astype(np.float64)
    sums = np.einsum("...ig,...i->...g", onehot, values)
    counts = np.maximum(onehot.sum(axis=-2), 1.0)
    return np.einsum("...ig,...g->...i", onehot, sums / counts)


def big_f(A, g, spec: OperatorSpec):
    """
    F(A) = f(lambda[A]) with lambda taken with respect to g.

    Raises:
        AdmissibilityError: With the offending spectrum when lambda[A] leaves the cone
    """
    lam, _ = eig_metric(A, g)
    return get_operator(spec).evaluate(lam)


def big_f_grad(A, g, spec: OperatorSpec) -> np.ndarray:
    """
    F^{ij}(A) = dF/dA_ij.

    In the eigenframe V of gamma A gamma the derivative is diag(f_i) with f
    averaged over clustered eigenvalues; F^{ij} = gamma V diag(f) V^T gamma.
    """
    A = _symmetric(A)
    metric = as_metric(g, A.shape[-1])
    lam, v = jacobi_eigh(metric.conjugate(A))
    f = cluster_average(lam, get_operator(spec).gradient(lam))
    inner = np.einsum("...ik,...k,...jk->...ij", v, f, v)
    return metric.conjugate(inner)


def big_f_second(A, g, spec: OperatorSpec, H) -> np.ndarray:
    """
    d^2/dt^2 F(A + tH) at t = 0.

    With H' = V^T gamma H gamma V this is
    sum_ij f_ij H'_ii H'_jj + sum_{i != j} (f_i - f_j)/(lam_i - lam_j) H'_ij^2,
    the divided difference becoming f_ii - f_ij on clustered eigenvalues.
    """
    A = _symmetric(A)
    H = _symmetric(H)
    metric = as_metric(g, A.shape[-1])
    lam, v = jacobi_eigh(metric.conjugate(A))
    op = get_operator(spec)
    f = cluster_average(lam, op.gradient(lam))
    hess = op.hessian(lam)
    h = np.einsum("...ki,...kl,...lj->...ij", v, metric.conjugate(H), v)
    hd = np.diagonal(h, axis1=-2, axis2=-1)
    diagonal_part = np.einsum("...ij,...i,...j->...", hess, hd, hd)

    dl = lam[..., :, None] - lam[..., None, :]
    df = f[..., :, None] - f[..., None, :]
    scale = np.maximum(1.0, np.maximum(np.abs(lam[..., :, None]), np.abs(lam[..., None, :])))
    close = np.abs(dl) <= CLUSTER_TOL * scale
    hdiag = np.diagonal(hess, axis1=-2, axis2=-1)
    confluent = 0.5 * (hdiag[..., :, None] + hdiag[..., None, :]) - hess
    with np.errstate(divide="ignore", invalid="ignore"):
        divided = np.where(close, confluent, df / np.where(close, 1.0, dl))
    n = lam.shape[-1]
    off = ~np.eye(n, dtype=bool)
    off_part = np.where(off, divided * h * h, 0.0).sum(axis=(-2, -1))
    value = diagonal_part + off_part
    return float(value) if np.ndim(value) == 0 else value
