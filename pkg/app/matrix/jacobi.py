"""
Cyclic Jacobi eigen-decomposition for small symmetric matrices, batched.
"""
import logging

import numpy as np

from app.core.errors import NumericalError

logger = logging.getLogger(__name__)

MAX_SWEEPS = 100
OFF_DIAGONAL_TOL = 1e-13


def _off_norm(a: np.ndarray) -> np.ndarray:
    diag = np.diagonal(a, axis1=-2, axis2=-1)
    return np.sqrt(np.maximum((a * a).sum(axis=(-2, -1)) - (diag * diag).sum(axis=-1), 0.0))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    apq = a[..., p, q]
    active = apq != 0.0
    if not active.any():
        return
    safe = np.where(active, apq, 1.0)
    # tau may overflow to inf for a tiny a_pq; t then goes to 0
    with np.errstate(over="ignore"):
        tau = (a[..., q, q] - a[..., p, p]) / (2.0 * safe)
    t = np.sign(tau) / (np.abs(tau) + np.hypot(1.0, tau))
    t = np.where(tau == 0.0, 1.0, t)
    t = np.where(active, t, 0.0)
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c

    # columns then rows of A, columns of V
    cp = a[..., :, p].copy()
    cq = a[..., :, q].copy()
    a[..., :, p] = c[..., None] * cp - s[..., None] * cq
    a[..., :, q] = s[..., None] * cp + c[..., None] * cq
    rp = a[..., p, :].copy()
    rq = a[..., q, :].copy()
    a[..., p, :] = c[..., None] * rp - s[..., None] * rq
    a[..., q, :] = s[..., None] * rp + c[..., None] * rq
    a[..., p, q] = 0.0
    a[..., q, p] = 0.0

    vp = v[..., :, p].copy()
    vq = v[..., :, q].copy()
    v[..., :, p] = c[..., None] * vp - s[..., None] * vq
    v[..., :, q] = s[..., None] * vp + c[..., None] * vq


def jacobi_eigh(matrix, tol: float = OFF_DIAGONAL_TOL, max_sweeps: int = MAX_SWEEPS):
    """
    Eigenvalues and orthonormal eigenvectors of symmetric matrices.

    Args:
        matrix: Symmetric array of shape (..., n, n); the symmetric part is used
        tol: Off-diagonal Frobenius tolerance relative to max(1, |A|_F)
        max_sweeps: Cap on full cyclic sweeps

    Returns:
        (eigenvalues sorted descending (..., n), eigenvectors as columns (..., n, n))

    Raises:
        NumericalError: If the off-diagonal part has not vanished after max_sweeps
    """
    a = np.array(matrix, dtype=np.float64)
    a = 0.5 * (a + np.swapaxes(a, -1, -2))
    n = a.shape[-1]
    v = np.broadcast_to(np.eye(n), a.shape).copy()
    scale = np.maximum(1.0, np.linalg.norm(a, axis=(-2, -1)))

    for sweep in range(max_sweeps):
        if np.all(_off_norm(a) <= tol * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(a, v, p, q)
    else:
        if not np.all(_off_norm(a) <= tol * scale):
            raise NumericalError(f"Jacobi did not converge in {max_sweeps} sweeps (off norm {_off_norm(a).max():.3e})")

    w = np.diagonal(a, axis1=-2, axis2=-1).copy()
    order = np.argsort(-w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[..., None, :], axis=-1)
    return w, v


def jacobi_eigvals(matrix) -> np.ndarray:
    return jacobi_eigh(matrix)[0]
