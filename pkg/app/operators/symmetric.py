"""
Elementary symmetric functions.

All routines accept a single spectrum of shape (n,) or a batch of shape
(..., n) and reduce over the last axis.
"""
from itertools import combinations

import numpy as np

from app.core.errors import DomainError


def as_spectrum(values) -> np.ndarray:
    """
    Validate and convert eigenvalues to a float array.

    Args:
        values: Array-like of shape (n,) or (..., n)

    Returns:
        np.ndarray: float64 copy

    Raises:
        DomainError: If n < 2 or any entry is not finite
    """
    lam = np.array(values, dtype=np.float64)
    if lam.ndim == 0 or lam.shape[-1] < 2:
        raise DomainError(f"spectrum needs n >= 2 entries, got shape {lam.shape}")
    if not np.all(np.isfinite(lam)):
        raise DomainError("spectrum has non-finite entries")
    return lam


def elementary_symmetric(lam: np.ndarray, k_max: int) -> np.ndarray:
    """
    sigma_0 .. sigma_{k_max} in one pass over the entries.

    Expands prod_i (1 + lam_i t) coefficient by coefficient, O(n k_max).

    Returns:
        np.ndarray of shape (k_max + 1,) + lam.shape[:-1]
    """
    lam = np.asarray(lam, dtype=np.float64)
    n = lam.shape[-1]
    e = np.zeros((k_max + 1,) + lam.shape[:-1])
    e[0] = 1.0
    for i in range(n):
        x = lam[..., i]
        for j in range(min(i + 1, k_max), 0, -1):
            e[j] = e[j] + x * e[j - 1]
    return e


def sigma(k: int, lam) -> np.ndarray:
    """
    k-th elementary symmetric function, sigma_0 = 1.

    Raises:
        DomainError: If k is outside 0..n
    """
    lam = np.asarray(lam, dtype=np.float64)
    n = lam.shape[-1]
    if not 0 <= k <= n:
        raise DomainError(f"sigma_k requires 0 <= k <= n, got k={k}, n={n}")
    value = elementary_symmetric(lam, k)[k]
    return float(value) if np.ndim(value) == 0 else value


def sigma_removed(k: int, lam: np.ndarray) -> np.ndarray:
    """
    sigma_k of lam with entry i removed, for every i.

    This is d sigma_{k+1} / d lam_i.

    Returns:
        np.ndarray of shape (..., n)
    """
    lam = np.asarray(lam, dtype=np.float64)
    n = lam.shape[-1]
    out = np.zeros(lam.shape)
    if k < 0 or k > n - 1:
        return out
    for i in range(n):
        rest = np.delete(lam, i, axis=-1)
        out[..., i] = elementary_symmetric(rest, k)[k]
    return out


def sigma_removed_pair(k: int, lam: np.ndarray) -> np.ndarray:
    """
    sigma_k of lam with entries i and j removed (i != j); zero diagonal.

    This is d^2 sigma_{k+2} / d lam_i d lam_j.

    Returns:
        np.ndarray of shape (..., n, n)
    """
    lam = np.asarray(lam, dtype=np.float64)
    n = lam.shape[-1]
    out = np.zeros(lam.shape + (n,))
    if k < 0 or k > n - 2:
        return out
    for i, j in combinations(range(n), 2):
        rest = np.delete(lam, [i, j], axis=-1)
        value = elementary_symmetric(rest, k)[k]
        out[..., i, j] = value
        out[..., j, i] = value
    return out


def sigma_by_subsets(k: int, lam) -> float:
    """Reference sigma_k by explicit subset enumeration (single spectrum)."""
    lam = np.asarray(lam, dtype=np.float64)
    n = lam.shape[-1]
    if not 0 <= k <= n:
        raise DomainError(f"sigma_k requires 0 <= k <= n, got k={k}, n={n}")
    return float(sum(np.prod(lam[list(idx)]) for idx in combinations(range(n), k)))


def subset_incidence(n: int, k: int) -> np.ndarray:
    """0/1 matrix of shape (C(n,k), n), one row per k-subset."""
    rows = list(combinations(range(n), k))
    incidence = np.zeros((len(rows), n))
    for r, idx in enumerate(rows):
        incidence[r, list(idx)] = 1.0
    return incidence
