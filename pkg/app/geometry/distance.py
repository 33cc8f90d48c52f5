"""
Distance to the boundary of a box grid.
"""
import heapq
import logging

import numpy as np

from app.core.errors import DomainError
from app.geometry.grid import MetricGrid

logger = logging.getLogger(__name__)


def box_distance(grid: MetricGrid) -> np.ndarray:
    """Exact Euclidean distance to the faces of the non-periodic axes."""
    coords = grid.coords
    dist = np.full(grid.shape, np.inf)
    for a in range(grid.n):
        if grid.periodic[a]:
            continue
        x = coords[..., a]
        dist = np.minimum(dist, np.minimum(x - grid.lower[a], grid.upper[a] - x))
    return np.maximum(dist, 0.0)


def _update(values, coeffs):
    """Largest root T of sum_a coeffs[a] (T - values[a])^2 = 1 using the upwind neighbours."""
    order = np.argsort(values)
    values = values[order]
    coeffs = coeffs[order]
    t = values[0] + 1.0 / np.sqrt(coeffs[0])
    for m in range(2, len(values) + 1):
        if t <= values[m - 1]:
            break
        a = coeffs[:m].sum()
        b = (coeffs[:m] * values[:m]).sum()
        c = (coeffs[:m] * values[:m] ** 2).sum() - 1.0
        disc = b * b - a * c
        if disc < 0:
            break
        t = (b + np.sqrt(disc)) / a
    return t


def fast_marching_distance(grid: MetricGrid) -> np.ndarray:
    """
    First-order fast marching solve of |grad d|_g = 1 with d = 0 on the boundary.

    The quadratic update uses the diagonal of g^{-1}; off-diagonal metric
    terms are ignored, which is exact for conformal and diagonal metrics.
    """
    shape = grid.shape
    n = grid.n
    g_inv_diag = np.diagonal(grid.metric.g_inv, axis1=-2, axis2=-1)
    coeff = g_inv_diag / grid.spacing**2

    dist = np.full(shape, np.inf)
    frozen = np.zeros(shape, dtype=bool)
    heap = []
    for index in zip(*np.nonzero(grid.boundary_mask)):
        dist[index] = 0.0
        heapq.heappush(heap, (0.0, index))

    while heap:
        d, index = heapq.heappop(heap)
        if frozen[index]:
            continue
        frozen[index] = True
        for a in range(n):
            for step in (-1, 1):
                j = list(index)
                j[a] += step
                if grid.periodic[a]:
                    j[a] %= shape[a]
                elif not 0 <= j[a] < shape[a]:
                    continue
                j = tuple(j)
                if frozen[j]:
                    continue
                neighbours = []
                weights = []
                for b in range(n):
                    best = np.inf
                    for s in (-1, 1):
                        k = list(j)
                        k[b] += s
                        if grid.periodic[b]:
                            k[b] %= shape[b]
                        elif not 0 <= k[b] < shape[b]:
                            continue
                        k = tuple(k)
                        if frozen[k]:
                            best = min(best, dist[k])
                    if np.isfinite(best):
                        neighbours.append(best)
                        weights.append(coeff[j][b])
                candidate = _update(np.array(neighbours), np.array(weights))
                if candidate < dist[j]:
                    dist[j] = candidate
                    heapq.heappush(heap, (candidate, j))
    return dist


def boundary_distance(grid: MetricGrid, method: str = "auto") -> np.ndarray:
    """
    d(x) = dist_g(x, boundary) at every node.

    Args:
        grid: Grid with at least one non-periodic axis
        method: "auto" (exact box distance when flat, fast marching otherwise),
            "exact" or "fmm"

    Raises:
        DomainError: If every axis is periodic or the method is unknown
    """
    if not grid.has_boundary:
        raise DomainError("boundary distance is undefined on an all-periodic grid")
    if method == "auto":
        method = "exact" if grid.is_flat else "fmm"
    if method == "exact":
        if not grid.is_flat:
            raise DomainError("exact box distance requires a flat metric")
        return box_distance(grid)
    if method == "fmm":
        logger.debug(f"fast marching boundary distance on {grid}")
        return fast_marching_distance(grid)
    raise DomainError(f"unknown distance method '{method}'")
