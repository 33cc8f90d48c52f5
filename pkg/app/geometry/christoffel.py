import numpy as np

from app.geometry.grid import MetricGrid
from app.geometry.stencils import difference_operators


def metric_derivatives(grid: MetricGrid) -> np.ndarray:
    """dg[..., l, i, j] = d_l g_ij by the grid's first-derivative stencils."""
    ops = difference_operators(grid)
    n = grid.n
    g = grid.g
    dg = np.zeros(grid.shape + (n, n, n))
    for i in range(n):
        for j in range(i, n):
            component = g[..., i, j].ravel()
            for l in range(n):
                value = (ops.d1[l] @ component).reshape(grid.shape)
                dg[..., l, i, j] = value
                dg[..., l, j, i] = value
    return dg


def christoffel(grid: MetricGrid) -> np.ndarray:
    """
    Christoffel symbols of the second kind, gamma[..., k, i, j] = Gamma^k_ij.

    Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij); zero for a flat grid.
    """
    n = grid.n
    if grid.is_flat:
        return np.zeros(grid.shape + (n, n, n))
    cached = grid.__dict__.get("_christoffel")
    if cached is not None:
        return cached
    dg = metric_derivatives(grid)
    # first kind: c[..., l, i, j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    first = 0.5 * (
        np.einsum("...ijl->...lij", dg)
        + np.einsum("...jil->...lij", dg)
        - dg
    )
    symbols = np.einsum("...kl,...lij->...kij", grid.metric.g_inv, first)
    grid.__dict__["_christoffel"] = symbols
    return symbols
