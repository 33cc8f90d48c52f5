"""
Boundary barrier diagnostic.

For a solved u and its subsolution ubar the barrier
v = (u - ubar) + t d - N d^2 / 2 should be nonnegative on the collar
M_delta = {d < delta} while F^{ij} nabla_ij v <= -eps (1 + sum_i f_i) there.
"""
import logging
from typing import Iterable, Optional

import numpy as np

from app.core.errors import ParameterError
from app.core.operator_factory import get_operator
from app.geometry.distance import boundary_distance
from app.schemas.certificate import Certificate, ConditionId
from app.solver.problem import DirichletProblem
from app.solver.residual import apply_coefficients, linearize

logger = logging.getLogger(__name__)

BARRIER_TOL = -1e-10
SEARCH_T = (0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0)
SEARCH_N = (0.0, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0)


def _values(u, grid) -> np.ndarray:
    return np.asarray(getattr(u, "values", u), dtype=np.float64).reshape(grid.shape)


def barrier_check(
    u,
    ubar,
    problem: DirichletProblem,
    t: float,
    N: float,
    delta: float,
    d: Optional[np.ndarray] = None,
) -> Certificate:
    """
    Args:
        u: Solution values
        ubar: Subsolution values
        problem: The solved DirichletProblem
        t, N, delta: Barrier parameters with delta <= 2t/N
        d: Boundary distance, computed from the grid when omitted

    Returns:
        Certificate with margin min(v_min - (-1e-10), eps); part (a) and
        part (b) are reported separately in the details.

    Raises:
        ParameterError: If delta > 2t/N or a parameter is negative
    """
    if t < 0 or N < 0 or not delta > 0:
        raise ParameterError(f"barrier needs t >= 0, N >= 0, delta > 0 (got t={t}, N={N}, delta={delta})")
    if N > 0 and delta > 2.0 * t / N:
        raise ParameterError(f"delta={delta} exceeds 2t/N={2.0 * t / N:.6g}")
    grid = problem.grid
    u = _values(u, grid)
    ubar = _values(ubar, grid)
    d = boundary_distance(grid) if d is None else np.asarray(d, dtype=np.float64).reshape(grid.shape)

    v = (u - ubar) + t * d - 0.5 * N * d**2
    collar = d <= delta
    v_min = float(v[collar].min())
    worst_a = np.unravel_index(int(np.argmin(np.where(collar, v, np.inf))), grid.shape)

    state = linearize(u, problem)
    lv = apply_coefficients(state.coefficients, v, problem)
    inner = (d < delta) & problem.interior
    sum_f = np.zeros(grid.shape)
    sum_f[problem.interior] = get_operator(problem.spec).gradient(state.spectra[problem.interior], check=False).sum(axis=-1)
    if inner.any():
        ratio = np.where(inner, -lv / (1.0 + sum_f), np.inf)
        eps = float(ratio.min())
        worst_b = np.unravel_index(int(np.argmin(ratio)), grid.shape)
    else:
        eps, worst_b = 0.0, None

    part_a = v_min >= BARRIER_TOL
    margin = min(v_min - BARRIER_TOL, eps)
    cert = Certificate.build(
        ConditionId.BARRIER_4_1,
        margin,
        spec=problem.spec,
        n_samples=int(collar.sum()),
        witnesses=[grid.coords[worst_a]],
        details={
            "t": t,
            "N": N,
            "delta": delta,
            "part_a": {"min_v": v_min, "passed": bool(part_a), "node": [int(i) for i in worst_a]},
            "part_b": {
                "epsilon": max(eps, 0.0),
                "raw_min": eps,
                "passed": bool(eps > 0),
                "node": None if worst_b is None else [int(i) for i in worst_b],
                "collar_nodes": int(inner.sum()),
            },
        },
    )
    logger.info(
        f"barrier t={t:g} N={N:g} delta={delta:g}: min v {v_min:.3e}, eps {eps:.3e} -> {cert.verdict.value}"
    )
    return cert


def find_barrier_parameters(
    u,
    ubar,
    problem: DirichletProblem,
    t_values: Iterable[float] = SEARCH_T,
    N_values: Iterable[float] = SEARCH_N,
) -> Certificate:
    """
    Scan (t, N) with delta = min(2t/N, half the box) and return the first
    passing certificate, or the one with the largest margin if none passes.

    Collars thinner than 1.5 grid spacings hold no interior node and are skipped.
    """
    grid = problem.grid
    d = boundary_distance(grid)
    h = float(grid.spacing.max())
    half = 0.5 * float((grid.upper - grid.lower).min())
    best = None
    for t in t_values:
        for N in N_values:
            delta = half if N == 0 else min(2.0 * t / N, half)
            if delta < 1.5 * h:
                continue
            cert = barrier_check(u, ubar, problem, t, N, delta, d)
            if cert.passed:
                return cert
            if best is None or cert.margin > best.margin:
                best = cert
    if best is None:
        raise ParameterError(f"no barrier collar is wider than 1.5 grid spacings (h={h:.3g})")
    return best
