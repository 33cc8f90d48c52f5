"""
Damped Newton iteration for the discrete Dirichlet problem.
"""
import logging
import time
from typing import List, Optional, Tuple

import numpy as np

from app.core.errors import AdmissibilityError, NonconvergenceError
from app.schemas.report import SolveReport
from app.solver.linear import krylov_solve
from app.solver.monitor import build_report
from app.solver.problem import DirichletProblem
from app.solver.residual import jacobian, linearize, residual

logger = logging.getLogger(__name__)

MAX_HALVINGS = 20
SUFFICIENT_DECREASE = 1e-4


def _line_search(u, step, r_norm, problem, psi, phi):
    """
    Largest alpha in 1, 1/2, ..., 2^-20 keeping u admissible and lowering |r|_inf.

    Returns:
        (u_new, r_new) or None if every trial fails
    """
    alpha = 1.0
    for _ in range(MAX_HALVINGS + 1):
        trial = u + alpha * step
        try:
            r = residual(trial, problem, psi, phi)
        except AdmissibilityError:
            alpha *= 0.5
            continue
        if np.abs(r).max() <= (1.0 - SUFFICIENT_DECREASE * alpha) * r_norm:
            return trial, r
        alpha *= 0.5
    return None


def newton_solve(
    problem: DirichletProblem,
    u0: np.ndarray,
    tol: float = 1e-9,
    max_iters: int = 50,
    preconditioner: str = "diagonal",
    psi: Optional[np.ndarray] = None,
    phi: Optional[np.ndarray] = None,
    t: float = 1.0,
) -> Tuple[np.ndarray, SolveReport]:
    """
    Newton's method with backtracking from an admissible u0.

    Args:
        problem: DirichletProblem (grid, operator and chi)
        u0: Admissible starting values
        tol: Stop when |residual|_inf <= tol
        max_iters: Newton iteration cap
        preconditioner: "diagonal", "ilu" or "none"
        psi, phi: Right-hand side and boundary data overriding the problem's
        t: Homotopy parameter the data belong to, recorded in the report

    Returns:
        (u, SolveReport)

    Raises:
        AdmissibilityError: If u0 itself is not admissible
        NonconvergenceError: If the line search stalls or max_iters is hit
    """
    start = time.perf_counter()
    grid = problem.grid
    u = np.array(np.asarray(u0, dtype=np.float64).reshape(grid.shape))
    history: List[float] = []
    linear_iterations = 0

    for iteration in range(max_iters + 1):
        state = linearize(u, problem, psi, phi)
        r_norm = float(np.abs(state.residual).max())
        history.append(r_norm)
        logger.debug(f"Newton iteration {iteration}: |r|_inf = {r_norm:.3e}")
        if r_norm <= tol:
            report = build_report(
                u,
                problem,
                converged=True,
                residual_inf=r_norm,
                newton_iterations=iteration,
                linear_iterations=linear_iterations,
                t_reached=t,
                wall_time=time.perf_counter() - start,
                residual_history=history,
            )
            return u, report
        if iteration == max_iters:
            break

        J = jacobian(state, problem)
        solve = krylov_solve(J, -state.residual.ravel(), preconditioner)
        linear_iterations += solve.iterations
        accepted = _line_search(u, solve.x.reshape(grid.shape), r_norm, problem, psi, phi)
        if accepted is None:
            raise NonconvergenceError(
                f"line search stalled at iteration {iteration} with |r|_inf = {r_norm:.3e}",
                snapshot={"u": u, "iteration": iteration, "residual": r_norm, "t": t},
            )
        u = accepted[0]

    raise NonconvergenceError(
        f"Newton did not reach tol={tol:g} in {max_iters} iterations (|r|_inf = {history[-1]:.3e})",
        snapshot={"u": u, "iteration": max_iters, "residual": history[-1], "t": t},
    )
