"""
Continuity-method homotopy from the subsolution to the target problem.

At parameter t the problem is F(nabla^2 u + chi) = t psi + (1 - t) psi_0 with
boundary data t phi + (1 - t) ubar, where psi_0 = F(nabla^2 ubar + chi), so
ubar solves the t = 0 problem exactly even when it does not match phi on the
boundary. When ubar = phi there the boundary data stays fixed.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from app.core.errors import AdmissibilityError, LinearSolverError, NonconvergenceError
from app.schemas.config import SolverConfig
from app.schemas.report import SolveReport
from app.solver.monitor import build_report
from app.solver.newton import newton_solve
from app.solver.problem import DirichletProblem
from app.solver.residual import admissible_spectra, interior_values

logger = logging.getLogger(__name__)

INTERMEDIATE_TOL = 1e-6
STEP_GROWTH = 1.5


@dataclass
class ContinuationState:
    """Last accepted point of the homotopy."""

    t: float
    u: np.ndarray
    newton_iterations: int = 0
    linear_iterations: int = 0
    rejected: int = 0
    residual_inf: float = 0.0
    accepted_t: List[float] = field(default_factory=list)


def start_rhs(problem: DirichletProblem) -> np.ndarray:
    """psi_0 = F(nabla^2 ubar + chi) on the interior, psi on the boundary."""
    lam, _ = admissible_spectra(problem.ubar.values, problem)
    return np.where(problem.interior, interior_values(lam, problem), problem.psi.values)


def homotopy_data(problem: DirichletProblem, t: float, psi_0: Optional[np.ndarray] = None):
    """(psi_t, phi_t) on the grid."""
    psi_0 = start_rhs(problem) if psi_0 is None else psi_0
    psi_t = t * problem.psi.values + (1.0 - t) * psi_0
    phi_t = t * problem.phi.values + (1.0 - t) * problem.ubar.values
    return psi_t, phi_t


def continuity_solve(
    problem: DirichletProblem,
    config: Optional[SolverConfig] = None,
    check: bool = True,
) -> Tuple[np.ndarray, SolveReport]:
    """
    Adaptive continuation in t from 0 to 1, warm-starting Newton at each step.

    A failed Newton solve halves the step; a successful one grows it by 1.5.
    Intermediate solves stop at max(tol, 1e-6), the final one at tol.

    Args:
        problem: DirichletProblem whose ubar is the starting subsolution
        config: SolverConfig (tolerance, step sizes, preconditioner)
        check: Run the delta and subsolution gates first

    Returns:
        (u at t = 1, SolveReport)

    Raises:
        ProblemInfeasibleError: If a gate fails
        NonconvergenceError: When the step drops below config.min_step, with
            the last accepted (t, u) in the snapshot
    """
    config = config or SolverConfig()
    if check:
        problem.check()
    start = time.perf_counter()
    psi_0 = start_rhs(problem)

    state = ContinuationState(t=0.0, u=problem.ubar.values.copy())
    step = config.initial_step
    while state.t < 1.0:
        t_next = min(1.0, state.t + step)
        psi_t, phi_t = homotopy_data(problem, t_next, psi_0)
        tol = config.tol if t_next == 1.0 else max(config.tol, INTERMEDIATE_TOL)
        try:
            u, report = newton_solve(problem, state.u, tol, config.max_iters, config.preconditioner, psi_t, phi_t, t=t_next)
        except (NonconvergenceError, AdmissibilityError, LinearSolverError) as e:
            state.rejected += 1
            step *= 0.5
            logger.info(f"continuation step to t={t_next:.6g} rejected ({type(e).__name__}); step -> {step:.3g}")
            if step < config.min_step:
                raise NonconvergenceError(
                    f"continuation stalled at t={state.t:.6g} (step below {config.min_step:g})",
                    snapshot={
                        "u": state.u,
                        "t": state.t,
                        "iteration": state.newton_iterations,
                        "residual": state.residual_inf,
                    },
                ) from e
            continue

        admissible_spectra(u, problem)
        state.t = t_next
        state.u = u
        state.newton_iterations += report.newton_iterations
        state.linear_iterations += report.linear_iterations
        state.residual_inf = report.residual_inf
        state.accepted_t.append(t_next)
        logger.info(f"continuation accepted t={t_next:.6g} after {report.newton_iterations} Newton iterations")
        step = min(step * STEP_GROWTH, 1.0)

    report = build_report(
        state.u,
        problem,
        converged=True,
        residual_inf=state.residual_inf,
        newton_iterations=state.newton_iterations,
        continuation_steps=len(state.accepted_t),
        linear_iterations=state.linear_iterations,
        t_reached=state.t,
        wall_time=time.perf_counter() - start,
        details={"accepted_t": state.accepted_t, "rejected_steps": state.rejected},
    )
    return state.u, report
