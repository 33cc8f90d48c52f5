"""
Solve and sweep drivers used by the command line and the HTTP service.
"""
import csv
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.core.errors import AdmissibilityError, LinearSolverError, NonconvergenceError, ParameterError
from app.schemas.config import SolverConfig
from app.schemas.report import SolveReport, SweepRow
from app.solver.continuation import continuity_solve
from app.solver.newton import newton_solve
from app.solver.problem import DirichletProblem

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["s", "max_hess_interior", "max_hess_boundary", "max_grad", "residual", "iters"]
SWEEP_PARAMETERS = ("psi_amp",)


def solve(problem: DirichletProblem, config: Optional[SolverConfig] = None) -> Tuple[np.ndarray, SolveReport]:
    """
    Gate the problem, then solve by continuation (default) or by Newton from ubar.

    Raises:
        ProblemInfeasibleError: If the delta or subsolution gate fails
        NonconvergenceError: If the solver gives up
    """
    config = config or SolverConfig()
    problem.check()
    logger.info(f"solving {problem} ({'continuation' if config.continuation else 'Newton'})")
    if config.continuation:
        u, report = continuity_solve(problem, config, check=False)
    else:
        u, report = newton_solve(problem, problem.ubar.values, config.tol, config.max_iters, config.preconditioner)
    logger.info(
        f"converged: |r|_inf={report.residual_inf:.3e}, {report.newton_iterations} Newton iterations, "
        f"{report.wall_time:.2f}s"
    )
    return u, report


def parse_range(text: str) -> np.ndarray:
    """'start:stop:count' -> count evenly spaced values including both ends."""
    try:
        start, stop, count = text.split(":")
        values = np.linspace(float(start), float(stop), int(count))
    except ValueError as e:
        raise ParameterError(f"range must look like 'start:stop:count', got '{text}'") from e
    if len(values) < 1:
        raise ParameterError(f"range '{text}' is empty")
    return values


def sweep(
    problem: DirichletProblem,
    values: Sequence[float],
    base: float = 1.0,
    config: Optional[SolverConfig] = None,
    param: str = "psi_amp",
) -> List[SweepRow]:
    """
    Solve the family psi_s = (1 - s) base + s psi, warm-starting Newton from
    the previous solution and falling back to continuation.

    Raises:
        ParameterError: For an unknown sweep parameter
        ProblemInfeasibleError: If some member fails its gates
    """
    if param not in SWEEP_PARAMETERS:
        raise ParameterError(f"unknown sweep parameter '{param}', expected one of {SWEEP_PARAMETERS}")
    config = config or SolverConfig()
    rows: List[SweepRow] = []
    previous = None
    for s in values:
        member = problem.with_psi((1.0 - s) * base + s * problem.psi.values)
        member.check()
        try:
            if previous is None:
                raise NonconvergenceError("no warm start")
            u, report = newton_solve(member, previous, config.tol, config.max_iters, config.preconditioner)
        except (NonconvergenceError, AdmissibilityError, LinearSolverError):
            u, report = continuity_solve(member, config, check=False)
        previous = u
        rows.append(SweepRow(
            s=float(s),
            max_hess_interior=report.max_hess_interior,
            max_hess_boundary=report.max_hess_boundary,
            max_grad=report.max_grad,
            residual=report.residual_inf,
            iters=report.newton_iterations,
        ))
        logger.info(f"sweep s={s:.4g}: C1 ratio {rows[-1].c1_ratio:.4g}")
    return rows


def empirical_c1(rows: Sequence[SweepRow]) -> float:
    return max(row.c1_ratio for row in rows)


def write_sweep_csv(path, rows: Sequence[SweepRow]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([repr(float(getattr(row, c))) if c != "iters" else row.iters for c in SWEEP_COLUMNS])
    logger.info(f"wrote {len(rows)} sweep rows to {path}")
    return path
