from app.solver.barrier import barrier_check, find_barrier_parameters
from app.solver.continuation import ContinuationState, continuity_solve, homotopy_data
from app.solver.linear import krylov_solve
from app.solver.manufactured import convergence_study, manufactured_problem, monge_ampere_problem
from app.solver.monitor import build_report, estimate_monitor
from app.solver.newton import newton_solve
from app.solver.pipeline import empirical_c1, parse_range, solve, sweep, write_sweep_csv
from app.solver.problem import DirichletProblem, load_json, load_problem
from app.solver.residual import jacobian, linearize, linearized_apply, residual

__all__ = [
    "barrier_check",
    "find_barrier_parameters",
    "ContinuationState",
    "continuity_solve",
    "homotopy_data",
    "krylov_solve",
    "convergence_study",
    "manufactured_problem",
    "monge_ampere_problem",
    "build_report",
    "estimate_monitor",
    "newton_solve",
    "empirical_c1",
    "parse_range",
    "solve",
    "sweep",
    "write_sweep_csv",
    "DirichletProblem",
    "load_json",
    "load_problem",
    "jacobian",
    "linearize",
    "linearized_apply",
    "residual",
]
