from math import sqrt
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse.linalg as spla

from conftest import QUADRATIC, quadratic_problem, unit_square

from app.core.errors import AdmissibilityError, ConfigError, NonconvergenceError, ParameterError, ProblemInfeasibleError
from app.geometry.fields import ScalarField, SymMatrixField, evaluate_expression
from app.geometry.grid import MetricGrid
from app.schemas.config import SolverConfig
from app.schemas.operator import OperatorSpec
from app.solver.barrier import barrier_check, find_barrier_parameters
from app.solver.continuation import continuity_solve, homotopy_data, start_rhs
from app.solver.linear import krylov_solve
from app.solver.manufactured import (
    MONGE_AMPERE_PSI,
    convergence_study,
    manufactured_problem,
    monge_ampere_problem,
    observed_orders,
)
from app.solver.monitor import estimate_monitor
from app.solver.newton import newton_solve
from app.solver.pipeline import SWEEP_COLUMNS, empirical_c1, parse_range, solve, sweep, write_sweep_csv
from app.solver.problem import DirichletProblem, load_problem
from app.solver.residual import apply_coefficients, jacobian, linearize, linearized_apply, residual

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def poisson_problem(shape=(17, 17)):
    grid = unit_square(shape)
    return DirichletProblem(
        OperatorSpec.linear(2),
        grid,
        psi=ScalarField.from_expression(grid, "2 + sin(x)*cos(y)"),
        phi=ScalarField.from_expression(grid, "x**2 + y**2"),
        ubar=ScalarField.from_expression(grid, "2*(x**2 + y**2) - 2"),
    )


def test_residual_vanishes_at_the_exact_quadratic():
    problem = quadratic_problem(psi=1.0)
    np.testing.assert_allclose(residual(problem.ubar, problem), 0.0, atol=1e-10)


def test_residual_interior_and_boundary_rows():
    problem = quadratic_problem(psi=2.0)
    r = residual(problem.ubar.values, problem)
    np.testing.assert_allclose(r[problem.interior], -1.0, atol=1e-10)
    np.testing.assert_allclose(r[problem.boundary], 0.0, atol=1e-14)


def test_residual_includes_chi():
    grid = unit_square()
    problem = quadratic_problem(psi=4.0, spec=OperatorSpec.linear(2), chi=SymMatrixField(grid, np.eye(2)))
    np.testing.assert_allclose(residual(problem.ubar, problem), 0.0, atol=1e-10)


def test_residual_rejects_inadmissible_iterates():
    problem = quadratic_problem()
    saddle = ScalarField.from_expression(problem.grid, "x**2 - y**2").values
    with pytest.raises(AdmissibilityError) as info:
        residual(saddle, problem)
    assert info.value.node is not None


def test_linearized_apply():
    problem = quadratic_problem(psi=2.0, spec=OperatorSpec.linear(2))
    state = linearize(problem.ubar, problem)
    x2 = ScalarField.from_expression(problem.grid, "x**2").values
    lw = linearized_apply(problem.ubar, problem, x2)
    np.testing.assert_allclose(lw[problem.interior], 2.0, atol=1e-9)
    np.testing.assert_array_equal(lw[problem.boundary], 0.0)
    np.testing.assert_allclose(apply_coefficients(state.coefficients, np.full(problem.grid.shape, 3.0), problem), 0.0, atol=1e-9)


def test_linearization_coefficients_of_sigma_root():
    problem = quadratic_problem()
    state = linearize(problem.ubar, problem)
    interior = state.coefficients[problem.interior]
    np.testing.assert_allclose(interior, np.broadcast_to(0.5 * np.eye(2), interior.shape), atol=1e-10)
    np.testing.assert_array_equal(state.coefficients[problem.boundary], 0.0)


def test_jacobian_matches_linearization_and_differences():
    problem = monge_ampere_problem((17, 17))
    u = problem.exact
    state = linearize(u, problem)
    J = jacobian(state, problem)
    x, y = problem.grid.coords[..., 0], problem.grid.coords[..., 1]
    w = 0.1 * np.sin(np.pi * x) * np.cos(np.pi * y) + 0.05 * x
    Jw = (J @ w.ravel()).reshape(problem.grid.shape)
    np.testing.assert_allclose(Jw[problem.interior], linearized_apply(u, problem, w)[problem.interior], atol=1e-9)
    np.testing.assert_allclose(Jw[problem.boundary], w[problem.boundary], atol=1e-14)

    eps = 1e-6
    numeric = (residual(u + eps * w, problem) - residual(u - eps * w, problem)) / (2 * eps)
    np.testing.assert_allclose(Jw, numeric, atol=1e-5 * np.abs(Jw).max())


def test_monitor_on_the_quadratic():
    problem = quadratic_problem()
    monitor = estimate_monitor(problem.ubar, problem)
    assert monitor.max_hess_interior == pytest.approx(sqrt(2))
    assert monitor.max_hess_boundary == pytest.approx(sqrt(2))
    assert monitor.max_grad == pytest.approx(sqrt(2))
    assert monitor.c1_ratio == pytest.approx(sqrt(2) / (1 + sqrt(2)))
    zero = estimate_monitor(np.zeros(problem.grid.shape), problem)
    assert zero == (0.0, 0.0, 0.0, 0.0)


def test_newton_stops_immediately_at_the_solution():
    problem = quadratic_problem()
    u, report = newton_solve(problem, problem.ubar.values)
    assert report.converged
    assert report.newton_iterations == 0
    np.testing.assert_array_equal(u, problem.ubar.values)


def test_newton_in_three_dimensions():
    grid = MetricGrid.flat([0.0, 0.0, 0.0], [1.0, 1.0, 1.0], (9, 9, 9))
    exact = ScalarField.from_expression(grid, "(x**2 + y**2 + z**2)/2")
    problem = DirichletProblem(
        OperatorSpec.sigma_root(2, 3), grid, psi=ScalarField(grid, sqrt(3)), phi=exact, ubar=exact,
        exact=exact.values,
    )
    u, report = newton_solve(problem, 0.9 * exact.values)
    assert report.converged
    assert report.newton_iterations > 0
    assert np.abs(u - exact.values).max() < 1e-7
    assert report.error_inf < 1e-7


def test_newton_reports_nonconvergence_with_a_snapshot():
    problem = quadratic_problem()
    u0 = 0.9 * problem.ubar.values
    with pytest.raises(NonconvergenceError) as info:
        newton_solve(problem, u0, max_iters=0)
    snapshot = info.value.snapshot
    assert set(snapshot) >= {"u", "iteration", "residual", "t"}
    np.testing.assert_array_equal(snapshot["u"], u0)
    assert snapshot["residual"] > 0


def test_homotopy_starts_at_the_subsolution():
    problem = quadratic_problem(ubar="x**2 + y**2")
    psi_0 = start_rhs(problem)
    np.testing.assert_allclose(psi_0[problem.interior], 2.0)
    psi_t, phi_t = homotopy_data(problem, 0.0, psi_0)
    np.testing.assert_allclose(residual(problem.ubar, problem, psi_t, phi_t), 0.0, atol=1e-10)
    psi_1, phi_1 = homotopy_data(problem, 1.0, psi_0)
    np.testing.assert_array_equal(psi_1, problem.psi.values)
    np.testing.assert_array_equal(phi_1, problem.phi.values)


def test_homotopy_moves_the_boundary_data_from_the_subsolution():
    problem = monge_ampere_problem((9, 9))
    boundary = problem.boundary
    assert np.abs(problem.ubar.values - problem.phi.values)[boundary].min() > 1.0
    psi_0, phi_0 = homotopy_data(problem, 0.0)
    np.testing.assert_allclose(psi_0[problem.interior], 8.0, rtol=1e-10)
    np.testing.assert_array_equal(phi_0[boundary], problem.ubar.values[boundary])
    psi_1, phi_1 = homotopy_data(problem, 1.0)
    np.testing.assert_array_equal(psi_1, problem.psi.values)
    np.testing.assert_array_equal(phi_1[boundary], problem.phi.values[boundary])
    _, phi_half = homotopy_data(problem, 0.5)
    np.testing.assert_allclose(phi_half, 0.5 * (problem.ubar.values + problem.phi.values))


def test_continuation_from_the_exact_solution():
    problem = quadratic_problem()
    u, report = continuity_solve(problem)
    np.testing.assert_allclose(u, problem.ubar.values, atol=1e-12)
    assert report.details["accepted_t"][-1] == 1.0
    assert report.details["rejected_steps"] == 0
    assert report.t_reached == 1.0


def test_continuation_stall_keeps_the_last_accepted_point():
    problem = quadratic_problem(ubar="x**2 + y**2")
    config = SolverConfig(max_iters=0, initial_step=0.25, min_step=0.2)
    with pytest.raises(NonconvergenceError) as info:
        continuity_solve(problem, config)
    assert info.value.snapshot["t"] == 0.0
    np.testing.assert_array_equal(info.value.snapshot["u"], problem.ubar.values)


def test_infeasible_problems_are_rejected_before_solving():
    problem = quadratic_problem()
    low_psi = problem.with_psi(problem.grid.coords[..., 0] - 0.5)
    with pytest.raises(ProblemInfeasibleError):
        solve(low_psi)
    with pytest.raises(ProblemInfeasibleError):
        solve(quadratic_problem(psi=2.0))


def test_problem_construction_errors():
    periodic = MetricGrid.flat([0.0, 0.0], [1.0, 1.0], (9, 9), periodic=[True, False])
    field = ScalarField(periodic, 1.0)
    with pytest.raises(ParameterError):
        DirichletProblem(OperatorSpec.sigma_root(2, 2), periodic, field, field, field)
    grid = unit_square()
    other = ScalarField(unit_square(), 1.0)
    mine = ScalarField(grid, 1.0)
    with pytest.raises(ParameterError):
        DirichletProblem(OperatorSpec.sigma_root(2, 2), grid, other, mine, mine)
    with pytest.raises(ParameterError):
        DirichletProblem(OperatorSpec.sigma_root(2, 3), grid, mine, mine, mine)


def test_manufactured_right_hand_side():
    problem = monge_ampere_problem((9, 9))
    np.testing.assert_allclose(problem.psi.values, evaluate_expression(MONGE_AMPERE_PSI, problem.grid), rtol=1e-12)


def test_manufactured_problem_on_a_conformal_grid():
    grid = MetricGrid.conformal([0.0, 0.0], [1.0, 1.0], (9, 9), "0.1*x")
    problem = manufactured_problem(OperatorSpec.sigma_root(2, 2), grid, "(x**2 + y**2)", "3*(x**2 + y**2) - 3")
    assert problem.psi.values.min() > 0
    np.testing.assert_array_equal(problem.exact, problem.phi.values)


def test_monge_ampere_solve():
    problem = monge_ampere_problem((33, 33))
    u, report = solve(problem)
    assert report.converged
    assert report.residual_inf <= 1e-9
    assert report.error_inf < 1e-2
    assert report.continuation_steps >= 1


@pytest.mark.slow
def test_monge_ampere_converges_at_second_order():
    config = SolverConfig(preconditioner="ilu")
    rows = convergence_study(monge_ampere_problem, [(33, 33), (65, 65), (129, 129)], config)
    ratios = observed_orders(rows)["ratios"]
    assert len(ratios) == 2
    assert all(3.2 <= r <= 4.8 for r in ratios)


@pytest.mark.slow
def test_solution_does_not_depend_on_the_continuation_path():
    problem = monge_ampere_problem((17, 17))
    u_long, _ = solve(problem, SolverConfig(initial_step=1.0))
    u_short, _ = solve(problem, SolverConfig(initial_step=0.1))
    np.testing.assert_allclose(u_long, u_short, atol=1e-8)


@pytest.mark.slow
def test_continuation_matches_direct_newton():
    problem = monge_ampere_problem((17, 17))
    u_path, _ = continuity_solve(problem)
    u_direct, report = newton_solve(problem, problem.ubar.values)
    assert report.converged
    np.testing.assert_allclose(u_path, u_direct, atol=1e-8)


def test_solution_lies_above_the_subsolution():
    problem = monge_ampere_problem((17, 17))
    u, _ = solve(problem)
    scale = max(1.0, np.abs(problem.ubar.values).max())
    assert np.all(u >= problem.ubar.values - 1e-8 * scale)
    assert (u - problem.ubar.values).min() > 0


def test_linear_problem_matches_a_direct_solve():
    problem = poisson_problem((65, 65))
    u, report = solve(problem, SolverConfig(preconditioner="ilu", continuation=False))
    assert report.converged
    state = linearize(problem.ubar, problem)
    J = jacobian(state, problem)
    direct = problem.ubar.values.ravel() + spla.spsolve(J.tocsc(), -state.residual.ravel())
    np.testing.assert_allclose(u.ravel(), direct, atol=1e-9)


def test_poisson_config_loads(tmp_path):
    problem = load_problem(CONFIGS / "poisson.json")
    assert problem.spec == OperatorSpec.linear(2)
    assert problem.grid.shape == (33, 33)
    with pytest.raises(ConfigError):
        load_problem(tmp_path / "missing.json")


def test_krylov_solve_against_a_direct_solve(rng):
    problem = poisson_problem()
    J = jacobian(linearize(problem.ubar, problem), problem)
    b = rng.standard_normal(J.shape[0])
    expected = spla.spsolve(J.tocsc(), b)
    for kind in ("diagonal", "ilu", "none"):
        result = krylov_solve(J, b, kind)
        np.testing.assert_allclose(result.x, expected, rtol=1e-5, atol=1e-7)
    zero = krylov_solve(J, np.zeros(J.shape[0]))
    assert zero.iterations == 0
    assert not zero.x.any()
    with pytest.raises(ParameterError):
        krylov_solve(J, b, "jacobi")


def test_sweep_over_the_right_hand_side(tmp_path):
    problem = monge_ampere_problem((17, 17))
    rows = sweep(problem, parse_range("0:1:3"))
    assert [row.s for row in rows] == [0.0, 0.5, 1.0]
    assert all(row.residual <= 1e-9 for row in rows)
    assert all(row.c1_ratio > 0 for row in rows)
    assert empirical_c1(rows) == max(row.c1_ratio for row in rows)
    path = write_sweep_csv(tmp_path / "sweep.csv", rows)
    lines = path.read_text().splitlines()
    assert lines[0].split(",") == SWEEP_COLUMNS
    assert len(lines) == 4


def test_monitor_ratio_is_stable_across_the_amplitude_sweep():
    problem = monge_ampere_problem((17, 17))
    rows = sweep(problem, parse_range("0:1:11"))
    assert len(rows) == 11
    ratios = np.array([row.c1_ratio for row in rows])
    assert np.all(np.isfinite(ratios))
    assert ratios.min() > 0
    assert ratios.max() < 2.0 * ratios.min()


@pytest.mark.parametrize("text", ["0:1", "a:b:3", "0:1:0"])
def test_parse_range_errors(text):
    with pytest.raises(ParameterError):
        parse_range(text)


def test_sweep_rejects_unknown_parameters():
    with pytest.raises(ParameterError):
        sweep(quadratic_problem(), [0.0], param="chi_amp")


def test_barrier_part_a_with_a_linear_barrier():
    problem = quadratic_problem()
    cert = barrier_check(problem.ubar, problem.ubar, problem, t=1.0, N=0.0, delta=0.25)
    assert cert.details["part_a"]["passed"]
    assert cert.details["part_a"]["min_v"] == pytest.approx(0.0, abs=1e-12)
    assert cert.details["part_b"]["collar_nodes"] > 0


@pytest.mark.parametrize("t, N, delta", [(0.1, 10.0, 0.5), (-1.0, 0.0, 0.1), (0.1, 1.0, 0.0)])
def test_barrier_parameter_errors(t, N, delta):
    problem = quadratic_problem()
    with pytest.raises(ParameterError):
        barrier_check(problem.ubar, problem.ubar, problem, t, N, delta)


def test_barrier_holds_for_a_solved_problem():
    problem = monge_ampere_problem((17, 17))
    u, _ = solve(problem)
    cert = find_barrier_parameters(u, problem.ubar, problem)
    assert cert.passed
    assert cert.details["part_a"]["passed"]
    assert cert.details["part_b"]["passed"]
    assert cert.details["part_b"]["epsilon"] > 0
