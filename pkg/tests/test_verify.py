from math import inf

import numpy as np
import pytest

from conftest import unit_square

from app.core.errors import AdmissibilityError, ParameterError
from app.geometry.fields import ScalarField
from app.schemas.certificate import ConditionId, Verdict
from app.schemas.operator import ConeSpec, OperatorSpec
from app.verify.conditions import (
    delta_psi_f,
    verify_concave,
    verify_delta,
    verify_gradient_hypotheses,
    verify_growth,
    verify_matrix_concave,
    verify_monotone,
    verify_operator,
    verify_R40,
    verify_sum_fi_lambdai,
)
from app.verify.fields import SubsolutionMode, subsolution_matrix, verify_admissible_field, verify_subsolution
from app.verify.inequalities import verify_cor28_scale, verify_lemma27, verify_prop26


@pytest.mark.parametrize("spec", [OperatorSpec.sigma_root(2, 3), OperatorSpec.pk(2, 3), OperatorSpec.sigma_quotient(3, 1, 4)],
                         ids=lambda s: s.label)
def test_monotone_families_pass(spec):
    cert = verify_monotone(spec, n_samples=256)
    assert cert.passed
    assert cert.condition == ConditionId.MONOTONE_1_4
    assert len(cert.witnesses) == 1


def test_monotone_margin_of_sigma_1():
    assert verify_monotone(OperatorSpec.linear(3), n_samples=64).margin == pytest.approx(1.0)


def test_sigma_2_is_not_concave():
    cert = verify_concave(OperatorSpec.sigma(2, 3), n_samples=64)
    assert cert.verdict == Verdict.FAIL
    assert cert.details["max_hessian_eigenvalue"] == pytest.approx(2.0)


@pytest.mark.parametrize("spec", [OperatorSpec.sigma_root(2, 3), OperatorSpec.log_pk(2, 3), OperatorSpec.linear(3)],
                         ids=lambda s: s.label)
def test_concave_families_pass(spec):
    assert verify_concave(spec, n_samples=256).passed


STRUCTURE_FAMILIES = (
    [OperatorSpec.sigma_root(k, n) for n in (2, 3, 4) for k in (1, 2, 3) if k <= n]
    + [OperatorSpec.sigma_quotient(2, 1, 3), OperatorSpec.log_pk(2, 2), OperatorSpec.log_pk(2, 3)]
)


@pytest.mark.slow
@pytest.mark.parametrize("spec", STRUCTURE_FAMILIES, ids=lambda s: s.label)
def test_structure_conditions_on_ten_thousand_samples(spec):
    monotone = verify_monotone(spec, n_samples=10_000)
    concave = verify_concave(spec, n_samples=10_000)
    assert monotone.passed
    assert monotone.margin > 0
    assert concave.passed
    assert concave.n_samples == 10_000


@pytest.mark.slow
def test_sigma_2_fails_concavity_on_ten_thousand_samples():
    cert = verify_concave(OperatorSpec.sigma(2, 3), n_samples=10_000)
    assert cert.verdict == Verdict.FAIL
    assert cert.details["max_hessian_eigenvalue"] == pytest.approx(2.0)


def test_matrix_concavity_follows_the_spectral_function():
    assert verify_matrix_concave(OperatorSpec.sigma_root(2, 3), n_samples=128).passed
    assert not verify_matrix_concave(OperatorSpec.sigma(2, 3), n_samples=128).passed


def test_sum_fi_lambdai_of_log_pk_counts_subsets():
    cert = verify_sum_fi_lambdai(OperatorSpec.log_pk(2, 3), n_samples=128)
    assert cert.passed
    assert cert.margin == pytest.approx(3.0)


def test_delta():
    assert delta_psi_f([0.5, 2.0], OperatorSpec.sigma_root(2, 3)) == 0.5
    assert delta_psi_f([-4.0], OperatorSpec.log_pk(2, 3)) == inf
    assert not verify_delta(np.zeros(3), OperatorSpec.sigma_root(2, 3)).passed


def test_r40_for_sigma_1():
    cert = verify_R40(OperatorSpec.linear(3), delta0=0.2, n_samples=128)
    assert cert.passed
    assert cert.margin == pytest.approx(0.4)
    assert cert.details["global_min_ratio"] == pytest.approx(1.0 / 3.0)


def test_r40_is_vacuous_on_the_orthant():
    cert = verify_R40(OperatorSpec.sigma_root(3, 3), delta0=0.2, n_samples=64)
    assert cert.passed
    assert cert.details["vacuous"]


@pytest.mark.parametrize("delta0", [0.0, 1.0, -0.5])
def test_r40_rejects_delta0_outside_unit_interval(delta0):
    with pytest.raises(ParameterError):
        verify_R40(OperatorSpec.linear(3), delta0=delta0)


def test_growth_of_sum_fi():
    r20 = verify_growth(OperatorSpec.linear(3), ConditionId.R20_5_2, n_samples=64)
    assert not r20.passed
    r20p = verify_growth(OperatorSpec.linear(3), ConditionId.R20P_5_4, n_samples=64)
    assert r20p.passed
    assert r20p.details["delta_sigma"] == pytest.approx(3.0)
    assert "bound_violated" not in r20p.details


def test_r10_separates_homogeneous_and_logarithmic_families():
    assert verify_growth(OperatorSpec.sigma_root(2, 3), ConditionId.R10_5_1, n_samples=128).passed
    cert = verify_growth(OperatorSpec.log_pk(2, 3), ConditionId.R10_5_1, n_samples=128)
    assert not cert.passed
    minima = cert.details["minima"]
    assert minima == sorted(minima, reverse=True)


def test_growth_rejects_other_conditions():
    with pytest.raises(ParameterError):
        verify_growth(OperatorSpec.linear(3), ConditionId.MONOTONE_1_4)


def test_gradient_hypotheses_on_the_orthant():
    cert = verify_gradient_hypotheses(OperatorSpec.sigma_root(3, 3))
    assert cert.passed
    assert cert.details["case"] == "i"


def test_verify_operator_runs_the_requested_batch():
    certs = verify_operator(OperatorSpec.sigma_root(2, 3), [ConditionId.MONOTONE_1_4, "Delta_1_6"], n_samples=64)
    assert [c.condition for c in certs] == [ConditionId.MONOTONE_1_4, ConditionId.DELTA_1_6]
    assert all(c.passed for c in certs)
    assert certs[1].margin == pytest.approx(1.0)


def test_verify_operator_is_reproducible():
    spec = OperatorSpec.sigma_root(2, 3)
    first = verify_operator(spec, [ConditionId.CONCAVE_1_5], n_samples=64, seed=5)
    second = verify_operator(spec, [ConditionId.CONCAVE_1_5], n_samples=64, seed=5)
    assert first[0].margin == second[0].margin
    assert first[0].witnesses == second[0].witnesses


def test_verify_operator_rejects_field_conditions():
    with pytest.raises(ParameterError):
        verify_operator(OperatorSpec.sigma_root(2, 3), [ConditionId.ADMISSIBLE])


def test_lemma27_on_gamma_2():
    cert = verify_lemma27(OperatorSpec.sigma_root(2, 3), n_samples=10_000)
    assert cert.passed
    assert cert.n_samples > 0


def test_lemma27_is_vacuous_without_negative_entries():
    cert = verify_lemma27(OperatorSpec.sigma_root(3, 3), n_samples=100)
    assert cert.margin == inf
    assert cert.details["vacuous"]


def test_prop26_ratio_bounded_below():
    cert = verify_prop26(OperatorSpec.sigma_root(2, 3), n_samples=200)
    assert cert.passed
    assert cert.details["median_ratio"] >= cert.margin


def test_cor28_constant_is_stable_under_radius_doubling():
    cert = verify_cor28_scale(OperatorSpec.sigma_root(2, 3), epsilon=1.0, R=10.0, n_samples=400)
    assert cert.passed
    assert cert.details["C_2R"] >= cert.details["C_R"]


def test_cor28_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        verify_cor28_scale(OperatorSpec.sigma_root(2, 3), epsilon=0.0, R=10.0)


def _field(grid, expression):
    return ScalarField.from_expression(grid, expression)


def test_convex_quadratic_is_admissible(grid):
    cert = verify_admissible_field(subsolution_matrix(_field(grid, "x**2 + y**2"), None, grid), grid, ConeSpec.gamma(2, 2))
    assert cert.passed
    assert cert.margin > 0


@pytest.mark.parametrize("expression", ["0*x", "x**2 - y**2"])
def test_degenerate_and_saddle_fields_are_not_admissible(grid, expression):
    U = subsolution_matrix(_field(grid, expression), None, grid)
    cert = verify_admissible_field(U, grid, ConeSpec.gamma(2, 2))
    assert cert.verdict == Verdict.FAIL
    assert cert.details["violated"].startswith("sigma_")
    assert len(cert.details["worst_node"]) == 2


def test_admissible_field_in_gamma_1():
    grid = unit_square()
    cert = verify_admissible_field(subsolution_matrix(_field(grid, "x**2 - y**2/2"), None, grid), grid, ConeSpec.gamma(1, 2))
    assert cert.passed


def test_exact_solution_is_a_subsolution(grid):
    spec = OperatorSpec.sigma_root(2, 2)
    cert = verify_subsolution(_field(grid, "(x**2 + y**2)/2"), None, 1.0, grid, spec)
    assert cert.passed
    assert cert.margin == pytest.approx(0.0, abs=1e-9)


def test_steeper_quadratic_has_positive_slack(grid):
    spec = OperatorSpec.sigma_root(2, 2)
    cert = verify_subsolution(_field(grid, "2*(x**2 + y**2)"), None, 1.0, grid, spec)
    assert cert.margin == pytest.approx(3.0)


def test_subsolution_inequality_fails_when_psi_is_too_large(grid):
    spec = OperatorSpec.sigma_root(2, 2)
    cert = verify_subsolution(_field(grid, "(x**2 + y**2)/2"), None, 1.5, grid, spec)
    assert not cert.passed
    assert cert.details["psi_at_worst"] == 1.5


def test_subsolution_cone_mode(grid):
    spec = OperatorSpec.sigma_root(2, 2)
    cert = verify_subsolution(
        _field(grid, "2*(x**2 + y**2)"), None, 1.0, grid, spec,
        mode=SubsolutionMode.CONE, n_samples=32, stride=40,
    )
    assert cert.condition == ConditionId.SUBSOLUTION_CONE_1_10
    assert cert.passed
    assert cert.details["stride"] == 40


def test_inadmissible_subsolution_raises_with_node(grid):
    with pytest.raises(AdmissibilityError) as info:
        verify_subsolution(_field(grid, "x**2 - y**2"), None, 1.0, grid, OperatorSpec.sigma_root(2, 2))
    assert len(info.value.node) == 2
