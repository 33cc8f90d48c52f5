from math import sqrt

import numpy as np
import pytest

from app.cone.level_set import level_point, level_points, sample_far_level_set, segment_max, theta_R, theta_R_details
from app.cone.tangent_cone import omega_estimate, tangent_cone_matrix_test, tangent_cone_plus_test
from app.core.errors import AdmissibilityError, ParameterError, RangeError
from app.core.operator_factory import get_operator
from app.core.sampling import make_rng, random_orthogonal, sample_cone, sample_cone_with_negative
from app.operators.cones import in_cone
from app.schemas.certificate import Verdict
from app.schemas.operator import ConeSpec, OperatorSpec


def test_sample_cone_is_reproducible_and_admissible():
    cone = ConeSpec.gamma(2, 4)
    a = sample_cone(cone, 300, make_rng(7))
    b = sample_cone(cone, 300, make_rng(7))
    np.testing.assert_array_equal(a, b)
    assert a.shape == (300, 4)
    assert in_cone(cone, a).all()
    norms = np.linalg.norm(a, axis=1)
    assert norms.min() >= 1e-2 * (1 - 1e-12)
    assert norms.max() <= 1e3 * (1 + 1e-12)


def test_samples_with_negative_entries():
    cone = ConeSpec.gamma(2, 3)
    lam = sample_cone_with_negative(cone, 200, make_rng(8))
    assert len(lam) > 0
    assert in_cone(cone, lam).all()
    assert (lam < 0).any(axis=1).all()
    assert sample_cone_with_negative(ConeSpec.orthant(3), 10, make_rng(8)).shape == (0, 3)


def test_random_orthogonal_is_orthogonal():
    q = random_orthogonal(make_rng(9), 4, count=20)
    np.testing.assert_allclose(np.einsum("mki,mkj->mij", q, q), np.broadcast_to(np.eye(4), (20, 4, 4)), atol=1e-12)


@pytest.mark.parametrize("spec, sigma, direction, expected", [
    (OperatorSpec.sigma_root(2, 3), 1.0, [1, 1, 1], np.ones(3) / sqrt(3)),
    (OperatorSpec.linear(3), 3.0, [1, 1, 1], np.ones(3)),
    (OperatorSpec.log_pk(2, 2), 0.0, [1, 1], [0.5, 0.5]),
])
def test_level_point(spec, sigma, direction, expected):
    np.testing.assert_allclose(level_point(spec, sigma, direction), expected, rtol=1e-10)


def test_level_points_land_on_the_level_set():
    for spec, sigma in ((OperatorSpec.sigma_quotient(3, 1, 4), 2.0), (OperatorSpec.log_pk(2, 3), 0.5)):
        op = get_operator(spec)
        lam = level_points(op, sigma, sample_cone(op.cone, 100, make_rng(10)))
        np.testing.assert_allclose(op.evaluate(lam), sigma, atol=1e-10)


def test_level_point_errors():
    with pytest.raises(AdmissibilityError):
        level_point(OperatorSpec.sigma_root(2, 3), 1.0, [2, 2, -1])
    with pytest.raises(RangeError):
        level_point(OperatorSpec.sigma_root(2, 3), 0.0, [1, 1, 1])


def test_far_level_set_samples_lie_in_the_band():
    spec = OperatorSpec.sigma_root(2, 3)
    op = get_operator(spec)
    lam = sample_far_level_set(op, 1.0, 20.0, 128, make_rng(11))
    norms = np.linalg.norm(lam, axis=1)
    assert len(lam) > 0
    assert norms.min() >= 20.0
    assert norms.max() <= 25.0 * (1 + 1e-8)
    np.testing.assert_allclose(op.evaluate(lam), 1.0, atol=1e-9)


def test_segment_max_of_linear_operator_is_the_level():
    op = get_operator(OperatorSpec.linear(3))
    lam = np.array([[5.0, -3.0, 1.0], [0.0, 0.0, 3.0]])
    np.testing.assert_allclose(segment_max(op, np.ones(3), lam), 3.0, atol=1e-12)


def test_theta_is_zero_for_a_plane():
    value = theta_R(OperatorSpec.linear(3), 3.0, [1, 1, 1], R=10.0, n_samples=64)
    assert value == pytest.approx(0.0, abs=1e-9)


def test_theta_is_positive_on_the_hyperbola():
    details = theta_R_details(OperatorSpec.sigma_root(2, 2), 1.0, [1, 1], R=5.0, n_samples=128)
    assert details["value"] > 0
    assert details["n_used"] > 0


def test_theta_is_nondecreasing_in_the_radius():
    spec = OperatorSpec.sigma_root(2, 2)
    values = [theta_R(spec, 1.0, [2, 2], R, n_samples=128, seed=3) for R in (10.0, 20.0, 40.0)]
    assert values[0] <= values[1] + 1e-9
    assert values[1] <= values[2] + 1e-9


def hyperbola_theta(mu, R):
    """Theta_R on {lam_1 lam_2 = 1}, whose sphere section is two mirror points."""
    a = sqrt((R**2 + sqrt(R**4 - 4.0)) / 2.0)
    t = np.linspace(0.0, 1.0, 200_001)[:, None]
    values = []
    for lam in (np.array([a, 1.0 / a]), np.array([1.0 / a, a])):
        points = t * np.asarray(mu, dtype=np.float64) + (1.0 - t) * lam
        values.append(np.sqrt(points[:, 0] * points[:, 1]).max() - 1.0)
    return min(values)


def test_theta_grows_strictly_once_positive():
    spec = OperatorSpec.sigma_root(2, 2)
    radii = (10.0, 20.0, 40.0)
    exact = [hyperbola_theta([2.0, 2.0], R) for R in radii]
    assert exact[0] > 0
    assert exact[0] < exact[1] < exact[2]
    sampled = [theta_R(spec, 1.0, [2, 2], R, n_samples=128, seed=3) for R in radii]
    assert sampled[0] < sampled[1] < sampled[2]
    for value, bound in zip(sampled, exact):
        assert value >= bound - 1e-9


@pytest.mark.parametrize("spec, sigma, mu", [
    (OperatorSpec.sigma_root(2, 3), 1.0, [2.0, 2.0, 2.0]),
    (OperatorSpec.sigma_quotient(3, 1, 4), 1.0, [2.0, 1.5, 1.0, 3.0]),
    (OperatorSpec.log_pk(2, 3), 0.0, [1.0, 1.0, 1.0]),
], ids=lambda v: v.label if isinstance(v, OperatorSpec) else None)
def test_level_set_samples_satisfy_the_concavity_inequality(spec, sigma, mu):
    op = get_operator(spec)
    mu = np.asarray(mu)
    lam = sample_far_level_set(op, sigma, 10.0, 256, make_rng(17), anchor=mu)
    f = op.gradient(lam)
    lhs = (f * (mu - lam)).sum(axis=1)
    rhs = op.evaluate(mu) - op.evaluate(lam)
    scale = np.maximum(1.0, (np.abs(f) * (np.abs(mu) + np.abs(lam))).sum(axis=1))
    assert np.all(lhs - rhs >= -1e-10 * scale)


def test_theta_rejects_bad_mu_and_radius():
    spec = OperatorSpec.sigma_root(2, 3)
    with pytest.raises(ParameterError):
        theta_R(spec, 1.0, [2, 2, 2], R=1.0)
    with pytest.raises(ParameterError):
        theta_R(spec, 1.0, [0.1, 0.1, 0.1], R=10.0)
    with pytest.raises(ParameterError):
        theta_R(spec, 1.0, [2, 2, -1], R=10.0)


def test_plane_has_no_strict_tangent_cone():
    cert = tangent_cone_plus_test(OperatorSpec.linear(3), 3.0, [1, 1, 1], epsilon=0.1, R=10.0, n_samples=64)
    assert cert.verdict == Verdict.FAIL
    assert cert.theta_estimate == pytest.approx(-0.3, abs=1e-9)


@pytest.mark.parametrize("R", [10.0, 20.0, 40.0])
def test_positive_orthant_point_passes_for_sigma_root(R):
    cert = tangent_cone_plus_test(OperatorSpec.sigma_root(2, 3), 1.0, [2, 2, 2], epsilon=0.05, R=R, n_samples=128)
    assert cert.passed
    assert cert.R_used == R
    assert len(cert.worst_sample) == 3


def test_tangent_cone_margin_grows_with_the_radius():
    spec = OperatorSpec.sigma_root(2, 3)
    thetas = [
        tangent_cone_plus_test(spec, 1.0, [2, 2, 2], 0.05, R, n_samples=128, seed=2).theta_estimate
        for R in (10.0, 20.0, 40.0)
    ]
    assert thetas == sorted(thetas)


@pytest.mark.slow
def test_random_orthant_points_pass_at_every_scale():
    rng = make_rng(21)
    spec = OperatorSpec.sigma_root(2, 3)
    for mu in rng.uniform(0.5, 3.0, size=(100, 3)):
        thetas = [tangent_cone_plus_test(spec, 1.0, mu, 0.05, R, n_samples=32).theta_estimate for R in (10.0, 20.0, 40.0)]
        assert min(thetas) > 0
        assert thetas == sorted(thetas)


@pytest.mark.parametrize("mu", [[1, 1, 1], [-0.5, 2, 2], [0.8, 0.8, 2], [3, 1, 0.7]])
def test_log_pk_tangent_cone_contains_points_of_the_cone(mu):
    cert = tangent_cone_plus_test(OperatorSpec.log_pk(2, 3), 0.0, mu, epsilon=0.05, R=10.0, n_samples=128)
    assert cert.passed


def test_matrix_form_agrees_on_diagonal_input():
    spec = OperatorSpec.sigma_root(2, 3)
    cert = tangent_cone_matrix_test(spec, 1.0, 2.0 * np.eye(3), epsilon=0.05, R=10.0, n_samples=64)
    assert cert.passed
    assert cert.details["form"] == "matrix"
    np.testing.assert_allclose(cert.mu, [2, 2, 2])


def test_tangent_cone_parameter_checks():
    spec = OperatorSpec.sigma_root(2, 3)
    with pytest.raises(ParameterError):
        tangent_cone_plus_test(spec, 1.0, [2, 2, 2], epsilon=0.0, R=10.0)
    with pytest.raises(ParameterError):
        tangent_cone_plus_test(spec, 1.0, [2, 2, 2], epsilon=0.1, R=-1.0)


def test_omega_is_bounded_below_by_the_level_gap():
    spec = OperatorSpec.sigma_root(2, 3)
    mu = np.ones(3) * 2.0 / sqrt(3)
    assert omega_estimate(spec, 1.0, mu, N=10.0, n_samples=128) >= 1.0 - 1e-9


def test_omega_vanishes_for_a_plane():
    value = omega_estimate(OperatorSpec.linear(3), 3.0, [1, 1, 1], N=10.0, n_samples=64)
    assert value == pytest.approx(0.0, abs=1e-9)


def test_omega_positive_on_the_hyperbola():
    assert omega_estimate(OperatorSpec.sigma_root(2, 2), 1.0, [1, 1], N=10.0, n_samples=64) > 0
