"""
Sampled verifiers for the structure conditions on f.

Each verifier returns a Certificate that is reproducible from
(spec, condition, seed, n_samples).
"""
import logging
from typing import Iterable, List, Optional, Sequence

import numpy as np

from app.cone.level_set import level_points, sample_far_level_set
from app.core.errors import ParameterError
from app.core.operator_factory import get_operator
from app.core.sampling import make_rng, random_orthogonal, sample_cone, sample_cone_with_negative
from app.matrix.jacobi import jacobi_eigvals
from app.matrix.spectral import big_f_second
from app.schemas.certificate import Certificate, ConditionId
from app.schemas.operator import ConeKind, OperatorSpec

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 512
CONCAVE_TOL = -1e-8
SUM_FI_LAMBDAI_TOL = -1e-10
GROWTH_RADII = (1e1, 1e2, 1e3, 1e4)
SMALL_RADII = (1.0, 1e-1, 1e-2, 1e-3)
GROWTH_FACTOR = 10.0
R10_DROP_RATIO = 0.5
R20P_SCALES = tuple(np.geomspace(1e-2, 1e4, 25))

OPERATOR_CONDITIONS = (
    ConditionId.MONOTONE_1_4,
    ConditionId.CONCAVE_1_5,
    ConditionId.DELTA_1_6,
    ConditionId.SUM_FI_LAMBDAI_1_11,
    ConditionId.R10_5_1,
    ConditionId.R20_5_2,
    ConditionId.R20P_5_4,
    ConditionId.R30_5_5,
    ConditionId.R40_1_12,
)


def default_sigma(spec: OperatorSpec) -> float:
    """A level above sup over the cone boundary: 1 for the sigma families, 0 for log P_k."""
    return 1.0 if get_operator(spec).sup_boundary == 0.0 else 0.0


def _log(cert: Certificate) -> Certificate:
    label = cert.spec.label if cert.spec else "-"
    logger.info(f"{cert.condition.value} {label}: {cert.verdict.value} (margin {cert.margin:.6g})")
    return cert


def verify_monotone(spec: OperatorSpec, n_samples: int = DEFAULT_SAMPLES, seed: int = 0) -> Certificate:
    """min over samples and i of f_i(lam); pass iff positive."""
    op = get_operator(spec)
    lam = sample_cone(op.cone, n_samples, make_rng(seed))
    grad = op.gradient(lam)
    worst = int(np.argmin(grad.min(axis=-1)))
    return _log(Certificate.build(
        ConditionId.MONOTONE_1_4,
        grad[worst].min(),
        spec=spec,
        n_samples=n_samples,
        seed=seed,
        witnesses=[lam[worst]],
    ))


def verify_concave(spec: OperatorSpec, n_samples: int = DEFAULT_SAMPLES, seed: int = 0) -> Certificate:
    """
    Largest Hessian eigenvalue over samples, scaled by max(1, |hess|_F).

    The margin is minus the worst scaled eigenvalue; pass iff it exceeds -1e-8.
    """
    op = get_operator(spec)
    lam = sample_cone(op.cone, n_samples, make_rng(seed))
    hess = op.hessian(lam)
    top = jacobi_eigvals(hess)[..., 0]
    scale = np.maximum(1.0, np.linalg.norm(hess, axis=(-2, -1)))
    scaled = top / scale
    worst = int(np.argmax(scaled))
    return _log(Certificate.build(
        ConditionId.CONCAVE_1_5,
        -scaled[worst],
        tolerance=CONCAVE_TOL,
        spec=spec,
        n_samples=n_samples,
        seed=seed,
        witnesses=[lam[worst]],
        details={"max_hessian_eigenvalue": float(top[worst])},
    ))


def verify_matrix_concave(spec: OperatorSpec, n_samples: int = DEFAULT_SAMPLES, seed: int = 0) -> Certificate:
    """
    Concavity of F(A) = f(lambda[A]) along random symmetric directions H.

    A = Q diag(lam) Q^T with lam sampled in the cone; the margin is minus the
    largest d^2/dt^2 F(A + tH) relative to |H|_F^2 max(1, |hess f|_F).
    """
    op = get_operator(spec)
    rng = make_rng(seed)
    lam = sample_cone(op.cone, n_samples, rng)
    q = random_orthogonal(rng, op.n, count=n_samples)
    A = np.einsum("mik,mk,mjk->mij", q, lam, q)
    h = rng.standard_normal((n_samples, op.n, op.n))
    h = 0.5 * (h + np.swapaxes(h, -1, -2))
    second = big_f_second(A, None, spec, h)
    scale = np.maximum(1.0, np.linalg.norm(op.hessian(lam), axis=(-2, -1))) * (h * h).sum(axis=(-2, -1))
    scaled = second / scale
    worst = int(np.argmax(scaled))
    return _log(Certificate.build(
        ConditionId.CONCAVE_MATRIX_2_5,
        -scaled[worst],
        tolerance=CONCAVE_TOL,
        spec=spec,
        n_samples=n_samples,
        seed=seed,
        witnesses=[lam[worst]],
        details={"max_second_derivative": float(second[worst]), "worst_matrix": A[worst].tolist()},
    ))


def verify_sum_fi_lambdai(spec: OperatorSpec, n_samples: int = DEFAULT_SAMPLES, seed: int = 0) -> Certificate:
    """min sampled sum f_i lam_i."""
    op = get_operator(spec)
    lam = sample_cone(op.cone, n_samples, make_rng(seed))
    values = op.euler_sum(lam)
    worst = int(np.argmin(values))
    return _log(Certificate.build(
        ConditionId.SUM_FI_LAMBDAI_1_11,
        values[worst],
        tolerance=SUM_FI_LAMBDAI_TOL,
        spec=spec,
        n_samples=n_samples,
        seed=seed,
        witnesses=[lam[worst]],
    ))


def delta_psi_f(psi, spec: OperatorSpec) -> float:
    """inf psi - sup over the cone boundary of f (+inf for log P_k)."""
    psi = np.asarray(psi, dtype=np.float64)
    return float(np.min(psi) - get_operator(spec).sup_boundary)


def verify_delta(psi, spec: OperatorSpec) -> Certificate:
    value = delta_psi_f(psi, spec)
    return _log(Certificate.build(
        ConditionId.DELTA_1_6,
        value,
        spec=spec,
        details={"inf_psi": float(np.min(psi)), "sup_boundary_f": get_operator(spec).sup_boundary},
    ))


def _r40_margins(op, lam: np.ndarray, delta0: float):
    grad = op._gradient(lam)
    slack = grad - delta0 * grad.sum(axis=-1, keepdims=True)
    slack = np.where(lam < 0, slack, np.inf)
    per_sample = slack.min(axis=-1)
    ratio = np.where(lam < 0, grad / grad.sum(axis=-1, keepdims=True), np.inf).min(axis=-1)
    return per_sample, ratio


def verify_R40(
    spec: OperatorSpec,
    delta0: float,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    sigma: Optional[float] = None,
    radius: Optional[float] = None,
) -> Certificate:
    """
    f_j >= delta0 sum f_i at level points with lam_j < 0.

    Without a radius the check is global: cone directions with a negative
    entry are pushed onto the level set. With a radius, only far level points
    (|lam| >= radius) count and the global margin is kept in the details.
    Cones without negative entries pass vacuously with margin +inf.

    Raises:
        ParameterError: If delta0 is outside (0, 1)
    """
    if not 0.0 < delta0 < 1.0:
        raise ParameterError(f"delta0 must lie in (0, 1), got {delta0}")
    op = get_operator(spec)
    sigma = default_sigma(spec) if sigma is None else sigma
    rng = make_rng(seed)
    directions = sample_cone_with_negative(op.cone, n_samples, rng)
    details = {"sigma": sigma, "delta0": delta0}
    witnesses = []

    global_margin = float("inf")
    if len(directions):
        lam = level_points(op, sigma, directions)
        margins, ratio = _r40_margins(op, lam, delta0)
        worst = int(np.argmin(margins))
        global_margin = float(margins[worst])
        details["global_min_ratio"] = float(ratio.min())
        witnesses.append(lam[worst])
    details["global_margin"] = global_margin
    margin = global_margin

    if radius is not None:
        far = sample_far_level_set(op, sigma, radius, n_samples, rng)
        far = far[(far < 0).any(axis=-1)]
        far_margin = float("inf")
        if len(far):
            margins, ratio = _r40_margins(op, far, delta0)
            worst = int(np.argmin(margins))
            far_margin = float(margins[worst])
            details["large_radius_min_ratio"] = float(ratio.min())
            witnesses = [far[worst]]
        details["radius"] = radius
        details["large_radius_margin"] = far_margin
        margin = far_margin

    if not np.isfinite(margin):
        details["vacuous"] = True
    return _log(Certificate.build(
        ConditionId.R40_1_12,
        margin,
        spec=spec,
        n_samples=n_samples,
        seed=seed,
        witnesses=witnesses,
        details=details,
    ))


def _level_minima(op, sigma: float, radii: Sequence[float], functional, n_samples: int, seed: int):
    values, witnesses = [], []
    for r in radii:
        lam = sample_far_level_set(op, sigma, r, n_samples, make_rng(seed))
        v = functional(lam)
        i = int(np.argmin(v))
        values.append(float(v[i]))
        witnesses.append(lam[i])
    return values, witnesses


def _sum_fi(op):
    return lambda lam: op._gradient(lam).sum(axis=-1)


def _sum_fi_lambdai_sq(op):
    return lambda lam: np.einsum("ij,ij->i", op._gradient(lam), lam * lam)


def _growth_margin(values: List[float]) -> float:
    """Positive iff values increase and the last is at least ten times the first."""
    steps = np.diff(values)
    increasing = float(steps.min()) if len(steps) else 0.0
    factor = values[-1] - GROWTH_FACTOR * values[0]
    return min(increasing, factor)


def _r20p_bound(op, sigma: float) -> dict:
    """Best (f(A 1) - sigma) / A over a grid of A: lower bound for sum f_i when (1.11) holds."""
    ones = np.ones(op.n)
    scales = np.asarray(R20P_SCALES)
    points = scales[:, None] * ones
    bounds = (op._evaluate(points) - sigma) / scales
    i = int(np.argmax(bounds))
    return {"concavity_bound": float(bounds[i]), "A": float(scales[i])}


def verify_growth(
    spec: OperatorSpec,
    which: ConditionId,
    sigma: Optional[float] = None,
    radii: Optional[Iterable[float]] = None,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> Certificate:
    """
    Behaviour of level-set functionals at infinity, or of f near the origin.

    R20: min sum f_i at each radius increases and grows tenfold.
    R20': delta_sigma = min sum f_i over all radii is positive; the concavity
    bound (f(A 1) - sigma)/A is recorded and must not exceed delta_sigma
    whenever sum f_i lam_i >= 0 holds on the samples.
    R30: as R20 for sum f_i lam_i^2.
    R10: min f over cone points of norm r for r decreasing; passes when the
    drops shrink (last drop <= half the first), i.e. f stays above a floor.
    """
    op = get_operator(spec)
    sigma = default_sigma(spec) if sigma is None else sigma
    details = {"sigma": sigma}

    if which == ConditionId.R10_5_1:
        radii = sorted(radii or SMALL_RADII, reverse=True)
        directions = sample_cone(op.cone, n_samples, make_rng(seed), radii=(1.0, 1.0))
        values = []
        witnesses = []
        for r in radii:
            v = op._evaluate(r * directions)
            i = int(np.argmin(v))
            values.append(float(v[i]))
            witnesses.append(r * directions[i])
        drops = -np.diff(values)
        first, last = float(drops[0]), float(drops[-1])
        margin = R10_DROP_RATIO * max(first, 0.0) - last
        tolerance = -1e-12 * max(1.0, abs(values[-1]))
        details.update({"radii": list(radii), "minima": values, "L0_estimate": values[-1]})
        return _log(Certificate.build(which, margin, tolerance, spec, n_samples, seed, witnesses[-1:], details))

    if which not in (ConditionId.R20_5_2, ConditionId.R20P_5_4, ConditionId.R30_5_5):
        raise ParameterError(f"{which} is not a growth condition")
    radii = sorted(radii or GROWTH_RADII)
    functional = _sum_fi_lambdai_sq(op) if which == ConditionId.R30_5_5 else _sum_fi(op)
    values, witnesses = _level_minima(op, sigma, radii, functional, n_samples, seed)
    details.update({"radii": list(radii), "minima": values})

    if which == ConditionId.R20P_5_4:
        delta_sigma = min(values)
        details["delta_sigma"] = delta_sigma
        bound = _r20p_bound(op, sigma)
        details.update(bound)
        euler = verify_sum_fi_lambdai(spec, n_samples, seed)
        details["sum_fi_lambdai_holds"] = euler.passed
        margin = delta_sigma
        if euler.passed and delta_sigma < bound["concavity_bound"] * (1.0 - 1e-9) - 1e-12:
            details["bound_violated"] = True
            margin = -abs(bound["concavity_bound"] - delta_sigma)
        worst = int(np.argmin(values))
        return _log(Certificate.build(which, margin, 0.0, spec, n_samples, seed, [witnesses[worst]], details))

    margin = _growth_margin(values)
    return _log(Certificate.build(which, margin, 0.0, spec, n_samples, seed, witnesses[-1:], details))


def _is_positive_orthant(spec: OperatorSpec) -> bool:
    cone = spec.cone
    return (
        cone.kind == ConeKind.POSITIVE_ORTHANT
        or (cone.kind == ConeKind.GAMMA_K and cone.k == cone.n)
        or (cone.kind == ConeKind.PK and cone.k == 1)
    )


def verify_gradient_hypotheses(
    spec: OperatorSpec,
    delta0: float = 0.1,
    radius: float = 1e3,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    sigma: Optional[float] = None,
) -> Certificate:
    """
    Hypotheses under which the gradient estimate holds.

    Case (i): the cone is the positive orthant. Case (iii'): sum f_i lam_i >= 0
    on the cone and f_j >= delta0 sum f_i for lam_j < 0 at large radius.
    """
    details = {}
    if _is_positive_orthant(spec):
        details["case"] = "i"
        return _log(Certificate.build(
            ConditionId.GRADIENT_HYPOTHESES_5_2, float("inf"), spec=spec, seed=seed, details=details
        ))
    euler = verify_sum_fi_lambdai(spec, n_samples, seed)
    r40 = verify_R40(spec, delta0, n_samples, seed, sigma=sigma, radius=radius)
    margin = min(euler.margin - euler.tolerance, r40.margin)
    details.update({
        "case": "iii'",
        "sum_fi_lambdai_margin": euler.margin,
        "r40_margin": r40.margin,
        "delta0": delta0,
        "radius": radius,
    })
    return _log(Certificate.build(
        ConditionId.GRADIENT_HYPOTHESES_5_2,
        margin,
        spec=spec,
        n_samples=n_samples,
        seed=seed,
        witnesses=r40.witnesses,
        details=details,
    ))


def verify_operator(
    spec: OperatorSpec,
    conditions: Optional[Iterable[ConditionId]] = None,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    delta0: float = 0.1,
    sigma: Optional[float] = None,
    radius: Optional[float] = None,
) -> List[Certificate]:
    """
    Run a batch of operator-level verifiers.

    Delta_1_6 is evaluated with psi equal to sigma.
    """
    sigma = default_sigma(spec) if sigma is None else sigma
    runners = {
        ConditionId.MONOTONE_1_4: lambda: verify_monotone(spec, n_samples, seed),
        ConditionId.CONCAVE_1_5: lambda: verify_concave(spec, n_samples, seed),
        ConditionId.CONCAVE_MATRIX_2_5: lambda: verify_matrix_concave(spec, n_samples, seed),
        ConditionId.DELTA_1_6: lambda: verify_delta(sigma, spec),
        ConditionId.SUM_FI_LAMBDAI_1_11: lambda: verify_sum_fi_lambdai(spec, n_samples, seed),
        ConditionId.R40_1_12: lambda: verify_R40(spec, delta0, n_samples, seed, sigma=sigma, radius=radius),
        ConditionId.GRADIENT_HYPOTHESES_5_2: lambda: verify_gradient_hypotheses(
            spec, delta0, radius or 1e3, n_samples, seed, sigma
        ),
    }
    certificates = []
    for condition in conditions or OPERATOR_CONDITIONS:
        condition = ConditionId(condition)
        if condition in runners:
            certificates.append(runners[condition]())
        elif condition in (ConditionId.R10_5_1, ConditionId.R20_5_2, ConditionId.R20P_5_4, ConditionId.R30_5_5):
            certificates.append(verify_growth(spec, condition, sigma=sigma, n_samples=n_samples, seed=seed))
        else:
            raise ParameterError(f"{condition.value} is not an operator-level condition")
    return certificates
