"""
Sampled certificates for the matrix inequalities behind the second-derivative bounds.
"""
import logging
from typing import Optional

import numpy as np

from app.cone.level_set import DEFAULT_BAND, level_points, sample_far_level_set
from app.core.errors import ParameterError, SamplingError
from app.core.operator_factory import get_operator
from app.core.sampling import make_rng, random_orthogonal, sample_cone, sample_cone_with_negative
from app.matrix.inequalities import cor28_values, prop26_ratio
from app.schemas.certificate import Certificate, ConditionId
from app.schemas.operator import OperatorSpec
from app.verify.conditions import default_sigma

logger = logging.getLogger(__name__)

COR28_STABILITY = 0.05


def verify_lemma27(spec: OperatorSpec, n_samples: int = 10_000, seed: int = 0) -> Certificate:
    """
    sum_{i != r} f_i lam_i^2 >= (1/n) sum f_i lam_i^2 for lam_r < 0, on cone samples with a negative entry.

    The margin is the smallest slack relative to sum f_i lam_i^2.
    """
    op = get_operator(spec)
    lam = sample_cone_with_negative(op.cone, n_samples, make_rng(seed))
    if len(lam) == 0:
        return Certificate.build(
            ConditionId.LEMMA_2_7, float("inf"), spec=spec, seed=seed, details={"vacuous": True}
        )
    w = op.gradient(lam) * lam**2
    total = w.sum(axis=-1, keepdims=True)
    slack = np.where(lam < 0, ((total - w) - total / op.n) / total, np.inf).min(axis=-1)
    worst = int(np.argmin(slack))
    cert = Certificate.build(
        ConditionId.LEMMA_2_7,
        slack[worst],
        tolerance=-1e-12,
        spec=spec,
        n_samples=len(lam),
        seed=seed,
        witnesses=[lam[worst]],
    )
    logger.info(f"Lemma 2.7 {spec.label}: {cert.verdict.value} over {len(lam)} samples")
    return cert


def verify_prop26(
    spec: OperatorSpec,
    n_samples: int = 1000,
    seed: int = 0,
    distinguished: Optional[int] = None,
) -> Certificate:
    """Smallest prop26_ratio over random admissible matrices Q diag(lam) Q^T."""
    op = get_operator(spec)
    rng = make_rng(seed)
    lam = sample_cone(op.cone, n_samples, rng)
    q = random_orthogonal(rng, op.n, count=n_samples)
    matrices = np.einsum("mik,mk,mjk->mij", q, lam, q)
    ratios = np.empty(n_samples)
    for m in range(n_samples):
        ratios[m], _ = prop26_ratio(matrices[m], None, spec, distinguished)
    worst = int(np.argmin(ratios))
    cert = Certificate.build(
        ConditionId.PROP_2_6,
        ratios[worst],
        spec=spec,
        n_samples=n_samples,
        seed=seed,
        witnesses=[lam[worst]],
        details={"worst_matrix": matrices[worst].tolist(), "median_ratio": float(np.median(ratios))},
    )
    logger.info(f"Prop 2.6 {spec.label}: min ratio {ratios[worst]:.6g}")
    return cert


def level_set_pool(spec: OperatorSpec, sigma: float, max_radius: float, n_samples: int, seed: int) -> np.ndarray:
    """
    Level-set points up to norm max_radius: ray level points of uniform cone
    directions plus far-sampler bands covering every radius up to max_radius.
    """
    op = get_operator(spec)
    rng = make_rng(seed)
    near = level_points(op, sigma, sample_cone(op.cone, n_samples, rng, radii=(1.0, 1.0)))
    r0 = float(np.linalg.norm(near, axis=-1).min())
    parts = [near]
    per_band = max(16, n_samples // 8)
    r = r0
    while r < max_radius:
        try:
            parts.append(sample_far_level_set(op, sigma, r, per_band, rng))
        except SamplingError:
            logger.debug(f"no level-set band at radius {r:.4g}")
        r *= 1.0 + DEFAULT_BAND
    return np.concatenate(parts, axis=0)


def verify_cor28_scale(
    spec: OperatorSpec,
    epsilon: float,
    R: float,
    sigma: Optional[float] = None,
    n_samples: int = 1000,
    seed: int = 0,
) -> Certificate:
    """
    Stability of the empirical C* under radius doubling on the level set.

    C*(R) uses level points with |lam| <= R, C*(2R) those with |lam| <= 2R
    from the same pool; pass iff they differ by less than 5%.
    """
    if not epsilon > 0 or not R > 0:
        raise ParameterError(f"epsilon and R must be positive, got {epsilon}, {R}")
    sigma = default_sigma(spec) if sigma is None else sigma
    pool = level_set_pool(spec, sigma, 2.0 * R, n_samples, seed)
    norms = np.linalg.norm(pool, axis=-1)
    values = cor28_values(spec, epsilon, pool)
    inner = norms <= R
    outer = norms <= 2.0 * R
    if not inner.any():
        raise SamplingError(f"no level points within radius {R}", diagnostics={"R": R, "sigma": sigma})
    c_small = float(values[inner].max())
    c_large = float(values[outer].max())
    margin = COR28_STABILITY * max(abs(c_small), abs(c_large), 1e-12) - abs(c_large - c_small)
    worst = int(np.argmax(np.where(outer, values, -np.inf)))
    cert = Certificate.build(
        ConditionId.COR_2_8,
        margin,
        spec=spec,
        n_samples=int(outer.sum()),
        seed=seed,
        witnesses=[pool[worst]],
        details={"C_R": c_small, "C_2R": c_large, "epsilon": epsilon, "R": R, "sigma": sigma},
    )
    logger.info(f"Cor 2.8 {spec.label}: C*(R)={c_small:.6g}, C*(2R)={c_large:.6g}")
    return cert
