"""
Sampled tests for the tangent cone at infinity of a level set.

All tests walk the far part of {f = sigma} with the level-set sampler and
report the worst margin; they are semi-decisions, never proofs.
"""
import logging
from typing import Optional

import numpy as np

from app.cone.level_set import DEFAULT_BAND, _check_mu, sample_far_level_set
from app.core.errors import ParameterError
from app.core.operator_factory import get_operator
from app.core.sampling import make_rng, random_orthogonal
from app.matrix.jacobi import jacobi_eigh
from app.schemas.certificate import ConeMembershipCertificate, Verdict
from app.schemas.operator import OperatorSpec

logger = logging.getLogger(__name__)

OMEGA_BAND = 3.0


def _check_scale(epsilon: float, R: float) -> None:
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    if not R > 0:
        raise ParameterError(f"R must be positive, got {R}")


def tangent_cone_margins(op, mu: np.ndarray, lam: np.ndarray, epsilon: float) -> np.ndarray:
    """sum_i f_i(lam)(mu_i - lam_i) - epsilon sum_i f_i(lam), per row of lam."""
    grad = op._gradient(lam)
    return np.einsum("ij,ij->i", grad, mu[None, :] - lam) - epsilon * grad.sum(axis=-1)


def tangent_cone_plus_test(
    spec: OperatorSpec,
    sigma: float,
    mu,
    epsilon: float,
    R: float,
    n_samples: int = 256,
    seed: int = 0,
    band: float = DEFAULT_BAND,
) -> ConeMembershipCertificate:
    """
    Evidence for mu in the strict tangent cone C_sigma^+ at scale R.

    Passes iff sum f_i(lam)(mu_i - lam_i) > epsilon sum f_i(lam) at every
    sampled far level point lam.

    Raises:
        ParameterError: If epsilon or R is not positive
        SamplingError: If the level set yields no samples at radius R
    """
    _check_scale(epsilon, R)
    mu = np.asarray(mu, dtype=np.float64)
    if not np.all(np.isfinite(mu)):
        raise ParameterError(f"mu must be finite, got {mu.tolist()}")
    op = get_operator(spec)
    lam = sample_far_level_set(op, sigma, R, n_samples, make_rng(seed), band=band, anchor=mu)
    margins = tangent_cone_margins(op, mu, lam, epsilon)
    worst = int(np.argmin(margins))
    theta = float(margins[worst])
    verdict = Verdict.PASS if theta > 0 else Verdict.FAIL
    logger.info(f"tangent cone test {spec.label} sigma={sigma} R={R}: {verdict.value} (margin {theta:.6g})")
    return ConeMembershipCertificate(
        spec=spec,
        mu=mu.tolist(),
        sigma=float(sigma),
        epsilon=float(epsilon),
        theta_estimate=theta,
        R_used=float(R),
        worst_sample=lam[worst].tolist(),
        verdict=verdict,
        seed=seed,
        n_samples=int(len(lam)),
        details={"requested_samples": n_samples, "band": band, "form": "spectrum"},
    )


def tangent_cone_matrix_test(
    spec: OperatorSpec,
    sigma: float,
    A,
    epsilon: float,
    R: float,
    n_samples: int = 256,
    seed: int = 0,
    band: float = DEFAULT_BAND,
) -> ConeMembershipCertificate:
    """
    Matrix form of the tangent cone test.

    Far level-set matrices are B = Q diag(lam) Q^T with lam from the
    level-set sampler and Q Haar-random; the margin is
    F^{ij}(B)(A_ij - B_ij) - epsilon trace F^{ij}(B).
    """
    _check_scale(epsilon, R)
    A = np.asarray(A, dtype=np.float64)
    A = 0.5 * (A + A.T)
    op = get_operator(spec)
    if A.shape != (op.n, op.n):
        raise ParameterError(f"A must be {op.n}x{op.n}, got {A.shape}")
    mu, _ = jacobi_eigh(A)
    rng = make_rng(seed)
    lam = sample_far_level_set(op, sigma, R, n_samples, rng, band=band, anchor=mu)
    q = random_orthogonal(rng, op.n, count=len(lam))
    grad = op._gradient(lam)
    # Q^T A Q diagonal entries, so that F^{ij}(B) A_ij = sum_i f_i (Q^T A Q)_ii
    rotated = np.einsum("mki,kl,mli->mi", q, A, q)
    margins = np.einsum("mi,mi->m", grad, rotated - lam) - epsilon * grad.sum(axis=-1)
    worst = int(np.argmin(margins))
    theta = float(margins[worst])
    verdict = Verdict.PASS if theta > 0 else Verdict.FAIL
    worst_b = (q[worst] * lam[worst]) @ q[worst].T
    logger.info(f"matrix tangent cone test {spec.label} sigma={sigma} R={R}: {verdict.value} (margin {theta:.6g})")
    return ConeMembershipCertificate(
        spec=spec,
        mu=mu.tolist(),
        sigma=float(sigma),
        epsilon=float(epsilon),
        theta_estimate=theta,
        R_used=float(R),
        worst_sample=lam[worst].tolist(),
        verdict=verdict,
        seed=seed,
        n_samples=int(len(lam)),
        details={
            "requested_samples": n_samples,
            "band": band,
            "form": "matrix",
            "worst_matrix": worst_b.tolist(),
        },
    )


def omega_estimate(
    spec: OperatorSpec,
    sigma: float,
    mu,
    N: float,
    n_samples: int = 256,
    seed: int = 0,
    band: Optional[float] = None,
) -> float:
    """
    Empirical omega_mu: min of sum f_i(lam)(mu_i - lam_i) over level points with |lam| >= N.

    Samples cover norms in [N, (1 + band) N], band 3 by default.
    """
    if not N > 0:
        raise ParameterError(f"N must be positive, got {N}")
    op = get_operator(spec)
    mu = np.asarray(mu, dtype=np.float64)
    _check_mu(op, sigma, mu)
    lam = sample_far_level_set(op, sigma, N, n_samples, make_rng(seed), band=band or OMEGA_BAND, anchor=mu)
    values = tangent_cone_margins(op, mu, lam, 0.0)
    return float(values.min())
