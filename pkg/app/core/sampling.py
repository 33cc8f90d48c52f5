"""
Seeded samplers over cones.

Every sampler takes an explicit numpy Generator so that results are
reproducible from (seed, n_samples).
"""
import logging

import numpy as np

from app.core.errors import SamplingError
from app.operators.cones import in_cone
from app.schemas.operator import ConeKind, ConeSpec

logger = logging.getLogger(__name__)

MAX_ROUNDS = 50


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def unit_directions(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    x = rng.standard_normal((count, n))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def sample_cone(
    cone: ConeSpec,
    n_samples: int,
    rng: np.random.Generator,
    radii: tuple = (1e-2, 1e3),
) -> np.ndarray:
    """
    Points of the open cone with log-uniform norms in ``radii``.

    Directions are uniform on the sphere intersected with the cone
    (rejection sampling).

    Returns:
        np.ndarray of shape (n_samples, n)

    Raises:
        SamplingError: If rejection keeps failing
    """
    kept = []
    total = 0
    for _ in range(MAX_ROUNDS):
        batch = max(4 * n_samples, 64)
        x = unit_directions(rng, batch, cone.n)
        x = x[in_cone(cone, x)]
        kept.append(x)
        total += len(x)
        if total >= n_samples:
            break
    directions = np.concatenate(kept, axis=0)[:n_samples]
    if len(directions) < n_samples:
        raise SamplingError(
            f"only {len(directions)} of {n_samples} directions landed in {cone.label}",
            diagnostics={"cone": cone.label, "accepted": len(directions)},
        )
    lo, hi = np.log(radii[0]), np.log(radii[1])
    r = np.exp(rng.uniform(lo, hi, size=n_samples))
    return directions * r[:, None]


def sample_cone_with_negative(
    cone: ConeSpec, n_samples: int, rng: np.random.Generator, radii: tuple = (1e-2, 1e3)
) -> np.ndarray:
    """Cone points that have at least one negative entry (may return fewer)."""
    if cone.kind == ConeKind.POSITIVE_ORTHANT or (cone.kind == ConeKind.GAMMA_K and cone.k == cone.n) \
            or (cone.kind == ConeKind.PK and cone.k == 1):
        return np.zeros((0, cone.n))
    kept = []
    total = 0
    for _ in range(MAX_ROUNDS):
        x = sample_cone(cone, max(n_samples, 64), rng, radii)
        x = x[(x < 0).any(axis=1)]
        kept.append(x)
        total += len(x)
        if total >= n_samples:
            break
    out = np.concatenate(kept, axis=0)[:n_samples]
    logger.debug(f"sampled {len(out)} points of {cone.label} with a negative entry")
    return out


def random_orthogonal(rng: np.random.Generator, n: int, count: int = None) -> np.ndarray:
    """Haar-distributed orthogonal matrices via QR of Gaussian matrices."""
    shape = (n, n) if count is None else (count, n, n)
    q, r = np.linalg.qr(rng.standard_normal(shape))
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    return q * signs[..., None, :]
