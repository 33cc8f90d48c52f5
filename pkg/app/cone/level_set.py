"""
Level sets of f: ray level points, far level-set sampling and Theta_R.
"""
import logging

import numpy as np

from app.core.errors import ParameterError, RangeError, SamplingError
from app.core.operator_factory import get_operator
from app.core.sampling import make_rng, unit_directions
from app.operators.base import BaseOperator
from app.operators.cones import in_cone
from app.schemas.operator import OperatorSpec

logger = logging.getLogger(__name__)

GOLDEN_ITERATIONS = 60
BISECTION_ITERATIONS = 60
NEWTON_ITERATIONS = 200
DEFAULT_BAND = 0.25
MAX_ROUNDS = 20

_INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


def _level_tolerance(sigma: float) -> float:
    return 1e-12 * max(1.0, abs(sigma))


def _ray_newton(op: BaseOperator, sigma: float, d: np.ndarray) -> np.ndarray:
    """Bracketed Newton on s = log t for f(e^s d) = sigma, batched."""
    m = d.shape[0]

    def h(s):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return op._evaluate(np.exp(s)[:, None] * d) - sigma

    a = np.zeros(m)
    b = np.zeros(m)
    step = 1.0
    for _ in range(64):
        ha = h(a)
        low = ~(ha < 0)
        if not low.any():
            break
        a = np.where(low, a - step, a)
        step *= 2.0
    else:
        raise RangeError(f"{op.spec.label}: level {sigma} not reachable from below along the ray")
    step = 1.0
    for _ in range(64):
        hb = h(b)
        high = ~(hb > 0)
        if not high.any():
            break
        b = np.where(high, b + step, b)
        step *= 2.0
    else:
        raise RangeError(f"{op.spec.label}: level {sigma} not reachable from above along the ray")

    tol = _level_tolerance(sigma)
    s = 0.5 * (a + b)
    for _ in range(NEWTON_ITERATIONS):
        hv = h(s)
        if np.all(np.abs(hv) <= tol):
            break
        a = np.where(hv < 0, s, a)
        b = np.where(hv > 0, s, b)
        x = np.exp(s)[:, None] * d
        slope = np.einsum("ij,ij->i", op._gradient(x), x)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = s - hv / slope
        ok = np.isfinite(newton) & (newton > a) & (newton < b) & (slope > 0)
        s = np.where(np.abs(hv) <= tol, s, np.where(ok, newton, 0.5 * (a + b)))
    return np.exp(s)[:, None] * d


def level_points(op: BaseOperator, sigma: float, directions) -> np.ndarray:
    """
    Points t* d on the level set {f = sigma}, one per direction.

    Homogeneous families use t* = (sigma / f(d))^(1/degree); log P_k goes
    through bracketed Newton on log t.

    Raises:
        AdmissibilityError: If a direction is outside the cone
        RangeError: If sigma is not attained along the ray
    """
    d = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    op.check_admissible(d)
    if op.degree is not None:
        if not sigma > op.sup_boundary:
            raise RangeError(
                f"{op.spec.label}: level {sigma} <= sup over the cone boundary ({op.sup_boundary}) is unreachable"
            )
        t = (sigma / op._evaluate(d)) ** (1.0 / op.degree)
        return t[:, None] * d
    return _ray_newton(op, sigma, d)


def level_point(spec: OperatorSpec, sigma: float, direction) -> np.ndarray:
    """Single-ray version of :func:`level_points`."""
    return level_points(get_operator(spec), sigma, np.asarray(direction, dtype=np.float64)[None, :])[0]


def _anchor(op: BaseOperator, anchor) -> np.ndarray:
    if anchor is not None:
        a = np.asarray(anchor, dtype=np.float64)
        if in_cone(op.cone, a):
            return a / np.linalg.norm(a)
    return np.ones(op.n) / np.sqrt(op.n)


def _boundary_points(op: BaseOperator, anchor: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Last in-cone point on each segment from the anchor towards x (x outside)."""
    lo = np.zeros(len(x))
    hi = np.ones(len(x))
    for _ in range(BISECTION_ITERATIONS):
        mid = 0.5 * (lo + hi)
        p = (1.0 - mid)[:, None] * anchor + mid[:, None] * x
        inside = in_cone(op.cone, p)
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return (1.0 - lo)[:, None] * anchor + lo[:, None] * x


def _far_round(op, sigma, radius, count, rng, band, anchor):
    x = unit_directions(rng, count, op.n)
    u = rng.uniform(0.0, 1.0, size=count)
    x = np.where(in_cone(op.cone, x)[:, None], -x, x)
    outside = ~in_cone(op.cone, x)
    x, u = x[outside], u[outside]
    if len(x) == 0:
        return np.zeros((0, op.n))

    b = _boundary_points(op, anchor, x)
    target = radius * (1.0 + band * u)

    norm_b = np.linalg.norm(level_points(op, sigma, b), axis=1)
    reachable = norm_b > target
    b, target = b[reachable], target[reachable]
    if len(b) == 0:
        return np.zeros((0, op.n))

    lo = np.zeros(len(b))
    hi = np.ones(len(b))
    for _ in range(BISECTION_ITERATIONS):
        mid = 0.5 * (lo + hi)
        d = (1.0 - mid)[:, None] * b + mid[:, None] * anchor
        norms = np.linalg.norm(level_points(op, sigma, d), axis=1)
        far = norms > target
        lo = np.where(far, mid, lo)
        hi = np.where(far, hi, mid)
    d = (1.0 - lo)[:, None] * b + lo[:, None] * anchor
    points = level_points(op, sigma, d)
    norms = np.linalg.norm(points, axis=1)
    keep = (norms >= radius) & (norms <= (1.0 + band) * radius * (1.0 + 1e-9))
    return points[keep]


def sample_far_level_set(
    op: BaseOperator,
    sigma: float,
    radius: float,
    n_samples: int,
    rng: np.random.Generator,
    band: float = DEFAULT_BAND,
    anchor=None,
) -> np.ndarray:
    """
    Points of the level set {f = sigma} with norm in [radius, (1+band) radius].

    Directions are steered towards the cone boundary: a random boundary
    point b is found on the segment from the anchor direction, and the ray
    direction slides from b to the anchor until the level point's norm
    meets a uniformly drawn target in the band. Every sample curve lies in
    a plane through the anchor, so the same seed at a larger radius walks
    the same curves further out.

    Raises:
        SamplingError: If no sample lands in the band
    """
    a = _anchor(op, anchor)
    found = []
    total = 0
    for _ in range(MAX_ROUNDS):
        pts = _far_round(op, sigma, radius, n_samples, rng, band, a)
        found.append(pts)
        total += len(pts)
        if total >= n_samples:
            break
    points = np.concatenate(found, axis=0)[:n_samples]
    if len(points) == 0:
        raise SamplingError(
            f"{op.spec.label}: no level-set samples at radius {radius} for sigma={sigma}",
            diagnostics={"radius": radius, "sigma": sigma, "band": band, "rounds": MAX_ROUNDS},
        )
    if len(points) < n_samples:
        logger.warning(f"{op.spec.label}: only {len(points)} of {n_samples} level-set samples at radius {radius}")
    return points


def segment_max(op: BaseOperator, mu: np.ndarray, lam: np.ndarray, iterations: int = GOLDEN_ITERATIONS) -> np.ndarray:
    """
    max over t in [0, 1] of f(t mu + (1-t) lam), one value per row of lam.

    Golden-section search; t -> f(t mu + (1-t) lam) is concave.
    """
    m = lam.shape[0]

    def phi(t):
        return op._evaluate(t[:, None] * mu + (1.0 - t)[:, None] * lam)

    a = np.zeros(m)
    b = np.ones(m)
    best = np.maximum(phi(a), phi(b))
    for _ in range(iterations):
        c = b - _INV_PHI * (b - a)
        d = a + _INV_PHI * (b - a)
        fc = phi(c)
        fd = phi(d)
        best = np.maximum(best, np.maximum(fc, fd))
        left = fc > fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
    return best


def _check_mu(op: BaseOperator, sigma: float, mu: np.ndarray) -> None:
    if not in_cone(op.cone, mu):
        raise ParameterError(f"mu={mu.tolist()} is outside {op.cone.label}")
    value = op._evaluate(mu)
    if value < sigma - 1e-12 * max(1.0, abs(sigma)):
        raise ParameterError(f"mu={mu.tolist()} has f(mu)={value} < sigma={sigma}; not in the closed level set")


def theta_R_details(
    spec: OperatorSpec,
    sigma: float,
    mu,
    R: float,
    n_samples: int = 256,
    seed: int = 0,
    band: float = DEFAULT_BAND,
) -> dict:
    """
    Sampled Theta_R(mu) with the worst sample.

    Returns:
        dict with value, worst_sample, n_used
    """
    op = get_operator(spec)
    mu = np.asarray(mu, dtype=np.float64)
    _check_mu(op, sigma, mu)
    if not R > np.linalg.norm(mu):
        raise ParameterError(f"R={R} must exceed |mu|={np.linalg.norm(mu):.6g}")
    rng = make_rng(seed)
    lam = sample_far_level_set(op, sigma, R, n_samples, rng, band=band, anchor=mu)
    values = segment_max(op, mu, lam) - sigma
    worst = int(np.argmin(values))
    logger.debug(f"theta_R {spec.label} sigma={sigma} R={R}: {values[worst]:.6g} over {len(lam)} samples")
    return {"value": float(values[worst]), "worst_sample": lam[worst], "n_used": int(len(lam))}


def theta_R(
    spec: OperatorSpec,
    sigma: float,
    mu,
    R: float,
    n_samples: int = 256,
    seed: int = 0,
    band: float = DEFAULT_BAND,
) -> float:
    """
    Sampled estimate of
    Theta_R(mu) = inf over lam in dB_R and the level set of max_t f(t mu + (1-t) lam) - sigma.
    """
    return theta_R_details(spec, sigma, mu, R, n_samples, seed, band)["value"]
