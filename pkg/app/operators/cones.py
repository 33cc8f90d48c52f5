"""
Membership in the open cones Gamma_k, P_k and the positive orthant.
"""
import numpy as np

from app.core.errors import DomainError
from app.operators.symmetric import elementary_symmetric
from app.schemas.operator import ConeKind, ConeSpec


def _check_dims(cone: ConeSpec, lam: np.ndarray) -> None:
    if lam.shape[-1] != cone.n:
        raise DomainError(f"spectrum has {lam.shape[-1]} entries, cone {cone.label} expects {cone.n}")


def cone_inequalities(cone: ConeSpec, lam) -> np.ndarray:
    """
    Quantities that must all be strictly positive inside the cone.

    Gamma_k: sigma_1 .. sigma_k. P_k: the minimal k-term sum. Orthant: entries.

    Returns:
        np.ndarray of shape (..., m)
    """
    lam = np.asarray(lam, dtype=np.float64)
    _check_dims(cone, lam)
    if cone.kind == ConeKind.GAMMA_K:
        e = elementary_symmetric(lam, cone.k)
        return np.moveaxis(e[1:], 0, -1)
    if cone.kind == ConeKind.PK:
        return np.sort(lam, axis=-1)[..., : cone.k].sum(axis=-1, keepdims=True)
    return lam.copy()


def _inequality_names(cone: ConeSpec) -> list:
    if cone.kind == ConeKind.GAMMA_K:
        return [f"sigma_{j} > 0" for j in range(1, cone.k + 1)]
    if cone.kind == ConeKind.PK:
        return [f"sum of the {cone.k} smallest entries > 0"]
    return [f"lambda_{i + 1} > 0" for i in range(cone.n)]


def _scales(cone: ConeSpec, lam: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(lam, axis=-1)[..., None]
    if cone.kind == ConeKind.GAMMA_K:
        return norm ** np.arange(1, cone.k + 1)
    return np.broadcast_to(norm, lam.shape[:-1] + (len(_inequality_names(cone)),))


def cone_margin(cone: ConeSpec, lam) -> np.ndarray:
    """Smallest defining inequality; positive iff inside the open cone."""
    values = cone_inequalities(cone, lam)
    margin = values.min(axis=-1)
    return float(margin) if np.ndim(margin) == 0 else margin


def in_cone(cone: ConeSpec, lam, rtol: float = 0.0):
    """
    Strict membership in the open cone.

    Args:
        cone: Cone description
        lam: Spectrum (n,) or batch (..., n)
        rtol: Relative slack; inequality j must exceed rtol * |lam|^deg_j

    Returns:
        bool, or boolean array for a batch
    """
    lam = np.asarray(lam, dtype=np.float64)
    values = cone_inequalities(cone, lam)
    if rtol:
        inside = np.all(values > rtol * _scales(cone, lam), axis=-1)
    else:
        inside = np.all(values > 0.0, axis=-1)
    return bool(inside) if np.ndim(inside) == 0 else inside


def violated_inequality(cone: ConeSpec, lam) -> str:
    """Name of the first failing inequality for a single spectrum, or ''."""
    values = np.atleast_1d(cone_inequalities(cone, np.asarray(lam, dtype=np.float64)))
    names = _inequality_names(cone)
    for name, value in zip(names, values):
        if not value > 0.0:
            return f"{name} (value {value:.6g})"
    return ""
