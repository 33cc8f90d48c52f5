"""
Matrix inequalities used for the second-derivative estimates.

Spectra here are in the descending order produced by eig_metric, so the
index r refers to the sorted eigenvalues.
"""
import logging
from typing import Callable, Optional, Tuple

import numpy as np

from app.core.errors import ParameterError
from app.core.operator_factory import get_operator
from app.matrix.metric import as_metric
from app.matrix.spectral import _symmetric, big_f_grad, eig_metric
from app.schemas.operator import OperatorSpec

logger = logging.getLogger(__name__)


def prop26_ratio(A, g, spec: OperatorSpec, distinguished: Optional[int] = None) -> Tuple[float, int]:
    """
    Empirical constant c for sum_{l != d} F^{ij} A_il A_lj >= c sum_{i != r} f_i lam_i^2.

    The sum over l skips the distinguished ambient coordinate d (the last one
    by default, the normal direction of a boundary-adapted frame). r is the
    eigen-index with the largest f_r lam_r^2, which makes the right side
    smallest.

    With a metric g both sides are taken in a g-orthonormal frame, i.e. on
    gamma A gamma.

    Returns:
        (ratio, r); ratio is +inf when the right side vanishes
    """
    A = _symmetric(A)
    n = A.shape[-1]
    d = n - 1 if distinguished is None else distinguished
    A = as_metric(g, n).conjugate(A)
    lam, _ = eig_metric(A)
    f = get_operator(spec).gradient(lam)
    fprime = big_f_grad(A, None, spec)
    afa = A @ fprime @ A
    keep = np.arange(n) != d
    lhs = float(np.diagonal(afa)[keep].sum())
    weights = f * lam**2
    r = int(np.argmax(weights))
    rhs = float(weights.sum() - weights[r])
    if rhs <= 0.0:
        return float("inf"), r
    return lhs / rhs, r


def lemma27_holds(lam, spec: OperatorSpec, rtol: float = 1e-12) -> np.ndarray:
    """
    Per sample: sum_{i != r} f_i lam_i^2 >= (1/n) sum f_i lam_i^2 for every r with lam_r < 0.

    Vacuously true for samples without negative entries.
    """
    lam = np.atleast_2d(np.asarray(lam, dtype=np.float64))
    n = lam.shape[-1]
    w = get_operator(spec).gradient(lam) * lam**2
    total = w.sum(axis=-1, keepdims=True)
    slack = (total - w) - total / n
    ok = (slack >= -rtol * np.maximum(total, 1e-300)) | (lam >= 0)
    return ok.all(axis=-1)


def lemma27_check(lam, spec: OperatorSpec) -> bool:
    return bool(lemma27_holds(lam, spec)[0])


def cor28_values(
    spec: OperatorSpec,
    epsilon: float,
    samples,
    r_selector: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> np.ndarray:
    """Per-sample (sum f_i|lam_i| - eps sum_{i != r} f_i lam_i^2) / (1 + sum f_i / eps), worst r."""
    lam = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    f = get_operator(spec).gradient(lam)
    w = f * lam**2
    if r_selector is None:
        excluded = w.max(axis=-1)
    else:
        r = np.asarray(r_selector(lam), dtype=int)
        excluded = np.take_along_axis(w, r[:, None], axis=-1)[:, 0]
    numerator = (f * np.abs(lam)).sum(axis=-1) - epsilon * (w.sum(axis=-1) - excluded)
    return numerator / (1.0 + f.sum(axis=-1) / epsilon)


def cor28_constant(
    spec: OperatorSpec,
    epsilon: float,
    samples,
    r_selector: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> float:
    """
    Empirical C* of sum f_i|lam_i| <= eps sum_{i != r} f_i lam_i^2 + C (1 + (1/eps) sum f_i).

    The maximum runs over samples and, unless r_selector picks one index per
    sample, over every r.
    """
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    return float(cor28_values(spec, epsilon, samples, r_selector).max())
