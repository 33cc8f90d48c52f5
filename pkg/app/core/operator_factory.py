from functools import lru_cache

import numpy as np

from app.operators.base import BaseOperator
from app.operators.pk_family import PK_KINDS
from app.operators.sigma_family import SIGMA_KINDS
from app.schemas.operator import OperatorSpec


@lru_cache(maxsize=64)
def get_operator(spec: OperatorSpec) -> BaseOperator:
    if spec.kind in SIGMA_KINDS:
        return SIGMA_KINDS[spec.kind](spec)

    elif spec.kind in PK_KINDS:
        return PK_KINDS[spec.kind](spec)

    else:
        raise ValueError(f"Unknown operator kind: {spec.kind}")


def f_eval(spec: OperatorSpec, lam):
    """f(lambda); raises AdmissibilityError outside the cone."""
    return get_operator(spec).evaluate(lam)


def f_grad(spec: OperatorSpec, lam) -> np.ndarray:
    """(f_1, ..., f_n) in closed form."""
    return get_operator(spec).gradient(lam)


def f_hess(spec: OperatorSpec, lam) -> np.ndarray:
    """lambda-space Hessian of f in closed form."""
    return get_operator(spec).hessian(lam)


def sup_boundary(spec: OperatorSpec) -> float:
    """sup of f over the cone boundary (0 for sigma families, -inf for log P_k)."""
    return get_operator(spec).sup_boundary
