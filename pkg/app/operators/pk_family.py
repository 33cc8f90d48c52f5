import numpy as np

from app.operators.base import BaseOperator
from app.operators.symmetric import subset_incidence
from app.schemas.operator import OperatorKind, OperatorSpec


class LogPkOperator(BaseOperator):
    """
    f = log P_k, P_k = product over k-subsets of the subset sums, on P_k.

    f_i = sum over subsets S containing i of 1/s_S,
    f_ij = -sum over subsets S containing i and j of 1/s_S^2.
    sum_i f_i lam_i = C(n, k) identically.
    """

    degree = None
    sup_boundary = float("-inf")

    def __init__(self, spec: OperatorSpec):
        super().__init__(spec)
        self.k = spec.k
        self.incidence = subset_incidence(spec.n, spec.k)

    def subset_sums(self, lam: np.ndarray) -> np.ndarray:
        return lam @ self.incidence.T

    def _evaluate(self, lam):
        return np.log(self.subset_sums(lam)).sum(axis=-1)

    def _gradient(self, lam):
        return (1.0 / self.subset_sums(lam)) @ self.incidence

    def _hessian(self, lam):
        w = self.subset_sums(lam) ** -2
        return -np.einsum("...m,mi,mj->...ij", w, self.incidence, self.incidence)


class PkOperator(LogPkOperator):
    """P_k itself; evaluation only, not verified concave."""

    concave = False
    sup_boundary = 0.0

    def __init__(self, spec: OperatorSpec):
        super().__init__(spec)
        self.degree = float(spec.n_subsets)

    def _evaluate(self, lam):
        return np.prod(self.subset_sums(lam), axis=-1)

    def _gradient(self, lam):
        value = self._evaluate(lam)
        return value[..., None] * super()._gradient(lam)

    def _hessian(self, lam):
        value = self._evaluate(lam)
        glog = super()._gradient(lam)
        hlog = super()._hessian(lam)
        return value[..., None, None] * (np.einsum("...i,...j->...ij", glog, glog) + hlog)


PK_KINDS = {
    OperatorKind.LOG_PK: LogPkOperator,
    OperatorKind.PK: PkOperator,
}
