import numpy as np

from app.operators.base import BaseOperator
from app.operators.symmetric import elementary_symmetric, sigma_removed, sigma_removed_pair
from app.schemas.operator import OperatorKind, OperatorSpec


def _sigma_derivatives(k: int, lam: np.ndarray):
    """(sigma_k, grad sigma_k, hess sigma_k) on a batch."""
    value = elementary_symmetric(lam, k)[k]
    if k == 0:
        n = lam.shape[-1]
        return value, np.zeros(lam.shape), np.zeros(lam.shape + (n,))
    return value, sigma_removed(k - 1, lam), sigma_removed_pair(k - 2, lam)


class PlainSigmaOperator(BaseOperator):
    """sigma_k itself; homogeneous of degree k, concave only for k = 1."""

    def __init__(self, spec: OperatorSpec):
        super().__init__(spec)
        self.k = spec.k
        self.degree = float(spec.k)
        self.concave = spec.k == 1

    def _evaluate(self, lam):
        return elementary_symmetric(lam, self.k)[self.k]

    def _gradient(self, lam):
        return sigma_removed(self.k - 1, lam)

    def _hessian(self, lam):
        return sigma_removed_pair(self.k - 2, lam)


class SigmaQuotientOperator(BaseOperator):
    """
    f = (sigma_k / sigma_l)^(1/(k-l)) on Gamma_k; l = 0 gives sigma_k^(1/k).

    Derivatives go through log f = p (log sigma_k - log sigma_l), p = 1/(k-l).
    sigma_l > 0 holds automatically on Gamma_k for l < k.
    """

    def __init__(self, spec: OperatorSpec):
        super().__init__(spec)
        self.k = spec.k
        self.l = spec.l
        self.p = 1.0 / (spec.k - spec.l)

    def _pieces(self, lam):
        sk, dk, hk = _sigma_derivatives(self.k, lam)
        sl, dl, hl = _sigma_derivatives(self.l, lam)
        a = dk / sk[..., None]
        b = dl / sl[..., None]
        f = (sk / sl) ** self.p
        return f, sk, hk, sl, hl, a, b

    def _evaluate(self, lam):
        sk = elementary_symmetric(lam, self.k)[self.k]
        sl = elementary_symmetric(lam, self.l)[self.l]
        return (sk / sl) ** self.p

    def _gradient(self, lam):
        f, _, _, _, _, a, b = self._pieces(lam)
        return f[..., None] * self.p * (a - b)

    def _hessian(self, lam):
        f, sk, hk, sl, hl, a, b = self._pieces(lam)
        g = self.p * (a - b)
        outer = np.einsum("...i,...j->...ij", g, g)
        hlog = self.p * (
            hk / sk[..., None, None]
            - np.einsum("...i,...j->...ij", a, a)
            - hl / sl[..., None, None]
            + np.einsum("...i,...j->...ij", b, b)
        )
        return f[..., None, None] * (outer + hlog)


class SigmaRootOperator(SigmaQuotientOperator):
    """f = sigma_k^(1/k)"""


class LinearSigmaOperator(BaseOperator):
    """f = sigma_1 on the half-space Gamma_1."""

    def _evaluate(self, lam):
        return lam.sum(axis=-1)

    def _gradient(self, lam):
        return np.ones(lam.shape)

    def _hessian(self, lam):
        return np.zeros(lam.shape + (self.n,))


SIGMA_KINDS = {
    OperatorKind.SIGMA: PlainSigmaOperator,
    OperatorKind.SIGMA_ROOT: SigmaRootOperator,
    OperatorKind.SIGMA_QUOTIENT: SigmaQuotientOperator,
    OperatorKind.LINEAR: LinearSigmaOperator,
}
