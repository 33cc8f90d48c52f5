from app.matrix.inequalities import cor28_constant, lemma27_check, prop26_ratio
from app.matrix.jacobi import jacobi_eigh
from app.matrix.metric import MetricTensor
from app.matrix.spectral import big_f, big_f_grad, big_f_second, eig_metric

__all__ = [
    "MetricTensor",
    "jacobi_eigh",
    "eig_metric",
    "big_f",
    "big_f_grad",
    "big_f_second",
    "prop26_ratio",
    "lemma27_check",
    "cor28_constant",
]
