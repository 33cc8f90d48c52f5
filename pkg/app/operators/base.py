from abc import ABC, abstractmethod
from typing import Optional

import numpy as np

from app.core.errors import AdmissibilityError, DomainError
from app.operators.cones import in_cone, violated_inequality
from app.schemas.operator import ConeSpec, OperatorSpec


class BaseOperator(ABC):
    """
    f(lambda) on its natural cone, with closed-form derivatives.

    Subclasses implement the unchecked ``_evaluate``, ``_gradient`` and
    ``_hessian`` on batches of shape (..., n); the public methods add the
    admissibility gate.
    """

    # True when the family is a proven concave representative.
    concave: bool = True
    # Homogeneity degree, None when f is not homogeneous.
    degree: Optional[float] = 1.0
    # sup of f over the cone boundary.
    sup_boundary: float = 0.0

    def __init__(self, spec: OperatorSpec):
        self.spec = spec
        self.n = spec.n
        self.cone: ConeSpec = spec.cone

    def check_admissible(self, lam: np.ndarray, rtol: float = 0.0) -> None:
        """
        Raises:
            AdmissibilityError: For the first sample outside the open cone
        """
        if lam.shape[-1] != self.n:
            raise DomainError(f"{self.spec.label} expects {self.n} eigenvalues, got {lam.shape[-1]}")
        inside = np.asarray(in_cone(self.cone, lam, rtol))
        if not inside.all():
            bad = np.argwhere(~inside)[0] if inside.ndim else ()
            offending = lam[tuple(bad)] if inside.ndim else lam
            raise AdmissibilityError(
                f"{self.spec.label}: spectrum {np.round(offending, 12).tolist()} outside {self.cone.label}; "
                f"violated {violated_inequality(self.cone, offending)}",
                spectrum=offending,
                violated=violated_inequality(self.cone, offending),
            )

    def _prepare(self, lam, check: bool) -> np.ndarray:
        lam = np.asarray(lam, dtype=np.float64)
        if check:
            self.check_admissible(lam)
        return lam

    @staticmethod
    def _scalar(value):
        return float(value) if np.ndim(value) == 0 else value

    def evaluate(self, lam, check: bool = True):
        return self._scalar(self._evaluate(self._prepare(lam, check)))

    def gradient(self, lam, check: bool = True) -> np.ndarray:
        return self._gradient(self._prepare(lam, check))

    def hessian(self, lam, check: bool = True) -> np.ndarray:
        return self._hessian(self._prepare(lam, check))

    def euler_sum(self, lam, check: bool = True):
        """sum_i f_i(lam) lam_i"""
        lam = self._prepare(lam, check)
        return self._scalar(np.einsum("...i,...i->...", self._gradient(lam), lam))

    @abstractmethod
    def _evaluate(self, lam: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def _gradient(self, lam: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def _hessian(self, lam: np.ndarray) -> np.ndarray:
        pass
