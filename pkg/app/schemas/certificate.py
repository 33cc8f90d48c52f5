from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from app.schemas.operator import OperatorSpec


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"


class ConditionId(str, Enum):
    MONOTONE_1_4 = "Monotone_1_4"
    CONCAVE_1_5 = "Concave_1_5"
    DELTA_1_6 = "Delta_1_6"
    SUM_FI_LAMBDAI_1_11 = "SumFiLambdai_1_11"
    R10_5_1 = "R10_5_1"
    R20_5_2 = "R20_5_2"
    R20P_5_4 = "R20p_5_4"
    R30_5_5 = "R30_5_5"
    R40_1_12 = "R40_1_12"
    ADMISSIBLE = "Admissible"
    SUBSOLUTION_1_9 = "Subsolution_1_9"
    SUBSOLUTION_CONE_1_10 = "SubsolutionCone_1_10"
    CONCAVE_MATRIX_2_5 = "ConcaveMatrix_2_5"
    LEMMA_2_7 = "Lemma_2_7"
    PROP_2_6 = "Prop_2_6"
    COR_2_8 = "Cor_2_8"
    BARRIER_4_1 = "Barrier_4_1"
    GRADIENT_HYPOTHESES_5_2 = "GradientHypotheses_5_2"


def _floats(values) -> List[float]:
    return [float(x) for x in np.ravel(values)]


class Certificate(BaseModel):
    """
    Outcome of one sampled verification.

    verdict is pass iff margin > tolerance.
    """

    condition: ConditionId
    spec: Optional[OperatorSpec] = None
    n_samples: int = 0
    seed: Optional[int] = None
    margin: float
    tolerance: float = 0.0
    witnesses: List[List[float]] = Field(default_factory=list)
    verdict: Verdict
    details: Dict[str, Any] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == Verdict.PASS

    @classmethod
    def build(
        cls,
        condition: ConditionId,
        margin: float,
        tolerance: float = 0.0,
        spec: Optional[OperatorSpec] = None,
        n_samples: int = 0,
        seed: Optional[int] = None,
        witnesses=None,
        details: Optional[dict] = None,
    ) -> "Certificate":
        margin = float(margin)
        verdict = Verdict.PASS if margin > tolerance else Verdict.FAIL
        return cls(
            condition=condition,
            spec=spec,
            n_samples=int(n_samples),
            seed=seed,
            margin=margin,
            tolerance=float(tolerance),
            witnesses=[_floats(w) for w in (witnesses or [])],
            verdict=verdict,
            details=details or {},
        )


class ConeMembershipCertificate(BaseModel):
    """Sampled evidence for mu in the tangent cone C_sigma^+ at scale R."""

    spec: OperatorSpec
    mu: List[float]
    sigma: float
    epsilon: float
    theta_estimate: float
    R_used: float
    worst_sample: List[float]
    verdict: Verdict
    seed: int
    n_samples: int
    details: Dict[str, Any] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == Verdict.PASS
