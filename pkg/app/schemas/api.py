from typing import List, Optional

from pydantic import BaseModel, Field

from app.schemas.certificate import Certificate
from app.schemas.config import ProblemConfig, SolverConfig
from app.schemas.operator import OperatorSpec
from app.schemas.report import SolveReport


class VerifyOperatorRequest(BaseModel):
    spec: OperatorSpec
    conditions: List[str] = Field(default_factory=lambda: ["all"])
    samples: int = 512
    seed: int = 0
    delta0: float = 0.1
    sigma: Optional[float] = None
    radius: Optional[float] = None


class VerifyOperatorResponse(BaseModel):
    passed: bool
    certificates: List[Certificate]


class VerifyConeRequest(BaseModel):
    spec: OperatorSpec
    mu: List[float]
    sigma: Optional[float] = None
    epsilon: float = 0.05
    R: float = 10.0
    samples: int = 256
    seed: int = 0


class SolveRequest(BaseModel):
    problem: ProblemConfig
    solver: SolverConfig = Field(default_factory=SolverConfig)
    include_field: bool = False


class SolveResponse(BaseModel):
    report: SolveReport
    shape: List[int]
    u: Optional[List[float]] = None
