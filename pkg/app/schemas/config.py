"""
Run and problem configuration files.

Every run reads exactly one JSON file; command-line flags override its
values. Numerical parameters are never taken from the environment.
"""
from enum import Enum
from typing import List, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from app.schemas.certificate import ConditionId
from app.schemas.operator import OperatorSpec


CONDITION_ALIASES = {
    "1.4": ConditionId.MONOTONE_1_4,
    "1.5": ConditionId.CONCAVE_1_5,
    "1.6": ConditionId.DELTA_1_6,
    "1.11": ConditionId.SUM_FI_LAMBDAI_1_11,
    "1.12": ConditionId.R40_1_12,
    "2.5": ConditionId.CONCAVE_MATRIX_2_5,
    "5.1": ConditionId.R10_5_1,
    "5.2": ConditionId.R20_5_2,
    "5.4": ConditionId.R20P_5_4,
    "5.5": ConditionId.R30_5_5,
}


class Command(str, Enum):
    VERIFY_OPERATOR = "verify-operator"
    VERIFY_CONE = "verify-cone"
    VERIFY_SUBSOLUTION = "verify-subsolution"
    SOLVE = "solve"
    SWEEP = "sweep"
    BARRIER_CHECK = "barrier-check"


class GridConfig(BaseModel):
    lower: List[float]
    upper: List[float]
    shape: List[int]
    periodic: Optional[List[bool]] = None
    # "flat" or "conformal(<polynomial w>)"
    metric: str = "flat"
    # raw per-node tensor in field-file format, overrides ``metric``
    metric_file: Optional[str] = None

    @field_validator("metric")
    @classmethod
    def _metric_form(cls, value: str) -> str:
        value = value.strip()
        if value != "flat" and not (value.startswith("conformal(") and value.endswith(")")):
            raise ValueError("metric must be 'flat' or 'conformal(<polynomial>)'")
        return value


class ProblemConfig(BaseModel):
    """
    Dirichlet problem F(nabla^2 u + chi) = psi, u = phi on the boundary.

    psi, phi and ubar are expressions in x, y (, z); chi is an n x n nested
    list of expressions or omitted for chi = 0. ``exact`` is an optional
    known solution used to report the discretization error.
    """

    operator: OperatorSpec
    grid: GridConfig
    psi: str
    phi: str
    ubar: str
    chi: Optional[List[List[Union[str, float]]]] = None
    exact: Optional[str] = None
    delta: float = 1e-6

    @model_validator(mode="after")
    def _dims(self):
        if len(self.grid.shape) != self.operator.n:
            raise ValueError(f"grid has {len(self.grid.shape)} axes but the operator has n={self.operator.n}")
        return self


class SolverConfig(BaseModel):
    tol: float = 1e-9
    max_iters: int = 50
    preconditioner: str = "diagonal"
    initial_step: float = 0.25
    min_step: float = 1e-4
    continuation: bool = True

    @field_validator("preconditioner")
    @classmethod
    def _known(cls, value: str) -> str:
        if value not in ("diagonal", "ilu", "none"):
            raise ValueError("preconditioner must be 'diagonal', 'ilu' or 'none'")
        return value


class RunConfig(BaseModel):
    """One run of the command-line tool."""

    command: Command
    spec: Optional[Union[OperatorSpec, str]] = None
    problem: Optional[Union[ProblemConfig, str]] = None
    conditions: List[str] = Field(default_factory=lambda: ["all"])
    seed: int = 0
    samples: int = 512
    out: Optional[str] = None
    field: Optional[str] = None
    csv: Optional[str] = None
    pdf: Optional[str] = None

    # verify-cone / R40 / growth
    sigma: Optional[float] = None
    mu: Optional[List[float]] = None
    epsilon: float = 0.05
    radius: Optional[float] = None
    radii: Optional[List[float]] = None
    delta0: float = 0.1

    # verify-subsolution
    mode: str = "Inequality_1_9"
    stride: int = 1

    # solve / sweep / barrier-check
    solver: SolverConfig = Field(default_factory=SolverConfig)
    param: str = "psi_amp"
    range: str = "0:1:11"
    base: float = 1.0
    barrier_t: float = 0.2
    barrier_N: float = 1.0
    barrier_delta: float = 0.2

    def condition_ids(self) -> Optional[List[ConditionId]]:
        """None means every operator-level condition."""
        if not self.conditions or any(c.lower() == "all" for c in self.conditions):
            return None
        return [CONDITION_ALIASES.get(c) or ConditionId(c) for c in self.conditions]
