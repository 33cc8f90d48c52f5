from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class SolveReport(BaseModel):
    """Outcome of a Dirichlet solve together with the estimate monitor."""

    converged: bool
    residual_inf: float
    max_hess_interior: float = 0.0
    max_hess_boundary: float = 0.0
    max_grad: float = 0.0
    c1_ratio: float = 0.0
    newton_iterations: int = 0
    continuation_steps: int = 0
    linear_iterations: int = 0
    t_reached: float = 1.0
    wall_time: float = 0.0
    error_inf: Optional[float] = None
    residual_history: List[float] = Field(default_factory=list)
    details: Dict[str, Any] = Field(default_factory=dict)


class SweepRow(BaseModel):
    s: float
    max_hess_interior: float
    max_hess_boundary: float
    max_grad: float
    residual: float
    iters: int

    @property
    def c1_ratio(self) -> float:
        return self.max_hess_interior / (1.0 + self.max_hess_boundary)
