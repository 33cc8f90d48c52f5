"""
Dirichlet problem F(nabla^2 u + chi) = psi in the box, u = phi on its boundary.
"""
import logging
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import ValidationError

from app.core.errors import ConfigError, ParameterError, ProblemInfeasibleError
from app.geometry.field_io import read_field
from app.geometry.fields import ScalarField, SymMatrixField
from app.geometry.grid import MetricGrid
from app.schemas.certificate import Certificate
from app.schemas.config import GridConfig, ProblemConfig
from app.schemas.operator import OperatorSpec
from app.verify.conditions import verify_delta
from app.verify.fields import SubsolutionMode, verify_subsolution

logger = logging.getLogger(__name__)


class DirichletProblem:
    """
    Discrete problem data on one grid.

    Attributes:
        spec: Operator
        grid: MetricGrid (must have a boundary on every axis)
        chi: SymMatrixField
        psi: ScalarField, right-hand side
        phi: ScalarField whose boundary values are the Dirichlet data
        ubar: ScalarField, subsolution and starting point of the homotopy
        exact: Optional exact solution values for error reports
    """

    def __init__(
        self,
        spec: OperatorSpec,
        grid: MetricGrid,
        psi: ScalarField,
        phi: ScalarField,
        ubar: ScalarField,
        chi: Optional[SymMatrixField] = None,
        exact: Optional[np.ndarray] = None,
        delta: float = 1e-6,
    ):
        if any(grid.periodic):
            raise ParameterError("the Dirichlet solver needs a boundary on every axis; periodic grids are field-only")
        if grid.n != spec.n:
            raise ParameterError(f"grid dimension {grid.n} does not match operator n={spec.n}")
        for name, field in (("psi", psi), ("phi", phi), ("ubar", ubar)):
            if field.grid is not grid:
                raise ParameterError(f"{name} lives on a different grid")
        self.spec = spec
        self.grid = grid
        self.psi = psi
        self.phi = phi
        self.ubar = ubar
        self.chi = chi if chi is not None else SymMatrixField.zeros(grid)
        self.exact = exact
        self.delta = delta

    @property
    def boundary(self) -> np.ndarray:
        return self.grid.boundary_mask

    @property
    def interior(self) -> np.ndarray:
        return self.grid.interior_mask

    def check_delta(self) -> Certificate:
        """
        psi > sup over the cone boundary of f + delta at every node.

        Raises:
            ProblemInfeasibleError: With the failing certificate
        """
        cert = verify_delta(self.psi.values, self.spec)
        if not cert.margin > self.delta:
            raise ProblemInfeasibleError(
                f"inf psi - sup f = {cert.margin:.6g} does not exceed delta={self.delta}", certificate=cert
            )
        return cert

    def check_subsolution(self) -> Certificate:
        """
        Raises:
            ProblemInfeasibleError: If F(nabla^2 ubar + chi) >= psi fails somewhere
        """
        cert = verify_subsolution(
            self.ubar, self.chi, self.psi, self.grid, self.spec, SubsolutionMode.INEQUALITY
        )
        if not cert.passed:
            raise ProblemInfeasibleError(
                f"ubar is not a subsolution: margin {cert.margin:.6g} at node {cert.details['worst_node']}",
                certificate=cert,
            )
        return cert

    def check(self) -> None:
        self.check_delta()
        self.check_subsolution()

    def with_psi(self, psi_values: np.ndarray) -> "DirichletProblem":
        return DirichletProblem(
            self.spec, self.grid, ScalarField(self.grid, psi_values), self.phi, self.ubar, self.chi, None, self.delta
        )

    @classmethod
    def from_config(cls, config: ProblemConfig, base_dir: Optional[Path] = None) -> "DirichletProblem":
        grid = build_grid(config.grid, base_dir)
        chi = SymMatrixField.from_expressions(grid, config.chi) if config.chi is not None else None
        exact = ScalarField.from_expression(grid, config.exact).values if config.exact else None
        return cls(
            config.operator,
            grid,
            psi=ScalarField.from_expression(grid, config.psi),
            phi=ScalarField.from_expression(grid, config.phi),
            ubar=ScalarField.from_expression(grid, config.ubar),
            chi=chi,
            exact=exact,
            delta=config.delta,
        )

    def __repr__(self):
        return f"DirichletProblem({self.spec.label}, {self.grid})"


def build_grid(config: GridConfig, base_dir: Optional[Path] = None) -> MetricGrid:
    if config.metric_file:
        path = Path(config.metric_file)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        _, g = read_field(path)
        return MetricGrid(config.lower, config.upper, config.shape, config.periodic, g_field=g, metric_label="tensor")
    if config.metric.startswith("conformal("):
        return MetricGrid.conformal(config.lower, config.upper, config.shape, config.metric[10:-1], config.periodic)
    return MetricGrid(config.lower, config.upper, config.shape, config.periodic)


def load_json(path, model):
    """
    Parse a JSON file into a pydantic model.

    Raises:
        ConfigError: If the file is missing, empty or invalid, with its location
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError("file not found", location=str(path))
    text = path.read_text()
    if not text.strip():
        raise ConfigError("file is empty", location=str(path))
    try:
        return model.model_validate_json(text)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first.get("loc", ()))
        raise ConfigError(f"{first.get('msg')} at '{where or '<root>'}'", location=str(path)) from e


def load_problem(path) -> DirichletProblem:
    config = load_json(path, ProblemConfig)
    logger.info(f"loaded problem {config.operator.label} on grid {config.grid.shape} from {path}")
    return DirichletProblem.from_config(config, Path(path).parent)
