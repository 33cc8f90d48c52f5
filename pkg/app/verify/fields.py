"""
Verifiers for grid fields: admissibility and subsolution strength.
"""
import logging
from enum import Enum
from typing import Optional

import numpy as np

from app.cone.tangent_cone import tangent_cone_plus_test
from app.core.errors import AdmissibilityError
from app.core.operator_factory import get_operator
from app.geometry.fields import ScalarField, SymMatrixField
from app.geometry.grid import MetricGrid
from app.geometry.hessian import covariant_hessian
from app.matrix.spectral import eig_metric
from app.operators.cones import cone_margin, violated_inequality
from app.schemas.certificate import Certificate, ConditionId
from app.schemas.operator import ConeSpec, OperatorSpec

logger = logging.getLogger(__name__)

SUBSOLUTION_RTOL = 1e-9


class SubsolutionMode(str, Enum):
    INEQUALITY = "Inequality_1_9"
    CONE = "Cone_1_10"


def _matrix_values(U, grid: MetricGrid) -> np.ndarray:
    if isinstance(U, SymMatrixField):
        return U.values
    return SymMatrixField(grid, U).values


def field_spectra(U, grid: MetricGrid) -> np.ndarray:
    """Eigenvalues of U with respect to the grid metric at every node, (*shape, n)."""
    lam, _ = eig_metric(_matrix_values(U, grid), grid.metric)
    return lam


def verify_admissible_field(U, grid: MetricGrid, cone: ConeSpec) -> Certificate:
    """
    Smallest cone inequality of lambda[U] over all nodes; pass iff positive.

    The worst node index and its spectrum go into the details.
    """
    lam = field_spectra(U, grid)
    margins = cone_margin(cone, lam)
    worst = np.unravel_index(int(np.argmin(margins)), grid.shape)
    margin = float(margins[worst])
    details = {"cone": cone.label, "worst_node": [int(i) for i in worst]}
    if not margin > 0:
        details["violated"] = violated_inequality(cone, lam[worst])
    cert = Certificate.build(
        ConditionId.ADMISSIBLE,
        margin,
        n_samples=grid.size,
        witnesses=[lam[worst]],
        details=details,
    )
    logger.info(f"admissibility on {grid}: {cert.verdict.value} (margin {margin:.6g} at node {details['worst_node']})")
    return cert


def subsolution_matrix(ubar, chi, grid: MetricGrid) -> np.ndarray:
    """nabla^2 ubar + chi at every node."""
    U = covariant_hessian(ubar, grid)
    if chi is not None:
        U = U + _matrix_values(chi, grid)
    return U


def _require_admissible(spec: OperatorSpec, lam: np.ndarray, grid: MetricGrid) -> None:
    margins = cone_margin(spec.cone, lam)
    if np.all(margins > 0):
        return
    node = np.unravel_index(int(np.argmin(margins)), grid.shape)
    raise AdmissibilityError(
        f"subsolution is not admissible at node {list(map(int, node))}: spectrum {lam[node].tolist()}",
        spectrum=lam[node],
        violated=violated_inequality(spec.cone, lam[node]),
        node=[int(i) for i in node],
    )


def verify_subsolution(
    ubar,
    chi: Optional[SymMatrixField],
    psi,
    grid: MetricGrid,
    spec: OperatorSpec,
    mode: SubsolutionMode = SubsolutionMode.INEQUALITY,
    epsilon: float = 0.05,
    R: float = 10.0,
    n_samples: int = 64,
    seed: int = 0,
    stride: int = 1,
) -> Certificate:
    """
    Subsolution checks for ubar.

    Inequality mode: margin = min over nodes of F(nabla^2 ubar + chi) - psi,
    passing within -1e-9 max(1, |psi|). Cone mode: at every ``stride``-th
    node the tangent cone test runs with sigma = psi(x) and mu = lambda(x);
    the margin is the smallest theta estimate.

    Raises:
        AdmissibilityError: If ubar is not admissible, naming the node
    """
    psi_values = psi.values if isinstance(psi, ScalarField) else ScalarField(grid, psi).values
    lam = field_spectra(subsolution_matrix(ubar, chi, grid), grid)
    _require_admissible(spec, lam, grid)
    op = get_operator(spec)

    if SubsolutionMode(mode) == SubsolutionMode.INEQUALITY:
        slack = op.evaluate(lam, check=False) - psi_values
        worst = np.unravel_index(int(np.argmin(slack)), grid.shape)
        tolerance = -SUBSOLUTION_RTOL * max(1.0, float(np.abs(psi_values).max()))
        cert = Certificate.build(
            ConditionId.SUBSOLUTION_1_9,
            slack[worst],
            tolerance=tolerance,
            spec=spec,
            n_samples=grid.size,
            witnesses=[lam[worst]],
            details={"worst_node": [int(i) for i in worst], "psi_at_worst": float(psi_values[worst])},
        )
    else:
        flat_lam = lam.reshape(-1, grid.n)
        flat_psi = psi_values.ravel()
        worst_theta, worst_node, worst_sample = np.inf, None, None
        for node in range(0, len(flat_lam), max(1, stride)):
            result = tangent_cone_plus_test(spec, float(flat_psi[node]), flat_lam[node], epsilon, R, n_samples, seed)
            if result.theta_estimate < worst_theta:
                worst_theta = result.theta_estimate
                worst_node = node
                worst_sample = result.worst_sample
        index = [int(i) for i in np.unravel_index(worst_node, grid.shape)]
        cert = Certificate.build(
            ConditionId.SUBSOLUTION_CONE_1_10,
            worst_theta,
            spec=spec,
            n_samples=n_samples,
            seed=seed,
            witnesses=[flat_lam[worst_node], worst_sample],
            details={"worst_node": index, "epsilon": epsilon, "R": R, "stride": stride},
        )
    logger.info(f"{cert.condition.value} {spec.label}: {cert.verdict.value} (margin {cert.margin:.6g})")
    return cert
