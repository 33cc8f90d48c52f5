"""
Preconditioned restarted GMRES for the Newton systems.
"""
import logging
from typing import NamedTuple

import numpy as np
import scipy.sparse as sparse
from scipy.sparse.linalg import LinearOperator, gmres, spilu

from app.core.errors import LinearSolverError, ParameterError

logger = logging.getLogger(__name__)

DEFAULT_RESTART = 60
DEFAULT_MAXITER = 40
ILU_DROP_TOL = 1e-5
ILU_FILL_FACTOR = 20.0


class KrylovResult(NamedTuple):
    x: np.ndarray
    iterations: int
    preconditioner: str


def diagonal_preconditioner(J: sparse.spmatrix) -> LinearOperator:
    d = J.diagonal()
    d = np.where(np.abs(d) > 0, d, 1.0)
    inv = 1.0 / d
    return LinearOperator(J.shape, matvec=lambda x: inv * x, dtype=np.float64)


def ilu_preconditioner(J: sparse.spmatrix) -> LinearOperator:
    """
    Raises:
        LinearSolverError: If the incomplete factorization breaks down
    """
    try:
        ilu = spilu(J.tocsc(), drop_tol=ILU_DROP_TOL, fill_factor=ILU_FILL_FACTOR)
    except RuntimeError as e:
        raise LinearSolverError(f"ILU factorization failed: {e}") from e
    return LinearOperator(J.shape, matvec=ilu.solve, dtype=np.float64)


def make_preconditioner(J: sparse.spmatrix, kind: str):
    if kind == "diagonal":
        return diagonal_preconditioner(J)
    if kind == "ilu":
        return ilu_preconditioner(J)
    if kind == "none":
        return None
    raise ParameterError(f"unknown preconditioner '{kind}'")


def _gmres(J, b, M, rtol, restart, maxiter):
    iterations = 0

    def count(_):
        nonlocal iterations
        iterations += 1

    x, info = gmres(J, b, rtol=rtol, atol=0.0, restart=restart, maxiter=maxiter, M=M,
                    callback=count, callback_type="pr_norm")
    return x, info, iterations


def krylov_solve(
    J: sparse.spmatrix,
    b: np.ndarray,
    preconditioner: str = "diagonal",
    rtol: float = 1e-10,
    restart: int = DEFAULT_RESTART,
    maxiter: int = DEFAULT_MAXITER,
) -> KrylovResult:
    """
    Solve J x = b with restarted GMRES.

    When the requested preconditioner does not reach rtol the solve is
    repeated once with a threshold incomplete LU.

    Raises:
        LinearSolverError: On breakdown, a non-finite solution, or when every attempt stalls
    """
    b = np.asarray(b, dtype=np.float64)
    if not np.any(b):
        return KrylovResult(np.zeros_like(b), 0, preconditioner)

    x, info, iterations = _gmres(J, b, make_preconditioner(J, preconditioner), rtol, restart, maxiter)
    used = preconditioner
    if info > 0 and preconditioner != "ilu":
        logger.warning(f"GMRES with {preconditioner} preconditioner stalled after {iterations} iterations, retrying with ILU")
        x, info, more = _gmres(J, b, ilu_preconditioner(J), rtol, restart, maxiter)
        iterations += more
        used = "ilu"
    if info < 0:
        raise LinearSolverError(f"GMRES breakdown (info={info})")
    if not np.all(np.isfinite(x)):
        raise LinearSolverError("GMRES returned non-finite values")
    if info > 0:
        relative = np.linalg.norm(J @ x - b) / np.linalg.norm(b)
        if relative > 1e-3:
            raise LinearSolverError(f"GMRES did not converge: relative residual {relative:.3e} after {iterations} iterations")
        logger.warning(f"GMRES stopped at relative residual {relative:.3e}, continuing with the inexact step")
    logger.debug(f"GMRES {used}: {iterations} iterations")
    return KrylovResult(x, iterations, used)
