import logging

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, Response

from app.cone.tangent_cone import tangent_cone_plus_test
from app.config.settings import settings
from app.core.errors import ConfigError, NonconvergenceError, ToolkitError
from app.core.serialization import canonical_json
from app.schemas.api import (
    SolveRequest,
    SolveResponse,
    VerifyConeRequest,
    VerifyOperatorRequest,
    VerifyOperatorResponse,
)
from app.schemas.certificate import ConeMembershipCertificate
from app.schemas.config import Command, RunConfig
from app.solver.pipeline import solve
from app.solver.problem import DirichletProblem
from app.verify.conditions import default_sigma, verify_operator

logger = logging.getLogger(__name__)

app = FastAPI(title="Hessian Toolkit - verification and Dirichlet solver service")


@app.exception_handler(ToolkitError)
def toolkit_error_handler(request: Request, exc: ToolkitError):
    if isinstance(exc, ConfigError):
        status = 422
    elif isinstance(exc, NonconvergenceError):
        status = 409
    else:
        status = 400
    logger.error(f"{request.url.path}: {type(exc).__name__}: {exc}")
    return JSONResponse(status_code=status, content={"error": type(exc).__name__, "detail": str(exc)})



def _canonical(payload) -> Response:
    # canonical_json keeps infinite margins of vacuous certificates
    return Response(content=canonical_json(payload), media_type="application/json")


@app.get("/")
def root():
    return {"status": "Server running", "artifact_dir": settings.ARTIFACT_DIR}


@app.post("/verify/operator", response_model=VerifyOperatorResponse)
def verify_operator_endpoint(request: VerifyOperatorRequest):
    try:
        conditions = RunConfig(command=Command.VERIFY_OPERATOR, conditions=request.conditions).condition_ids()
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e))
    certificates = verify_operator(
        request.spec, conditions, request.samples, request.seed, request.delta0, request.sigma, request.radius
    )
    response = VerifyOperatorResponse(passed=all(c.passed for c in certificates), certificates=certificates)
    return _canonical(response.model_dump(mode="python"))


@app.post("/verify/cone", response_model=ConeMembershipCertificate)
def verify_cone_endpoint(request: VerifyConeRequest):
    sigma = default_sigma(request.spec) if request.sigma is None else request.sigma
    cert = tangent_cone_plus_test(request.spec, sigma, request.mu, request.epsilon, request.R, request.samples, request.seed)
    return _canonical(cert.model_dump(mode="python"))


@app.post("/solve", response_model=SolveResponse)
def solve_endpoint(request: SolveRequest):
    problem = DirichletProblem.from_config(request.problem)
    u, report = solve(problem, request.solver)
    return SolveResponse(
        report=report,
        shape=list(problem.grid.shape),
        u=u.ravel().tolist() if request.include_field else None,
    )
