"""
Command-line surface.

    python -m app.cli verify-operator --spec configs/sigma_root_2_3.json --conditions 1.4,1.5,1.11
    python -m app.cli solve --problem configs/monge_ampere.json --out out/report.json --field out/u.bin

Exit codes: 0 everything passed / converged, 1 a certificate failed,
2 configuration or input error, 3 the solver did not converge.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from pydantic import ValidationError

from app.cone.tangent_cone import tangent_cone_plus_test
from app.config.settings import settings
from app.core.errors import ConfigError, NonconvergenceError, ToolkitError
from app.core.serialization import canonical_json
from app.geometry.field_io import export_csv, read_field, write_field
from app.geometry.fields import ScalarField
from app.report.report_generator import ReportGenerator
from app.schemas.config import Command, ProblemConfig, RunConfig
from app.schemas.operator import OperatorSpec
from app.solver.barrier import barrier_check, find_barrier_parameters
from app.solver.pipeline import empirical_c1, parse_range, solve, sweep, write_sweep_csv
from app.solver.problem import DirichletProblem, load_json
from app.verify.conditions import default_sigma, verify_operator
from app.verify.fields import SubsolutionMode, subsolution_matrix, verify_admissible_field, verify_subsolution

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hessian-toolkit",
        description="Structure checks and Dirichlet solves for f(lambda[nabla^2 u + chi]) = psi.",
    )
    parser.add_argument("command", nargs="?", choices=[c.value for c in Command],
                        help="what to run (may also come from --config)")
    parser.add_argument("--config", help="run configuration JSON; flags override its values")
    parser.add_argument("--spec", help="operator spec JSON file or inline JSON object")
    parser.add_argument("--problem", help="Dirichlet problem JSON file")
    parser.add_argument("--conditions", help="comma-separated condition ids or aliases (1.4,1.5,...) or 'all'")
    parser.add_argument("--out", help="JSON output path for certificates / reports")
    parser.add_argument("--field", help="field file: written by solve, read as u or ubar elsewhere")
    parser.add_argument("--csv", help="CSV output (sweep table or node values)")
    parser.add_argument("--pdf", help="PDF summary report path")
    parser.add_argument("--seed", type=int, help="random seed (default 0)")
    parser.add_argument("--samples", type=int, help="samples per certificate (default 512)")
    parser.add_argument("--sigma", type=float, help="level value sigma")
    parser.add_argument("--mu", help="comma-separated point mu for verify-cone")
    parser.add_argument("--epsilon", type=float, help="tangent cone epsilon (default 0.05)")
    parser.add_argument("--radius", type=float, help="sampling radius R")
    parser.add_argument("--radii", help="comma-separated radii for a Theta_R scan")
    parser.add_argument("--delta0", type=float, help="R40 constant delta0 (default 0.1)")
    parser.add_argument("--mode", choices=[m.value for m in SubsolutionMode], help="subsolution mode")
    parser.add_argument("--stride", type=int, help="node stride for the cone-mode subsolution check")
    parser.add_argument("--tol", type=float, help="Newton tolerance on |r|_inf (default 1e-9)")
    parser.add_argument("--max-iters", type=int, help="Newton iteration cap (default 50)")
    parser.add_argument("--preconditioner", choices=["diagonal", "ilu", "none"], help="Krylov preconditioner")
    parser.add_argument("--no-continuation", action="store_true", help="solve by Newton directly from ubar")
    parser.add_argument("--param", help="sweep parameter (psi_amp)")
    parser.add_argument("--range", help="sweep values start:stop:count (default 0:1:11)")
    parser.add_argument("--base", type=float, help="sweep base level for psi_s = (1-s) base + s psi")
    parser.add_argument("--t", type=float, help="barrier parameter t")
    parser.add_argument("--N", type=float, help="barrier parameter N")
    parser.add_argument("--delta", type=float, help="barrier collar width delta <= 2t/N")
    parser.add_argument("--search", action="store_true", help="barrier-check: scan (t, N) instead")
    return parser


def _csv_list(text: Optional[str], cast=float):
    if text is None:
        return None
    return [cast(x) for x in text.split(",") if x.strip()]


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """
    Merge the config file with command-line flags.

    Raises:
        ConfigError: If the file is missing, empty or invalid
    """
    data = {}
    location = "command line"
    if args.config:
        location = args.config
        path = Path(args.config)
        if not path.exists():
            raise ConfigError("file not found", location=location)
        text = path.read_text()
        if not text.strip():
            raise ConfigError("file is empty", location=location)
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON: {e.msg}", location=f"{location}:{e.lineno}:{e.colno}") from e
        if not isinstance(data, dict):
            raise ConfigError("run configuration must be a JSON object", location=location)

    overrides = {
        "command": args.command,
        "spec": args.spec,
        "problem": args.problem,
        "conditions": _csv_list(args.conditions, str),
        "out": args.out,
        "field": args.field,
        "csv": args.csv,
        "pdf": args.pdf,
        "seed": args.seed,
        "samples": args.samples,
        "sigma": args.sigma,
        "mu": _csv_list(args.mu),
        "epsilon": args.epsilon,
        "radius": args.radius,
        "radii": _csv_list(args.radii),
        "delta0": args.delta0,
        "mode": args.mode,
        "stride": args.stride,
        "param": args.param,
        "range": args.range,
        "base": args.base,
        "barrier_t": args.t,
        "barrier_N": args.N,
        "barrier_delta": args.delta,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    solver = dict(data.get("solver") or {})
    for key, value in (("tol", args.tol), ("max_iters", args.max_iters), ("preconditioner", args.preconditioner)):
        if value is not None:
            solver[key] = value
    if args.no_continuation:
        solver["continuation"] = False
    data["solver"] = solver
    if "command" not in data:
        raise ConfigError("no command given", location=location)
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first.get("loc", ()))
        raise ConfigError(f"{first.get('msg')} at '{where}'", location=location) from e
    try:
        config.condition_ids()
    except ValueError as e:
        raise ConfigError(f"unknown condition in {config.conditions}: {e}", location=location) from e
    return config


def resolve_spec(config: RunConfig) -> OperatorSpec:
    spec = config.spec
    if spec is None:
        raise ConfigError("this command needs an operator spec (--spec)")
    if isinstance(spec, OperatorSpec):
        return spec
    if spec.lstrip().startswith("{"):
        try:
            return OperatorSpec.model_validate_json(spec)
        except ValidationError as e:
            raise ConfigError(f"invalid inline spec: {e.errors()[0].get('msg')}", location="--spec") from e
    return load_json(spec, OperatorSpec)


def resolve_problem(config: RunConfig) -> DirichletProblem:
    problem = config.problem
    if problem is None:
        raise ConfigError("this command needs a problem file (--problem)")
    if isinstance(problem, str):
        path = Path(problem)
        return DirichletProblem.from_config(load_json(path, ProblemConfig), path.parent)
    return DirichletProblem.from_config(problem)


def _field_values(path: str, problem: DirichletProblem) -> np.ndarray:
    header, values = read_field(path)
    if tuple(header["shape"]) != problem.grid.shape:
        raise ConfigError(f"field shape {header['shape']} does not match grid {list(problem.grid.shape)}", location=path)
    return values


def _write_json(path: Optional[str], payload) -> None:
    if path is None:
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json(payload))
    logger.info(f"wrote {path}")


def _print_certificates(certificates) -> None:
    print(f"{'condition':<24} {'operator':<28} {'margin':>14}  verdict")
    for cert in certificates:
        label = cert.spec.label if cert.spec else "-"
        print(f"{cert.condition.value:<24} {label:<28} {cert.margin:>14.6g}  {cert.verdict.value}")
    for cert in certificates:
        if not cert.passed:
            witness = cert.witnesses[0] if cert.witnesses else None
            extra = {k: v for k, v in cert.details.items() if isinstance(v, (int, float, str))}
            print(f"FAIL {cert.condition.value}: worst witness {witness} {extra if extra else ''}".rstrip())


def run_verify_operator(config: RunConfig) -> int:
    spec = resolve_spec(config)
    certificates = verify_operator(
        spec, config.condition_ids(), config.samples, config.seed, config.delta0, config.sigma, config.radius
    )
    _write_json(config.out, [c.model_dump(mode="python") for c in certificates])
    _print_certificates(certificates)
    if config.pdf:
        ReportGenerator(f"Operator checks: {spec.label}").write(config.pdf, certificates=certificates)
    return EXIT_OK if all(c.passed for c in certificates) else EXIT_FAIL


def run_verify_cone(config: RunConfig) -> int:
    spec = resolve_spec(config)
    if config.mu is None:
        raise ConfigError("verify-cone needs --mu")
    sigma = default_sigma(spec) if config.sigma is None else config.sigma
    radii = config.radii or [config.radius or 10.0]
    results = [
        tangent_cone_plus_test(spec, sigma, config.mu, config.epsilon, R, config.samples, config.seed)
        for R in radii
    ]
    _write_json(config.out, [r.model_dump(mode="python") for r in results])
    print(f"{'R':>10} {'theta':>14}  verdict")
    for r in results:
        print(f"{r.R_used:>10.4g} {r.theta_estimate:>14.6g}  {r.verdict.value}")
        if not r.passed:
            print(f"FAIL at R={r.R_used:g}: worst level point {r.worst_sample}")
    if config.pdf:
        ReportGenerator(f"Tangent cone: {spec.label}").write(config.pdf, cone=results[-1])
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def run_verify_subsolution(config: RunConfig) -> int:
    problem = resolve_problem(config)
    ubar = problem.ubar
    if config.field:
        ubar = ScalarField(problem.grid, _field_values(config.field, problem))
    certificates = [
        verify_admissible_field(subsolution_matrix(ubar, problem.chi, problem.grid), problem.grid, problem.spec.cone),
        verify_subsolution(
            ubar, problem.chi, problem.psi, problem.grid, problem.spec, SubsolutionMode(config.mode),
            config.epsilon, config.radius or 10.0, config.samples, config.seed, config.stride,
        ),
    ]
    _write_json(config.out, [c.model_dump(mode="python") for c in certificates])
    _print_certificates(certificates)
    if config.pdf:
        ReportGenerator("Subsolution checks").write(config.pdf, certificates=certificates)
    return EXIT_OK if all(c.passed for c in certificates) else EXIT_FAIL


def _print_report(report) -> None:
    for name in ("converged", "residual_inf", "error_inf", "max_hess_interior", "max_hess_boundary",
                 "max_grad", "c1_ratio", "newton_iterations", "continuation_steps", "wall_time"):
        print(f"{name:<20} {getattr(report, name)}")


def run_solve(config: RunConfig) -> int:
    problem = resolve_problem(config)
    u, report = solve(problem, config.solver)
    _write_json(config.out, report.model_dump(mode="python"))
    if config.field:
        write_field(config.field, u, problem.grid, name="u")
    if config.csv:
        fields = {"u": u, "ubar": problem.ubar.values, "psi": problem.psi.values}
        if problem.exact is not None:
            fields["error"] = u - problem.exact
        export_csv(config.csv, problem.grid, fields)
    _print_report(report)
    if config.pdf:
        ReportGenerator(f"Dirichlet solve: {problem.spec.label}").write(config.pdf, solve=report)
    return EXIT_OK


def run_sweep(config: RunConfig) -> int:
    problem = resolve_problem(config)
    rows = sweep(problem, parse_range(config.range), config.base, config.solver, config.param)
    if config.csv:
        write_sweep_csv(config.csv, rows)
    _write_json(config.out, {
        "param": config.param,
        "base": config.base,
        "empirical_C1": empirical_c1(rows),
        "rows": [dict(row.model_dump(mode="python"), c1_ratio=row.c1_ratio) for row in rows],
    })
    print(f"{'s':>8} {'hess_int':>12} {'hess_bdry':>12} {'grad':>12} {'C1 ratio':>10} {'iters':>6}")
    for row in rows:
        print(f"{row.s:>8.4g} {row.max_hess_interior:>12.6g} {row.max_hess_boundary:>12.6g} "
              f"{row.max_grad:>12.6g} {row.c1_ratio:>10.4g} {row.iters:>6}")
    print(f"empirical C1 = {empirical_c1(rows):.6g}")
    if config.pdf:
        ReportGenerator(f"Sweep: {problem.spec.label}").write(config.pdf, sweep=rows)
    return EXIT_OK


def run_barrier_check(config: RunConfig, search: bool = False) -> int:
    problem = resolve_problem(config)
    if config.field:
        u = _field_values(config.field, problem)
    else:
        u, _ = solve(problem, config.solver)
    if search:
        cert = find_barrier_parameters(u, problem.ubar.values, problem)
    else:
        cert = barrier_check(u, problem.ubar.values, problem, config.barrier_t, config.barrier_N, config.barrier_delta)
    _write_json(config.out, cert.model_dump(mode="python"))
    _print_certificates([cert])
    details = cert.details
    print(f"t={details['t']:g} N={details['N']:g} delta={details['delta']:g}: "
          f"min v = {details['part_a']['min_v']:.6g}, epsilon = {details['part_b']['epsilon']:.6g}")
    if config.pdf:
        ReportGenerator("Barrier check").write(config.pdf, certificates=[cert])
    return EXIT_OK if cert.passed else EXIT_FAIL


def _snapshot_path(config: RunConfig) -> Path:
    if config.out:
        return Path(f"{config.out}.snapshot.npz")
    return Path(settings.ARTIFACT_DIR) / "snapshot.npz"


def run(config: RunConfig, search: bool = False) -> int:
    """
    Execute one run and return its exit code.

    Raises:
        ToolkitError: Anything other than nonconvergence is left to the caller
    """
    try:
        if config.command == Command.VERIFY_OPERATOR:
            return run_verify_operator(config)
        if config.command == Command.VERIFY_CONE:
            return run_verify_cone(config)
        if config.command == Command.VERIFY_SUBSOLUTION:
            return run_verify_subsolution(config)
        if config.command == Command.SOLVE:
            return run_solve(config)
        if config.command == Command.SWEEP:
            return run_sweep(config)
        return run_barrier_check(config, search)
    except NonconvergenceError as e:
        path = _snapshot_path(config)
        path.parent.mkdir(parents=True, exist_ok=True)
        snapshot = {k: np.asarray(np.nan if v is None else v) for k, v in e.snapshot.items()}
        np.savez(path, **snapshot)
        logger.error(f"solver did not converge: {e}")
        print(f"NONCONVERGENCE: {e}; snapshot written to {path}")
        return EXIT_NONCONVERGENCE


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        config = load_run_config(args)
        return run(config, search=args.search)
    except ConfigError as e:
        logger.error(f"configuration error: {e}")
        print(f"CONFIG ERROR: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ToolkitError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"ERROR ({type(e).__name__}): {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
