"""FastAPI service exposing the solver over HTTP.

Endpoints: GET /health, GET /problems, POST /solve, POST /bench,
POST /verify.  Bad configurations come back as 422 with a message naming
the violated invariant; solver outcomes (converged, stalled, ...) are
regular responses with a status field.
"""

import math

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import (
    ConfigError,
    ConstructionError,
    DomainViolation,
    UnsupportedRealization,
)
from ..integrate import verify_trajectory
from ..laws import make_law
from ..dynamics import make_realization
from ..problems import available_problems, build_problem
from ..runner import SUITES, CaseResult, run_case
from .schemas import (
    BenchRequest,
    BenchResponse,
    CaseSummary,
    HealthResponse,
    LawModel,
    ProblemInfo,
    ReportModel,
    SolveRequest,
    SolveResponse,
    TrajectoryModel,
    VerifyRequest,
    VerifyResponse,
)

app = FastAPI(
    title="olfkit service",
    version=__version__,
    description="Continuous-time optimization dynamics with selectable convergence rates",
)


def _clean(x: float) -> float:
    x = float(x)
    return x if math.isfinite(x) else 0.0


def _report_model(report) -> ReportModel:
    return ReportModel(
        status=report.status.value,
        stop_time=report.stop_time,
        field_evals=report.field_evals,
        v_initial=report.v_initial,
        v_final=report.v_final,
        norm_s_final=report.norm_s_final,
        settling_bound=report.settling_bound,
        within_bound=report.within_bound,
        decay_violation=report.decay_violation,
        detail=report.detail,
    )


def _trajectory_model(traj) -> TrajectoryModel:
    return TrajectoryModel(
        t=[float(v) for v in traj.t],
        z=[[float(x) for x in row] for row in traj.z],
        v=[float(v) for v in traj.v],
        norm_s=[float(v) for v in traj.norm_s],
        norm_u=[_clean(v) for v in traj.norm_u],
        sigma=[float(v) for v in traj.sigma],
        residuals={k: [float(v) for v in arr] for k, arr in traj.residuals.items()},
    )


def _solve_response(result: CaseResult, seed=None) -> SolveResponse:
    return SolveResponse(
        problem=result.problem,
        dynamics=result.dynamics,
        law=LawModel(kind=result.law_kind, params=result.law_params),
        eps=result.model.smoothing,
        state_dim=result.model.n_state,
        report=_report_model(result.report),
        trajectory=_trajectory_model(result.trajectory),
        seed=seed,
    )


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.get("/problems", response_model=list[ProblemInfo])
def problems() -> list[ProblemInfo]:
    out = []
    for name in available_problems():
        model, spec = build_problem(name)
        out.append(
            ProblemInfo(
                name=name,
                encoding=spec.encoding,
                state_dim=model.n_state,
                residual_dim=model.n_residual,
                dims=spec.dims,
                law_defaults=spec.law_defaults,
                gd_constant=spec.gd_constant,
                oracle=spec.oracle,
                notes=spec.notes,
            )
        )
    return out


@app.post("/solve", response_model=SolveResponse)
def solve_endpoint(request: SolveRequest) -> SolveResponse:
    try:
        result = run_case(
            request.problem,
            request.dynamics,
            request.law.kind,
            law_params=request.law.params or None,
            eps=request.eps,
            tol_stat=request.tol_stat,
            rel_tol=request.rel_tol,
            abs_tol=request.abs_tol,
            max_time=request.max_time,
            pt_clip=request.pt_clip,
            samples=request.samples,
            z0=request.z0,
            gd_constant=request.gd_constant,
        )
    except (ConfigError, ConstructionError, UnsupportedRealization, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    except DomainViolation as exc:
        raise HTTPException(
            status_code=422, detail=f"start state violates the problem domain: {exc}"
        ) from exc
    return _solve_response(result, seed=request.seed)


@app.post("/bench", response_model=BenchResponse)
def bench_endpoint(request: BenchRequest) -> BenchResponse:
    summaries = []
    solves = [] if request.include_trajectories else None
    all_converged = True
    for problem, dynamics, law_kind in SUITES[request.suite]:
        try:
            result = run_case(
                problem,
                dynamics,
                law_kind,
                tol_stat=request.tol_stat,
                rel_tol=request.rel_tol,
                abs_tol=request.abs_tol,
                samples=request.samples,
            )
        except (ConfigError, ConstructionError, UnsupportedRealization, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        summaries.append(
            CaseSummary(
                problem=problem,
                dynamics=dynamics,
                law=LawModel(kind=law_kind, params=result.law_params),
                status=result.report.status.value,
                stop_time=result.report.stop_time,
                settling_bound=result.report.settling_bound,
                within_bound=result.report.within_bound,
                decay_violation=result.report.decay_violation,
                norm_s_final=result.report.norm_s_final,
            )
        )
        all_converged &= result.report.status.value == "converged"
        if solves is not None:
            solves.append(_solve_response(result, seed=request.seed))
    return BenchResponse(
        suite=request.suite, cases=summaries, solves=solves, all_converged=all_converged
    )


@app.post("/verify", response_model=VerifyResponse)
def verify_endpoint(request: VerifyRequest) -> VerifyResponse:
    try:
        model, spec = build_problem(request.problem, eps=request.eps)
        params = request.law.params or spec.law_defaults[request.law.kind]
        law = make_law(request.law.kind, params)
        m = request.gd_constant if request.gd_constant is not None else spec.gd_constant
        realization = make_realization(
            request.dynamics, monotone_bound=m if request.dynamics == "gd" else None
        )
        z = np.asarray(request.z, dtype=float)
        if z.ndim != 2 or z.shape[1] != model.n_state:
            raise ConfigError(
                f"states must be rows of length {model.n_state}, got {z.shape}"
            )
        if len(request.t) != len(z):
            raise ConfigError("t and z must have the same number of samples")
        outcome = verify_trajectory(
            model,
            law,
            realization,
            np.asarray(request.t, dtype=float),
            z,
            v=None if request.v is None else np.asarray(request.v, dtype=float),
            norm_u=None if request.norm_u is None else np.asarray(request.norm_u, dtype=float),
            sigma=None if request.sigma is None else np.asarray(request.sigma, dtype=float),
            tol=request.tol,
        )
    except (ConfigError, ConstructionError, UnsupportedRealization, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return VerifyResponse(
        ok=outcome.ok,
        max_violation=outcome.max_violation,
        bad_index=outcome.bad_index,
        failures=outcome.failures,
    )
