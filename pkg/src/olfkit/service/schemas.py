"""Pydantic request/response models for the solver service."""

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field

LawKind = Literal["exp", "ft", "fxt", "pt"]
DynamicsKind = Literal["hgd", "nd", "gd"]


class LawModel(BaseModel):
    kind: LawKind
    params: Dict[str, float] = Field(
        default_factory=dict,
        description="short keys: c | k, gamma | a, b, gamma, delta | mu, T; "
        "empty means the problem's recommended parameters",
    )


class SolveRequest(BaseModel):
    problem: str
    dynamics: DynamicsKind = "hgd"
    law: LawModel = Field(default_factory=lambda: LawModel(kind="exp"))
    eps: Optional[float] = Field(None, gt=0, description="complementarity smoothing")
    tol_stat: float = Field(1e-6, gt=0)
    rel_tol: float = Field(1e-9, gt=0)
    abs_tol: float = Field(1e-12, gt=0)
    max_time: Optional[float] = Field(None, gt=0)
    pt_clip: float = Field(1e-3, gt=0, lt=1)
    samples: int = Field(400, ge=2, le=100000)
    z0: Optional[List[float]] = None
    gd_constant: Optional[float] = Field(None, gt=0)
    seed: Optional[int] = None  # recorded for provenance; solves are deterministic


class TrajectoryModel(BaseModel):
    t: List[float]
    z: List[List[float]]
    v: List[float]
    norm_s: List[float]
    norm_u: List[float]
    sigma: List[float]
    residuals: Dict[str, List[float]]


class ReportModel(BaseModel):
    status: str
    stop_time: float
    field_evals: int
    v_initial: float
    v_final: float
    norm_s_final: float
    settling_bound: Optional[float]
    within_bound: Optional[bool]
    decay_violation: float
    detail: str = ""


class SolveResponse(BaseModel):
    problem: str
    dynamics: DynamicsKind
    law: LawModel
    eps: Optional[float]
    state_dim: int
    report: ReportModel
    trajectory: TrajectoryModel
    seed: Optional[int] = None


class ProblemInfo(BaseModel):
    name: str
    encoding: str
    state_dim: int
    residual_dim: int
    dims: Dict[str, int]
    law_defaults: Dict[str, Dict[str, float]]
    gd_constant: Optional[float]
    oracle: Optional[str]
    notes: str


class BenchRequest(BaseModel):
    suite: Literal["logsumexp12", "num4", "cournot4", "all"]
    tol_stat: float = Field(1e-6, gt=0)
    rel_tol: float = Field(1e-9, gt=0)
    abs_tol: float = Field(1e-12, gt=0)
    samples: int = Field(400, ge=2, le=100000)
    include_trajectories: bool = True
    seed: Optional[int] = None


class CaseSummary(BaseModel):
    problem: str
    dynamics: DynamicsKind
    law: LawModel
    status: str
    stop_time: float
    settling_bound: Optional[float]
    within_bound: Optional[bool]
    decay_violation: float
    norm_s_final: float


class BenchResponse(BaseModel):
    suite: str
    cases: List[CaseSummary]
    solves: Optional[List[SolveResponse]] = None
    all_converged: bool


class VerifyRequest(BaseModel):
    problem: str
    dynamics: DynamicsKind
    law: LawModel
    eps: Optional[float] = Field(None, gt=0)
    gd_constant: Optional[float] = Field(None, gt=0)
    tol: float = Field(1e-6, gt=0)
    t: List[float]
    z: List[List[float]]
    v: Optional[List[float]] = None
    norm_u: Optional[List[float]] = None
    sigma: Optional[List[float]] = None


class VerifyResponse(BaseModel):
    ok: bool
    max_violation: float
    bad_index: Optional[int]
    failures: List[str]


class HealthResponse(BaseModel):
    status: str
    version: str
