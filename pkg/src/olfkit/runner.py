"""Wires problems, laws, and dynamics into runnable cases and suites."""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .dynamics import make_realization
from .errors import ConfigError
from .integrate import SolveConfig, SolveReport, Trajectory, solve
from .laws import DecayLaw, make_law
from .model import StationarityModel
from .problems import BenchmarkSpec, build_problem

LAW_ORDER = ("exp", "ft", "fxt", "pt")

SUITES: Dict[str, List[Tuple[str, str, str]]] = {
    "logsumexp12": [
        ("logsumexp", dyn, law) for dyn in ("gd", "nd", "hgd") for law in LAW_ORDER
    ],
    "num4": [("num", "hgd", law) for law in LAW_ORDER],
    "cournot4": [("cournot", "hgd", law) for law in LAW_ORDER],
}
SUITES["all"] = SUITES["logsumexp12"] + SUITES["num4"] + SUITES["cournot4"]


@dataclass
class CaseResult:
    problem: str
    dynamics: str
    law_kind: str
    law_params: Dict[str, float]
    report: SolveReport
    trajectory: Trajectory
    spec: BenchmarkSpec
    model: StationarityModel
    config: SolveConfig

    @property
    def label(self) -> str:
        return f"{self.problem}/{self.dynamics}/{self.law_kind}"


def resolve_case(
    problem: str,
    dynamics: str = "hgd",
    law_kind: str = "exp",
    law_params: Optional[Dict[str, float]] = None,
    eps: Optional[float] = None,
    tol_stat: float = 1e-6,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-12,
    max_time: Optional[float] = None,
    pt_clip: float = 1e-3,
    samples: int = 400,
    z0: Optional[Sequence[float]] = None,
    gd_constant: Optional[float] = None,
):
    """Resolve names and overrides into (model, config, z0, spec, law_params)."""
    try:
        model, spec = build_problem(problem, eps=eps)
        params = dict(law_params) if law_params else dict(spec.law_defaults[law_kind])
        law: DecayLaw = make_law(law_kind, params)
        m = gd_constant if gd_constant is not None else model.gd_constant
        realization = make_realization(
            dynamics, monotone_bound=m if dynamics == "gd" else None
        )
        config = SolveConfig(
            law=law,
            realization=realization,
            tol_stat=tol_stat,
            rel_tol=rel_tol,
            abs_tol=abs_tol,
            max_time=max_time if max_time is not None else spec.max_time,
            pt_clip=pt_clip,
            samples=samples,
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    start = np.asarray(spec.z0 if z0 is None else list(z0), dtype=float)
    if start.shape != (model.n_state,):
        raise ConfigError(
            f"start state must have length {model.n_state}, got {start.shape}"
        )
    return model, config, start, spec, params


def run_case(problem: str, dynamics: str = "hgd", law_kind: str = "exp", **kwargs) -> CaseResult:
    """Build and solve one case end to end."""
    model, config, start, spec, params = resolve_case(
        problem, dynamics, law_kind, **kwargs
    )
    trajectory, report = solve(model, config, start)
    return CaseResult(
        problem=problem,
        dynamics=dynamics,
        law_kind=law_kind,
        law_params=params,
        report=report,
        trajectory=trajectory,
        spec=spec,
        model=model,
        config=config,
    )


def run_suite(name: str, **kwargs) -> List[CaseResult]:
    """Run a named benchmark matrix case by case."""
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}; available: {sorted(SUITES)}")
    return [
        run_case(problem, dynamics, law_kind, **kwargs)
        for problem, dynamics, law_kind in SUITES[name]
    ]
