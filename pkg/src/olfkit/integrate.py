"""Drives dz/dt = u(z, t) with an adaptive embedded pair, stop events,
trajectory recording, and decay-law verification.

The stepper is the Dormand-Prince 5(4) pair with local error controlled
against the configured tolerances.  Termination happens at the first of:
the residual norm dropping to the stop tolerance (converged), the time
budget, the prescribed-horizon clip time, or an error raised by the
feedback field (singular stall, domain violation).  The stop event is
detected at step ends and the crossing refined by bisection on the
step's dense output, sharp enough that reported stop times can be
compared against analytic settling bounds with no slack.
"""

import enum
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.integrate import RK45

from .errors import (
    ConvergedAlready,
    DomainViolation,
    JacobianSingular,
    SingularityEncountered,
)
from .laws import DecayLaw, PrescribedTimeLaw
from .dynamics import Realization
from .model import StationarityModel

Array = np.ndarray


class SolveStatus(str, enum.Enum):
    CONVERGED = "converged"
    SINGULAR_STALL = "singular_stall"
    HORIZON_REACHED = "horizon_reached"
    STEP_FAILURE = "step_failure"
    DOMAIN_VIOLATION = "domain_violation"


@dataclass
class SolveConfig:
    """Everything a solve needs besides the model and the start state."""

    law: DecayLaw
    realization: Realization
    tol_stat: float = 1e-6      # stop when ||S|| drops to this
    rel_tol: float = 1e-9       # stepper relative error tolerance
    abs_tol: float = 1e-12      # stepper absolute error tolerance
    max_time: float = 100.0
    pt_clip: float = 1e-3       # integrate a pt law only to horizon*(1 - pt_clip)
    samples: int = 400          # recorded output samples, log-spaced in V

    def __post_init__(self):
        for name in ("tol_stat", "rel_tol", "abs_tol", "max_time"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 < self.pt_clip < 1.0:
            raise ValueError(f"pt_clip must lie in (0, 1), got {self.pt_clip}")
        if self.samples < 2:
            raise ValueError(f"samples must be >= 2, got {self.samples}")


@dataclass
class Trajectory:
    """Time-sampled record of one solve; times are strictly increasing."""

    t: Array
    z: Array
    v: Array
    norm_s: Array
    norm_u: Array
    sigma: Array
    residuals: Dict[str, Array] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.t)


@dataclass
class SolveReport:
    status: SolveStatus
    stop_time: float
    field_evals: int
    v_initial: float
    v_final: float
    norm_s_final: float
    settling_bound: Optional[float]
    within_bound: Optional[bool]
    decay_violation: float
    detail: str = ""


def _sample_indices(v: Array, count: int) -> np.ndarray:
    """Pick <= count indices, log-spaced in v where possible, keeping ends."""
    n = len(v)
    if n <= count:
        return np.arange(n)
    lo, hi = float(v[-1]), float(v[0])
    if not (hi > lo > 0.0):
        return np.unique(np.linspace(0, n - 1, count).astype(int))
    thresholds = np.geomspace(hi, lo, count)
    picked = [0]
    j = 0
    for thr in thresholds[1:]:
        while j < n - 1 and v[j] > thr:
            j += 1
        picked.append(j)
    picked.append(n - 1)
    return np.unique(np.asarray(picked, dtype=int))


def solve(
    model: StationarityModel, config: SolveConfig, z0: Array
) -> Tuple[Trajectory, SolveReport]:
    """Integrate the closed loop from z0 until a stop event fires.

    Returns the recorded trajectory and a report.  A domain violation at
    z0 itself is a precondition failure and raises instead of reporting.
    Identical (model, config, z0) always produce identical output.
    """
    law, realization = config.law, config.realization
    z0 = np.asarray(z0, dtype=float)
    s0 = model.stationarity(z0)
    norm0 = float(np.linalg.norm(s0))
    v_initial = 0.5 * norm0 * norm0

    t_end = config.max_time
    if isinstance(law, PrescribedTimeLaw):
        t_end = min(t_end, law.horizon * (1.0 - config.pt_clip))

    nfev = 0
    last_domain: Optional[DomainViolation] = None

    def rhs(t, y):
        nonlocal nfev, last_domain
        nfev += 1
        try:
            return realization.field(model, law, y, t)
        except DomainViolation as exc:
            # trial stages may poke outside the domain; let the error
            # control reject the step instead of killing the run
            last_domain = exc
            return np.full(model.n_state, np.nan)

    ts = [0.0]
    zs = [z0]
    norms = [norm0]
    status = None
    detail = ""

    if norm0 <= config.tol_stat:
        status = SolveStatus.CONVERGED
    else:
        try:
            stepper = RK45(
                rhs, 0.0, z0, t_bound=t_end, rtol=config.rel_tol, atol=config.abs_tol
            )
        except (SingularityEncountered, JacobianSingular) as exc:
            status, detail = SolveStatus.SINGULAR_STALL, str(exc)
        except ConvergedAlready:
            status = SolveStatus.CONVERGED

    while status is None:
        try:
            with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
                stepper.step()
        except (SingularityEncountered, JacobianSingular) as exc:
            status, detail = SolveStatus.SINGULAR_STALL, str(exc)
            break
        except ConvergedAlready:
            status = (
                SolveStatus.CONVERGED
                if norms[-1] <= config.tol_stat
                else SolveStatus.SINGULAR_STALL
            )
            break
        if stepper.status == "failed" or not np.all(np.isfinite(stepper.y)):
            if last_domain is not None:
                status, detail = SolveStatus.DOMAIN_VIOLATION, str(last_domain)
            else:
                status, detail = (
                    SolveStatus.STEP_FAILURE,
                    "step size shrank below the minimum",
                )
            break
        last_domain = None  # the step succeeded; forget rejected-stage pokes
        t_new, y_new = float(stepper.t), stepper.y.copy()
        try:
            norm_new = float(np.linalg.norm(model.stationarity(y_new)))
        except DomainViolation as exc:
            status, detail = SolveStatus.DOMAIN_VIOLATION, str(exc)
            break
        ts.append(t_new)
        zs.append(y_new)
        norms.append(norm_new)
        if norm_new <= config.tol_stat:
            t_hit, z_hit, norm_hit = _refine_stop(
                model, stepper, ts[-2], t_new, y_new, norm_new, config.tol_stat
            )
            ts[-1], zs[-1], norms[-1] = t_hit, z_hit, norm_hit
            status = SolveStatus.CONVERGED
            break
        if stepper.status == "finished":
            status = SolveStatus.HORIZON_REACHED
            break

    trajectory = _record(model, law, realization, ts, zs, norms, config.samples)
    v_final = float(trajectory.v[-1])
    bound = law.settling_bound(v_initial)
    within = None
    if bound is not None:
        within = bool(status is SolveStatus.CONVERGED and trajectory.t[-1] <= bound)
    report = SolveReport(
        status=status,
        stop_time=float(trajectory.t[-1]),
        field_evals=nfev,
        v_initial=v_initial,
        v_final=v_final,
        norm_s_final=float(trajectory.norm_s[-1]),
        settling_bound=bound,
        within_bound=within,
        decay_violation=verify_decay(model, trajectory, law, realization),
        detail=detail,
    )
    return trajectory, report


def _refine_stop(model, stepper, t_lo, t_hi, z_hi, norm_hi, tol):
    """Bisect the final step's dense output for the first time ||S|| <= tol.

    Refined well past the 1e-3 relative contract so that stop times can
    be compared against analytic settling bounds without slack.
    """
    dense = stepper.dense_output()
    lo, hi = t_lo, t_hi
    for _ in range(100):
        if hi - lo <= 1e-12 * max(abs(hi), 1.0):
            break
        mid = 0.5 * (lo + hi)
        z_mid = dense(mid)
        try:
            norm_mid = float(np.linalg.norm(model.stationarity(z_mid)))
        except DomainViolation:
            break
        if norm_mid <= tol:
            hi, z_hi, norm_hi = mid, z_mid, norm_mid
        else:
            lo = mid
    return hi, np.asarray(z_hi, dtype=float), norm_hi


def _record(model, law, realization, ts, zs, norms, samples):
    ts = np.asarray(ts)
    zs = np.asarray(zs)
    norms = np.asarray(norms)
    v_all = 0.5 * norms * norms
    idx = _sample_indices(v_all, samples)
    t_sel = ts[idx]
    z_sel = zs[idx]
    v_sel = v_all[idx]
    norm_sel = norms[idx]
    sigma = np.empty(len(idx))
    norm_u = np.empty(len(idx))
    block_names = [b.name for b in model.residual_layout.blocks]
    residuals = {name: np.empty(len(idx)) for name in block_names}
    for i, (t, z) in enumerate(zip(t_sel, z_sel)):
        sigma[i] = law.sigma(v_sel[i], t)
        try:
            norm_u[i] = float(np.linalg.norm(realization.field(model, law, z, t)))
        except (ConvergedAlready, SingularityEncountered, JacobianSingular):
            norm_u[i] = np.nan
        for name, value in model.block_residuals(z).items():
            residuals[name][i] = value
    return Trajectory(
        t=t_sel, z=z_sel, v=v_sel, norm_s=norm_sel, norm_u=norm_u, sigma=sigma,
        residuals=residuals,
    )


def verify_decay(
    model: StationarityModel,
    trajectory: Trajectory,
    law: DecayLaw,
    realization: Realization,
) -> float:
    """Max decay-law violation over the recorded states.

    At each state the directional derivative grad V . u and the demanded
    rate sigma(V, t) are recomputed analytically (never by differencing
    the trajectory).  The violation is (grad V . u + sigma) / max(1, sigma),
    two-sided for the equality designs (hgd, nd) and the positive part
    only for gd, whose guarantee is one-sided.
    """
    one_sided = realization.name == "gd"
    worst = 0.0
    for t, z in zip(trajectory.t, trajectory.z):
        try:
            u = realization.field(model, law, z, t)
        except (ConvergedAlready, SingularityEncountered, JacobianSingular):
            continue
        v = model.olf_value(z)
        sig = law.sigma(v, t)
        raw = (float(model.olf_gradient(z) @ u) + sig) / max(1.0, sig)
        worst = max(worst, max(raw, 0.0) if one_sided else abs(raw))
    return worst


@dataclass
class VerifyOutcome:
    """Result of auditing a recorded trajectory against a claimed design."""

    ok: bool
    max_violation: float
    bad_index: Optional[int]
    failures: list

    def summary(self) -> str:
        if self.ok:
            return f"ok (max decay violation {self.max_violation:.3e})"
        return "; ".join(self.failures)


def verify_trajectory(
    model: StationarityModel,
    law: DecayLaw,
    realization: Realization,
    t: Array,
    z: Array,
    v: Optional[Array] = None,
    norm_u: Optional[Array] = None,
    sigma: Optional[Array] = None,
    tol: float = 1e-6,
) -> VerifyOutcome:
    """Audit recorded samples: decay identity plus recorded-column checks.

    The decay check recomputes grad V . u + sigma at every state.  When
    the recorded V, ||u|| or sigma columns are supplied they are compared
    against recomputation, which catches corrupted rows and trajectories
    produced by a different realization or law than claimed.
    """
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=float)
    one_sided = realization.name == "gd"
    failures = []
    bad_index = None
    worst = 0.0

    def _flag(i, msg):
        nonlocal bad_index
        if bad_index is None:
            bad_index = i
        failures.append(f"sample {i}: {msg}")

    for i in range(len(t)):
        v_i = model.olf_value(z[i])
        if v is not None:
            dev = abs(float(v[i]) - v_i) / max(1.0, v_i)
            if dev > tol:
                _flag(i, f"recorded V deviates from the state by {dev:.3e}")
                continue
        sig_i = law.sigma(v_i, float(t[i]))
        if sigma is not None:
            dev = abs(float(sigma[i]) - sig_i) / max(1.0, sig_i)
            if dev > tol:
                _flag(i, f"recorded sigma deviates by {dev:.3e}")
                continue
        try:
            u = realization.field(model, law, z[i], float(t[i]))
        except (ConvergedAlready, SingularityEncountered, JacobianSingular):
            continue
        if norm_u is not None and np.isfinite(norm_u[i]):
            nu = float(np.linalg.norm(u))
            dev = abs(float(norm_u[i]) - nu) / max(1.0, nu)
            if dev > tol:
                _flag(i, f"recorded ||u|| deviates from {realization.name} by {dev:.3e}")
                continue
        raw = (float(model.olf_gradient(z[i]) @ u) + sig_i) / max(1.0, sig_i)
        viol = max(raw, 0.0) if one_sided else abs(raw)
        if viol > tol and bad_index is None:
            bad_index = i
            failures.append(f"sample {i}: decay violation {viol:.3e}")
        worst = max(worst, viol)
    ok = not failures and worst <= tol
    return VerifyOutcome(ok=ok, max_violation=worst, bad_index=bad_index, failures=failures)
