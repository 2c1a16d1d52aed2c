"""Feedback realizations mapping (model, law, state, time) to the velocity u.

The closed loop is dz/dt = u(z, t); each realization shapes the Lyapunov
value V = 0.5*||S||^2 so that it decays at the rate demanded by the law:

* hgd: u = -sigma/||grad V||^2 * grad V, equality dV/dt = -sigma, needs
  only grad V != 0 away from the stationarity set;
* nd:  u = -sigma/(2V) * dS^{-1} S, equality, needs an invertible dS;
* gd:  u = -sigma/(2 m V) * S, inequality dV/dt <= -sigma, needs the
  symmetric part of dS bounded below by m I along the trajectory.
"""

from dataclasses import dataclass
from typing import ClassVar, Optional

import numpy as np

from .errors import (
    ConvergedAlready,
    JacobianSingular,
    SingularityEncountered,
    UnsupportedRealization,
)
from .model import StationarityModel

REALIZATION_KINDS = ("hgd", "nd", "gd")


def _require_square(model: StationarityModel, kind: str) -> None:
    if not model.is_square:
        raise UnsupportedRealization(
            f"{kind} dynamics need a square residual derivative; "
            f"encoding {model.name!r} maps {model.n_state} states to "
            f"{model.n_residual} residuals (use hgd)"
        )


@dataclass(frozen=True)
class Realization:
    """Common guards: tol_sing flags vanishing Lyapunov gradients, v_floor
    stops divisions once V is numerically zero."""

    tol_sing: float = 1e-12
    v_floor: float = 1e-30
    name: ClassVar[str] = ""

    def __post_init__(self):
        if not self.tol_sing > 0.0:
            raise ValueError(f"tol_sing must be positive, got {self.tol_sing}")
        if not self.v_floor > 0.0:
            raise ValueError(f"v_floor must be positive, got {self.v_floor}")

    def field(self, model, law, z, t=0.0):
        raise NotImplementedError


@dataclass(frozen=True)
class HessianGradientDynamics(Realization):
    """Normalized steepest descent of V; enforces dV/dt = -sigma exactly."""

    name: ClassVar[str] = "hgd"

    def field(self, model, law, z, t=0.0):
        s = model.stationarity(z)
        v = 0.5 * float(s @ s)
        if v <= self.v_floor:
            raise ConvergedAlready("Lyapunov value at the numerical floor", z=z, t=t)
        grad_v = model.jacobian(z).T @ s
        sq = float(grad_v @ grad_v)
        if np.sqrt(sq) <= self.tol_sing * (1.0 + float(np.linalg.norm(s))):
            raise SingularityEncountered(
                "Lyapunov gradient vanished away from the stationarity set "
                f"(||grad V||={np.sqrt(sq):.3e}, ||S||={np.linalg.norm(s):.3e})",
                z=z,
                t=t,
            )
        return (-law.sigma(v, t) / sq) * grad_v


@dataclass(frozen=True)
class NewtonDynamics(Realization):
    """Newton direction on S scaled by sigma/(2V); enforces dV/dt = -sigma."""

    name: ClassVar[str] = "nd"

    def field(self, model, law, z, t=0.0):
        _require_square(model, "nd")
        s = model.stationarity(z)
        v = 0.5 * float(s @ s)
        if v <= self.v_floor:
            raise ConvergedAlready("Lyapunov value at the numerical floor", z=z, t=t)
        try:
            direction = np.linalg.solve(model.jacobian(z), s)
        except np.linalg.LinAlgError as exc:
            raise JacobianSingular(
                f"residual derivative is singular at this state ({exc})", z=z, t=t
            ) from exc
        return (-law.sigma(v, t) / (2.0 * v)) * direction


@dataclass(frozen=True)
class GradientDynamics(Realization):
    """Plain residual feedback u = -sigma/(2 m V) * S; dV/dt <= -sigma.

    ``monotone_bound`` is the constant m with sym(dS) >= m I along the
    trajectory.  It must come from the problem; nothing is estimated.
    """

    monotone_bound: float = 0.0
    name: ClassVar[str] = "gd"

    def __post_init__(self):
        super().__post_init__()
        if not self.monotone_bound > 0.0:
            raise ValueError(
                f"gd needs a positive monotonicity constant, got {self.monotone_bound}"
            )

    def field(self, model, law, z, t=0.0):
        _require_square(model, "gd")
        s = model.stationarity(z)
        v = 0.5 * float(s @ s)
        if v <= self.v_floor:
            raise ConvergedAlready("Lyapunov value at the numerical floor", z=z, t=t)
        return (-law.sigma(v, t) / (2.0 * self.monotone_bound * v)) * s


def make_realization(
    kind: str,
    monotone_bound: Optional[float] = None,
    tol_sing: float = 1e-12,
    v_floor: float = 1e-30,
) -> Realization:
    kind = kind.lower()
    if kind == "hgd":
        return HessianGradientDynamics(tol_sing=tol_sing, v_floor=v_floor)
    if kind == "nd":
        return NewtonDynamics(tol_sing=tol_sing, v_floor=v_floor)
    if kind == "gd":
        if monotone_bound is None:
            raise ValueError(
                "gd needs a monotonicity constant; the chosen problem does not "
                "provide one (pass it explicitly or pick hgd/nd)"
            )
        return GradientDynamics(
            tol_sing=tol_sing, v_floor=v_floor, monotone_bound=float(monotone_bound)
        )
    raise ValueError(f"unknown dynamics {kind!r}; expected one of {REALIZATION_KINDS}")


def hgd_field(model, law, z, t=0.0):
    return HessianGradientDynamics().field(model, law, z, t)


def nd_field(model, law, z, t=0.0):
    return NewtonDynamics().field(model, law, z, t)


def gd_field(model, law, z, t=0.0, m=1.0):
    return GradientDynamics(monotone_bound=m).field(model, law, z, t)
