"""Convergence-rate templates and their analytic settling-time bounds.

A decay law maps the current Lyapunov value and the time to the demanded
decay rate ``sigma(v, t) >= 0``.  The feedback realizations in
:mod:`olfkit.dynamics` then enforce ``dV/dt = -sigma`` (or ``<= -sigma``).
Four templates are provided: exponential, finite-time (settling time
depends on the initial value), fixed-time (uniform settling bound), and
prescribed-time (user-chosen horizon, reached regardless of the start).
"""

from dataclasses import dataclass
from typing import Mapping, Optional

from .errors import HorizonExceeded

LAW_KINDS = ("exp", "ft", "fxt", "pt")


def _check_value(v: float) -> float:
    v = float(v)
    if v < 0.0:
        raise ValueError(f"Lyapunov value must be nonnegative, got {v}")
    return v


class DecayLaw:
    """Base class; subclasses implement sigma() and settling_bound()."""

    kind = ""

    def sigma(self, v: float, t: float = 0.0) -> float:
        raise NotImplementedError

    def settling_bound(self, v0: float) -> Optional[float]:
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ExponentialLaw(DecayLaw):
    """sigma = rate * v; decay is asymptotic, so no finite settling bound."""

    rate: float
    kind = "exp"

    def __post_init__(self):
        if not self.rate > 0.0:
            raise ValueError(f"rate must be positive, got {self.rate}")

    def sigma(self, v, t=0.0):
        return self.rate * _check_value(v)

    def settling_bound(self, v0):
        _check_value(v0)
        return None

    def params(self):
        return {"c": self.rate}


@dataclass(frozen=True)
class FiniteTimeLaw(DecayLaw):
    """sigma = gain * v**exponent with exponent in (0, 1).

    The settling time depends on the initial value:
    bound(v0) = v0**(1-exponent) / (gain * (1-exponent)).
    """

    gain: float
    exponent: float
    kind = "ft"

    def __post_init__(self):
        if not self.gain > 0.0:
            raise ValueError(f"gain must be positive, got {self.gain}")
        if not 0.0 < self.exponent < 1.0:
            raise ValueError(
                f"exponent must lie strictly inside (0, 1), got {self.exponent}"
            )

    def sigma(self, v, t=0.0):
        v = _check_value(v)
        if v == 0.0:
            return 0.0
        return self.gain * v**self.exponent

    def settling_bound(self, v0):
        v0 = _check_value(v0)
        return v0 ** (1.0 - self.exponent) / (self.gain * (1.0 - self.exponent))

    def params(self):
        return {"k": self.gain, "gamma": self.exponent}


@dataclass(frozen=True)
class FixedTimeLaw(DecayLaw):
    """sigma = gain_lo * v**exp_lo + gain_hi * v**exp_hi, exp_lo < 1 < exp_hi.

    The settling bound is independent of the initial value:
    1/(gain_lo*(1-exp_lo)) + 1/(gain_hi*(exp_hi-1)).
    """

    gain_lo: float
    gain_hi: float
    exponent_lo: float
    exponent_hi: float
    kind = "fxt"

    def __post_init__(self):
        if not self.gain_lo > 0.0:
            raise ValueError(f"gain_lo must be positive, got {self.gain_lo}")
        if not self.gain_hi > 0.0:
            raise ValueError(f"gain_hi must be positive, got {self.gain_hi}")
        if not 0.0 < self.exponent_lo < 1.0:
            raise ValueError(
                f"exponent_lo must lie strictly inside (0, 1), got {self.exponent_lo}"
            )
        if not self.exponent_hi > 1.0:
            raise ValueError(
                f"exponent_hi must be strictly greater than 1, got {self.exponent_hi}"
            )

    def sigma(self, v, t=0.0):
        v = _check_value(v)
        if v == 0.0:
            return 0.0
        return self.gain_lo * v**self.exponent_lo + self.gain_hi * v**self.exponent_hi

    def settling_bound(self, v0):
        _check_value(v0)
        return 1.0 / (self.gain_lo * (1.0 - self.exponent_lo)) + 1.0 / (
            self.gain_hi * (self.exponent_hi - 1.0)
        )

    def params(self):
        return {
            "a": self.gain_lo,
            "b": self.gain_hi,
            "gamma": self.exponent_lo,
            "delta": self.exponent_hi,
        }


@dataclass(frozen=True)
class PrescribedTimeLaw(DecayLaw):
    """sigma = gain * v / (horizon - t) on t in [0, horizon).

    The demanded rate blows up as t approaches the horizon, which forces
    the Lyapunov value to zero exactly at t = horizon for any start.
    """

    gain: float
    horizon: float
    kind = "pt"

    def __post_init__(self):
        if not self.gain > 0.0:
            raise ValueError(f"gain must be positive, got {self.gain}")
        if not self.horizon > 0.0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")

    def sigma(self, v, t=0.0):
        if t >= self.horizon:
            raise HorizonExceeded(
                f"prescribed-time law evaluated at t={t} >= horizon={self.horizon}"
            )
        v = _check_value(v)
        if v == 0.0:
            return 0.0
        return self.gain * v / (self.horizon - t)

    def settling_bound(self, v0):
        _check_value(v0)
        return self.horizon

    def params(self):
        return {"mu": self.gain, "T": self.horizon}


_PARAM_KEYS = {
    "exp": ("c",),
    "ft": ("k", "gamma"),
    "fxt": ("a", "b", "gamma", "delta"),
    "pt": ("mu", "T"),
}


def make_law(kind: str, params: Mapping[str, float]) -> DecayLaw:
    """Build a decay law from its CLI/config representation.

    ``kind`` is one of exp/ft/fxt/pt; ``params`` uses the short keys
    c | k, gamma | a, b, gamma, delta | mu, T.
    """
    kind = kind.lower()
    if kind not in _PARAM_KEYS:
        raise ValueError(f"unknown law kind {kind!r}; expected one of {LAW_KINDS}")
    allowed = _PARAM_KEYS[kind]
    unknown = sorted(set(params) - set(allowed))
    if unknown:
        raise ValueError(
            f"unknown parameter(s) {unknown} for law {kind!r}; expected {list(allowed)}"
        )
    missing = sorted(set(allowed) - set(params))
    if missing:
        raise ValueError(f"law {kind!r} is missing parameter(s) {missing}")
    p = {k: float(params[k]) for k in allowed}
    if kind == "exp":
        return ExponentialLaw(rate=p["c"])
    if kind == "ft":
        return FiniteTimeLaw(gain=p["k"], exponent=p["gamma"])
    if kind == "fxt":
        return FixedTimeLaw(
            gain_lo=p["a"],
            gain_hi=p["b"],
            exponent_lo=p["gamma"],
            exponent_hi=p["delta"],
        )
    return PrescribedTimeLaw(gain=p["mu"], horizon=p["T"])
