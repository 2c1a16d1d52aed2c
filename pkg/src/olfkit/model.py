"""Stationarity-residual models and the quadratic residual Lyapunov function.

A model bundles a residual map S(z), its derivative, and block metadata
for both the state vector z and the residual vector.  The Lyapunov value
is V(z) = 0.5 * ||S(z)||^2, which vanishes exactly where S does, and its
gradient is dS(z)^T S(z).
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .errors import ConstructionError

Array = np.ndarray

# roles used by the shipped encodings; layouts accept any short string
STATE_ROLES = ("primal-x", "primal-y", "ineq-multiplier", "eq-multiplier")
RESIDUAL_ROLES = ("stationarity", "complementarity", "equality")


@dataclass(frozen=True)
class Block:
    name: str
    size: int
    role: str = ""


@dataclass(frozen=True)
class BlockLayout:
    """Named contiguous blocks covering a flat vector."""

    blocks: Tuple[Block, ...]

    def __post_init__(self):
        names = [b.name for b in self.blocks]
        if len(set(names)) != len(names):
            raise ConstructionError(f"duplicate block names in layout: {names}")
        for b in self.blocks:
            if int(b.size) != b.size or b.size < 0:
                raise ConstructionError(f"block {b.name!r} has bad size {b.size}")
        if self.dim < 1:
            raise ConstructionError("layout must cover at least one entry")

    @property
    def dim(self) -> int:
        return sum(b.size for b in self.blocks)

    def slices(self) -> Dict[str, slice]:
        out = {}
        off = 0
        for b in self.blocks:
            out[b.name] = slice(off, off + b.size)
            off += b.size
        return out

    def slice_of(self, name: str) -> slice:
        try:
            return self.slices()[name]
        except KeyError:
            raise KeyError(f"no block named {name!r} in layout") from None

    def split(self, vec: Array) -> Dict[str, Array]:
        vec = np.asarray(vec)
        if vec.shape != (self.dim,):
            raise ValueError(f"expected vector of length {self.dim}, got {vec.shape}")
        return {name: vec[sl] for name, sl in self.slices().items()}


def layout(*blocks: Tuple[str, int, str]) -> BlockLayout:
    """Shorthand: layout(("x", 3, "primal-x"), ...) skipping empty blocks."""
    return BlockLayout(tuple(Block(n, s, r) for n, s, r in blocks if s > 0))


@dataclass(frozen=True)
class StationarityModel:
    """Evaluation contract for one problem encoding.

    ``fun`` maps a state z (length ``state_layout.dim``) to the residual
    vector; ``jac`` returns its derivative as a dense
    (residual_dim x state_dim) matrix.  Both must be deterministic.
    Models are immutable and safe to share across concurrent solves.
    """

    name: str
    state_layout: BlockLayout
    residual_layout: BlockLayout
    fun: Callable[[Array], Array] = field(repr=False)
    jac: Callable[[Array], Array] = field(repr=False)
    smoothing: Optional[float] = None
    gd_constant: Optional[float] = None      # valid m for the full system, if any
    primal_monotonicity: Optional[float] = None  # m on the primal block only

    @property
    def n_state(self) -> int:
        return self.state_layout.dim

    @property
    def n_residual(self) -> int:
        return self.residual_layout.dim

    @property
    def is_square(self) -> bool:
        return self.n_state == self.n_residual

    def _as_state(self, z: Array) -> Array:
        z = np.asarray(z, dtype=float)
        if z.shape != (self.n_state,):
            raise ValueError(
                f"model {self.name!r} expects state of length {self.n_state}, got {z.shape}"
            )
        return z

    def stationarity(self, z: Array) -> Array:
        s = np.asarray(self.fun(self._as_state(z)), dtype=float)
        if s.shape != (self.n_residual,):
            raise ConstructionError(
                f"residual of {self.name!r} has shape {s.shape}, expected ({self.n_residual},)"
            )
        return s

    def jacobian(self, z: Array) -> Array:
        j = np.asarray(self.jac(self._as_state(z)), dtype=float)
        if j.shape != (self.n_residual, self.n_state):
            raise ConstructionError(
                f"jacobian of {self.name!r} has shape {j.shape}, "
                f"expected ({self.n_residual}, {self.n_state})"
            )
        return j

    def olf_value(self, z: Array) -> float:
        s = self.stationarity(z)
        return 0.5 * float(s @ s)

    def olf_gradient(self, z: Array) -> Array:
        return self.jacobian(z).T @ self.stationarity(z)

    def block_residuals(self, z: Array) -> Dict[str, float]:
        """Euclidean norm of each residual block; each is <= ||S(z)||."""
        s = self.stationarity(z)
        return {
            name: float(np.linalg.norm(s[sl]))
            for name, sl in self.residual_layout.slices().items()
        }


def fd_check(model: StationarityModel, z: Array, step: Optional[float] = None) -> float:
    """Max relative deviation between the analytic derivative and central differences.

    Per entry the deviation is |fd_ij - J_ij| / (1 + |J_ij|); the default
    step is 1e-6 scaled by (1 + max|z|).
    """
    z = np.asarray(z, dtype=float)
    h = step if step is not None else 1e-6 * (1.0 + float(np.max(np.abs(z), initial=0.0)))
    if not h > 0.0:
        raise ValueError(f"step must be positive, got {h}")
    jac = model.jacobian(z)
    fd = np.empty_like(jac)
    for j in range(model.n_state):
        zp = z.copy()
        zm = z.copy()
        zp[j] += h
        zm[j] -= h
        fd[:, j] = (model.stationarity(zp) - model.stationarity(zm)) / (2.0 * h)
    return float(np.max(np.abs(fd - jac) / (1.0 + np.abs(jac))))
