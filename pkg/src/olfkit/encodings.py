"""Stationarity encodings for the four supported problem classes.

Each encoder turns a problem description into a
:class:`~olfkit.model.StationarityModel` whose residual vanishes exactly
at the first-order optimality points: the plain gradient for
unconstrained problems, KKT systems for constrained and minimax
problems, and the shared-multiplier KKT system for generalized Nash
games.

Inequality rows use the complementarity residual
``fb(a, b) = sqrt(a^2 + b^2) - (a + b)``, which is zero exactly when
a >= 0, b >= 0 and a*b = 0.  A constraint g(x) <= 0 with multiplier
lam is therefore encoded as ``fb(lam, -g(x))`` so that the zero set is
exactly {lam >= 0, g <= 0, lam*g = 0}.  A smoothing term eps**2 under
the root keeps the row differentiable; it perturbs complementarity by
at most eps.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import ConstructionError
from .model import StationarityModel, layout

Array = np.ndarray


# ---------------------------------------------------------------------------
# complementarity residual


def fb_smooth(a, b, eps: float = 0.0):
    """Smoothed complementarity residual sqrt(a^2+b^2+eps^2) - (a+b).

    Vectorized over numpy inputs.  With eps=0 this is the exact residual;
    for any eps the smoothed and exact values differ by at most eps.
    """
    if eps < 0.0:
        raise ValueError(f"smoothing must be nonnegative, got {eps}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.sqrt(a * a + b * b + eps * eps) - (a + b)
    return out if out.ndim else float(out)


def fb_smooth_partials(a, b, eps: float):
    """Partial derivatives (d/da, d/db) of fb_smooth; requires eps > 0."""
    if not eps > 0.0:
        raise ValueError("partials need eps > 0 (the exact residual is nonsmooth)")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    root = np.sqrt(a * a + b * b + eps * eps)
    return a / root - 1.0, b / root - 1.0


# ---------------------------------------------------------------------------
# problem descriptions


@dataclass(frozen=True)
class UnconstrainedProblem:
    """min J(x) described by its gradient and Hessian callbacks."""

    dim: int
    grad: Callable[[Array], Array]
    hess: Callable[[Array], Array]
    name: str = "unconstrained"
    strong_convexity: Optional[float] = None  # m with hess >= m*I, if known

    def __post_init__(self):
        if self.dim < 1:
            raise ConstructionError(f"dim must be >= 1, got {self.dim}")


@dataclass(frozen=True)
class ConstrainedProblem:
    """min J(x) s.t. g(x) <= 0 and A x = b.

    ``ineq_hess`` holds one Hessian callback per inequality row; leave it
    None for affine rows.  Equalities are affine by construction; A must
    have full row rank.
    """

    dim: int
    grad: Callable[[Array], Array]
    hess: Callable[[Array], Array]
    n_ineq: int = 0
    ineq: Optional[Callable[[Array], Array]] = None
    ineq_jac: Optional[Callable[[Array], Array]] = None
    ineq_hess: Optional[Sequence[Callable[[Array], Array]]] = None
    eq_matrix: Optional[Array] = None
    eq_rhs: Optional[Array] = None
    smoothing: float = 1e-6
    name: str = "constrained"
    strong_convexity: Optional[float] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ConstructionError(f"dim must be >= 1, got {self.dim}")
        if not self.smoothing > 0.0:
            raise ConstructionError(f"smoothing must be positive, got {self.smoothing}")
        if self.n_ineq < 0:
            raise ConstructionError(f"n_ineq must be >= 0, got {self.n_ineq}")
        if self.n_ineq > 0 and (self.ineq is None or self.ineq_jac is None):
            raise ConstructionError("inequalities need both ineq and ineq_jac")
        if self.ineq_hess is not None and len(self.ineq_hess) != self.n_ineq:
            raise ConstructionError(
                f"ineq_hess has {len(self.ineq_hess)} entries for {self.n_ineq} rows"
            )
        a, b = _normalized_eq(self.eq_matrix, self.eq_rhs, self.dim)
        object.__setattr__(self, "eq_matrix", a)
        object.__setattr__(self, "eq_rhs", b)

    @property
    def n_eq(self) -> int:
        return 0 if self.eq_matrix is None else self.eq_matrix.shape[0]


def _normalized_eq(a, b, dim):
    """Validate an affine equality pair A x = b; A must have full row rank."""
    if (a is None) != (b is None):
        raise ConstructionError("eq_matrix and eq_rhs must be given together")
    if a is None:
        return None, None
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[1] != dim:
        raise ConstructionError(f"eq_matrix must be (q, {dim}), got {a.shape}")
    if b.shape != (a.shape[0],):
        raise ConstructionError(f"eq_rhs must be ({a.shape[0]},), got {b.shape}")
    if np.linalg.matrix_rank(a) < a.shape[0]:
        raise ConstructionError("equality matrix does not have full row rank")
    return a, b


@dataclass(frozen=True)
class MinimaxProblem:
    """min over x, max over y of J(x, y) with coupled constraints.

    Coupled inequalities G(x, y) <= 0 must be affine (only their Jacobian
    blocks are carried, so constraint curvature cannot enter the residual
    derivative).  Equalities are A x + B y = b with [A B] full row rank.
    """

    dim_x: int
    dim_y: int
    grad_x: Callable[[Array, Array], Array]
    grad_y: Callable[[Array, Array], Array]
    hess_xx: Callable[[Array, Array], Array]
    hess_xy: Callable[[Array, Array], Array]
    hess_yx: Callable[[Array, Array], Array]
    hess_yy: Callable[[Array, Array], Array]
    n_ineq: int = 0
    ineq: Optional[Callable[[Array, Array], Array]] = None
    ineq_jac_x: Optional[Callable[[Array, Array], Array]] = None
    ineq_jac_y: Optional[Callable[[Array, Array], Array]] = None
    eq_matrix_x: Optional[Array] = None
    eq_matrix_y: Optional[Array] = None
    eq_rhs: Optional[Array] = None
    name: str = "minimax"

    def __post_init__(self):
        if self.dim_x < 1 or self.dim_y < 1:
            raise ConstructionError("dim_x and dim_y must be >= 1")
        if self.n_ineq > 0 and (
            self.ineq is None or self.ineq_jac_x is None or self.ineq_jac_y is None
        ):
            raise ConstructionError("inequalities need ineq, ineq_jac_x and ineq_jac_y")
        given = [self.eq_matrix_x is None, self.eq_matrix_y is None, self.eq_rhs is None]
        if len(set(given)) != 1:
            raise ConstructionError("eq_matrix_x, eq_matrix_y, eq_rhs must be given together")
        if self.eq_matrix_x is not None:
            ax = np.asarray(self.eq_matrix_x, dtype=float)
            by = np.asarray(self.eq_matrix_y, dtype=float)
            rhs = np.asarray(self.eq_rhs, dtype=float)
            if ax.ndim != 2 or ax.shape[1] != self.dim_x:
                raise ConstructionError(f"eq_matrix_x must be (q, {self.dim_x})")
            if by.shape != (ax.shape[0], self.dim_y):
                raise ConstructionError(f"eq_matrix_y must be ({ax.shape[0]}, {self.dim_y})")
            if rhs.shape != (ax.shape[0],):
                raise ConstructionError(f"eq_rhs must be ({ax.shape[0]},)")
            if np.linalg.matrix_rank(np.hstack([ax, by])) < ax.shape[0]:
                raise ConstructionError("[A B] does not have full row rank")
            object.__setattr__(self, "eq_matrix_x", ax)
            object.__setattr__(self, "eq_matrix_y", by)
            object.__setattr__(self, "eq_rhs", rhs)

    @property
    def n_eq(self) -> int:
        return 0 if self.eq_matrix_x is None else self.eq_matrix_x.shape[0]


@dataclass(frozen=True)
class GNEProblem:
    """N-player game with shared affine constraints and one multiplier set.

    ``pseudogradient`` stacks each player's own-gradient of its own cost;
    shared inequalities g(x) <= 0 must be affine (see MinimaxProblem).
    """

    player_dims: Tuple[int, ...]
    pseudogradient: Callable[[Array], Array]
    pseudogradient_jac: Callable[[Array], Array]
    n_ineq: int = 0
    ineq: Optional[Callable[[Array], Array]] = None
    ineq_jac: Optional[Callable[[Array], Array]] = None
    eq_matrix: Optional[Array] = None
    eq_rhs: Optional[Array] = None
    monotone_constant: Optional[float] = None
    name: str = "gne"

    def __post_init__(self):
        if not self.player_dims or any(d < 1 for d in self.player_dims):
            raise ConstructionError("each player needs dimension >= 1")
        if self.n_ineq > 0 and (self.ineq is None or self.ineq_jac is None):
            raise ConstructionError("inequalities need both ineq and ineq_jac")
        a, b = _normalized_eq(self.eq_matrix, self.eq_rhs, self.dim)
        object.__setattr__(self, "eq_matrix", a)
        object.__setattr__(self, "eq_rhs", b)

    @property
    def dim(self) -> int:
        return sum(self.player_dims)

    @property
    def n_eq(self) -> int:
        return 0 if self.eq_matrix is None else self.eq_matrix.shape[0]


# ---------------------------------------------------------------------------
# encoders


def _shaped(arr, shape, what, name):
    arr = np.asarray(arr, dtype=float)
    if arr.shape != shape:
        raise ConstructionError(
            f"{what} of {name!r} returned shape {arr.shape}, expected {shape}"
        )
    return arr


def encode_unconstrained(p: UnconstrainedProblem) -> StationarityModel:
    """Residual = gradient of the objective; derivative = its Hessian."""
    state = layout(("x", p.dim, "primal-x"))
    residual = layout(("stat", p.dim, "stationarity"))

    def fun(z):
        return _shaped(p.grad(z), (p.dim,), "grad", p.name)

    def jac(z):
        return _shaped(p.hess(z), (p.dim, p.dim), "hess", p.name)

    return StationarityModel(
        name=p.name,
        state_layout=state,
        residual_layout=residual,
        fun=fun,
        jac=jac,
        gd_constant=p.strong_convexity,
        primal_monotonicity=p.strong_convexity,
    )


def encode_constrained_fb(p: ConstrainedProblem) -> StationarityModel:
    """KKT residual with smoothed complementarity rows.

    State z = (x, lam, mu); residual stacks the Lagrangian gradient, the
    rows fb(lam_i, -g_i(x)), and A x - b.  The derivative is assembled in
    3x3 block form; the complementarity diagonal entries are strictly
    negative for eps > 0, which is what rules out spurious critical
    points of V for strongly convex data.
    """
    n, m, q = p.dim, p.n_ineq, p.n_eq
    a_mat, b_vec = p.eq_matrix, p.eq_rhs
    eps = p.smoothing
    state = layout(
        ("x", n, "primal-x"), ("lam", m, "ineq-multiplier"), ("mu", q, "eq-multiplier")
    )
    residual = layout(
        ("stat", n, "stationarity"), ("ineq", m, "complementarity"), ("eq", q, "equality")
    )

    def fun(z):
        x, lam, mu = z[:n], z[n : n + m], z[n + m :]
        stat = _shaped(p.grad(x), (n,), "grad", p.name)
        parts = [stat]
        if m:
            g = _shaped(p.ineq(x), (m,), "ineq", p.name)
            gx = _shaped(p.ineq_jac(x), (m, n), "ineq_jac", p.name)
            parts[0] = stat + gx.T @ lam
            parts.append(fb_smooth(lam, -g, eps))
        if q:
            parts[0] = parts[0] + a_mat.T @ mu
            parts.append(a_mat @ x - b_vec)
        return np.concatenate(parts)

    def jac(z):
        x, lam = z[:n], z[n : n + m]
        full = np.zeros((n + m + q, n + m + q))
        hxx = _shaped(p.hess(x), (n, n), "hess", p.name)
        if m:
            g = _shaped(p.ineq(x), (m,), "ineq", p.name)
            gx = _shaped(p.ineq_jac(x), (m, n), "ineq_jac", p.name)
            if p.ineq_hess is not None:
                for i, hi in enumerate(p.ineq_hess):
                    hxx = hxx + lam[i] * _shaped(hi(x), (n, n), "ineq_hess", p.name)
            pa, pb = fb_smooth_partials(lam, -g, eps)
            full[:n, n : n + m] = gx.T
            full[n : n + m, :n] = -pb[:, None] * gx
            full[n : n + m, n : n + m] = np.diag(pa)
        full[:n, :n] = hxx
        if q:
            full[:n, n + m :] = a_mat.T
            full[n + m :, :n] = a_mat
        return full

    return StationarityModel(
        name=p.name,
        state_layout=state,
        residual_layout=residual,
        fun=fun,
        jac=jac,
        smoothing=eps,
        primal_monotonicity=p.strong_convexity,
    )


def encode_constrained_exact(p: ConstrainedProblem) -> StationarityModel:
    """Exact (nonsmooth) KKT residual, no smoothing.

    Residual stacks the Lagrangian gradient, the scalar lam@g, the
    clipped violations max(g, 0), the clipped negative multipliers
    max(-lam, 0), and A x - b.  It has more rows than the state has
    entries, so only hgd can drive it; the rowwise max kinks use the
    one-sided derivative 0, which keeps V = 0.5*||S||^2 continuously
    differentiable.
    """
    n, m, q = p.dim, p.n_ineq, p.n_eq
    a_mat, b_vec = p.eq_matrix, p.eq_rhs
    state = layout(
        ("x", n, "primal-x"), ("lam", m, "ineq-multiplier"), ("mu", q, "eq-multiplier")
    )
    residual = layout(
        ("stat", n, "stationarity"),
        ("ineq", 1 + 2 * m if m else 0, "complementarity"),
        ("eq", q, "equality"),
    )

    def fun(z):
        x, lam, mu = z[:n], z[n : n + m], z[n + m :]
        stat = _shaped(p.grad(x), (n,), "grad", p.name)
        parts = [stat]
        if m:
            g = _shaped(p.ineq(x), (m,), "ineq", p.name)
            gx = _shaped(p.ineq_jac(x), (m, n), "ineq_jac", p.name)
            parts[0] = stat + gx.T @ lam
            parts.append(np.array([lam @ g]))
            parts.append(np.maximum(g, 0.0))
            parts.append(np.maximum(-lam, 0.0))
        if q:
            parts[0] = parts[0] + a_mat.T @ mu
            parts.append(a_mat @ x - b_vec)
        return np.concatenate(parts)

    def jac(z):
        x, lam = z[:n], z[n : n + m]
        rows = n + (1 + 2 * m if m else 0) + q
        full = np.zeros((rows, n + m + q))
        hxx = _shaped(p.hess(x), (n, n), "hess", p.name)
        r = n
        if m:
            g = _shaped(p.ineq(x), (m,), "ineq", p.name)
            gx = _shaped(p.ineq_jac(x), (m, n), "ineq_jac", p.name)
            if p.ineq_hess is not None:
                for i, hi in enumerate(p.ineq_hess):
                    hxx = hxx + lam[i] * _shaped(hi(x), (n, n), "ineq_hess", p.name)
            full[:n, n : n + m] = gx.T
            full[r, :n] = lam @ gx
            full[r, n : n + m] = g
            r += 1
            full[r : r + m, :n] = (g > 0.0).astype(float)[:, None] * gx
            r += m
            full[r : r + m, n : n + m] = np.diag(-(lam < 0.0).astype(float))
            r += m
        full[:n, :n] = hxx
        if q:
            full[:n, n + m :] = a_mat.T
            full[r:, :n] = a_mat
        return full

    return StationarityModel(
        name=p.name + "-exact",
        state_layout=state,
        residual_layout=residual,
        fun=fun,
        jac=jac,
        primal_monotonicity=p.strong_convexity,
    )


def encode_minimax(p: MinimaxProblem, eps: float = 1e-6) -> StationarityModel:
    """KKT residual of the saddle problem.

    State z = (x, y, lam, mu).  The y-block of the residual is the
    *negated* ascent residual -grad_y J + B^T mu + dG_y^T lam; both
    primal blocks then vanish together exactly at the saddle KKT point.
    """
    if not eps > 0.0:
        raise ConstructionError(f"smoothing must be positive, got {eps}")
    nx, ny, m, q = p.dim_x, p.dim_y, p.n_ineq, p.n_eq
    ax, by, rhs = p.eq_matrix_x, p.eq_matrix_y, p.eq_rhs
    state = layout(
        ("x", nx, "primal-x"),
        ("y", ny, "primal-y"),
        ("lam", m, "ineq-multiplier"),
        ("mu", q, "eq-multiplier"),
    )
    residual = layout(
        ("stat", nx + ny, "stationarity"),
        ("ineq", m, "complementarity"),
        ("eq", q, "equality"),
    )

    def fun(z):
        x, y = z[:nx], z[nx : nx + ny]
        lam, mu = z[nx + ny : nx + ny + m], z[nx + ny + m :]
        sx = _shaped(p.grad_x(x, y), (nx,), "grad_x", p.name)
        sy = -_shaped(p.grad_y(x, y), (ny,), "grad_y", p.name)
        parts = []
        if m:
            g = _shaped(p.ineq(x, y), (m,), "ineq", p.name)
            gx = _shaped(p.ineq_jac_x(x, y), (m, nx), "ineq_jac_x", p.name)
            gy = _shaped(p.ineq_jac_y(x, y), (m, ny), "ineq_jac_y", p.name)
            sx = sx + gx.T @ lam
            sy = sy + gy.T @ lam
            parts.append(fb_smooth(lam, -g, eps))
        if q:
            sx = sx + ax.T @ mu
            sy = sy + by.T @ mu
            parts.append(ax @ x + by @ y - rhs)
        return np.concatenate([sx, sy] + parts)

    def jac(z):
        x, y = z[:nx], z[nx : nx + ny]
        lam = z[nx + ny : nx + ny + m]
        dim = nx + ny + m + q
        full = np.zeros((dim, dim))
        full[:nx, :nx] = _shaped(p.hess_xx(x, y), (nx, nx), "hess_xx", p.name)
        full[:nx, nx : nx + ny] = _shaped(p.hess_xy(x, y), (nx, ny), "hess_xy", p.name)
        full[nx : nx + ny, :nx] = -_shaped(p.hess_yx(x, y), (ny, nx), "hess_yx", p.name)
        full[nx : nx + ny, nx : nx + ny] = -_shaped(
            p.hess_yy(x, y), (ny, ny), "hess_yy", p.name
        )
        if m:
            g = _shaped(p.ineq(x, y), (m,), "ineq", p.name)
            gx = _shaped(p.ineq_jac_x(x, y), (m, nx), "ineq_jac_x", p.name)
            gy = _shaped(p.ineq_jac_y(x, y), (m, ny), "ineq_jac_y", p.name)
            pa, pb = fb_smooth_partials(lam, -g, eps)
            full[:nx, nx + ny : nx + ny + m] = gx.T
            full[nx : nx + ny, nx + ny : nx + ny + m] = gy.T
            full[nx + ny : nx + ny + m, :nx] = -pb[:, None] * gx
            full[nx + ny : nx + ny + m, nx : nx + ny] = -pb[:, None] * gy
            full[nx + ny : nx + ny + m, nx + ny : nx + ny + m] = np.diag(pa)
        if q:
            full[:nx, nx + ny + m :] = ax.T
            full[nx : nx + ny, nx + ny + m :] = by.T
            full[nx + ny + m :, :nx] = ax
            full[nx + ny + m :, nx : nx + ny] = by
        return full

    return StationarityModel(
        name=p.name,
        state_layout=state,
        residual_layout=residual,
        fun=fun,
        jac=jac,
        smoothing=eps,
    )


def encode_gne(p: GNEProblem, eps: float = 1e-6) -> StationarityModel:
    """Shared-multiplier KKT residual of the game.

    State z = (x, lam, mu); residual stacks the pseudogradient
    stationarity rows, the equality residual A x - b, and the smoothed
    complementarity rows on (lam, g(x)).
    """
    if not eps > 0.0:
        raise ConstructionError(f"smoothing must be positive, got {eps}")
    n, m, q = p.dim, p.n_ineq, p.n_eq
    a_mat, b_vec = p.eq_matrix, p.eq_rhs
    state = layout(
        ("x", n, "primal-x"), ("lam", m, "ineq-multiplier"), ("mu", q, "eq-multiplier")
    )
    residual = layout(
        ("stat", n, "stationarity"), ("eq", q, "equality"), ("ineq", m, "complementarity")
    )

    def fun(z):
        x, lam, mu = z[:n], z[n : n + m], z[n + m :]
        stat = _shaped(p.pseudogradient(x), (n,), "pseudogradient", p.name)
        parts = [stat]
        if m:
            g = _shaped(p.ineq(x), (m,), "ineq", p.name)
            gx = _shaped(p.ineq_jac(x), (m, n), "ineq_jac", p.name)
            parts[0] = stat + gx.T @ lam
        if q:
            parts[0] = parts[0] + a_mat.T @ mu
            parts.append(a_mat @ x - b_vec)
        if m:
            parts.append(fb_smooth(lam, -g, eps))
        return np.concatenate(parts)

    def jac(z):
        x, lam = z[:n], z[n : n + m]
        dim = n + m + q
        full = np.zeros((dim, dim))
        full[:n, :n] = _shaped(
            p.pseudogradient_jac(x), (n, n), "pseudogradient_jac", p.name
        )
        if q:
            full[:n, n + m :] = a_mat.T
            full[n : n + q, :n] = a_mat
        if m:
            g = _shaped(p.ineq(x), (m,), "ineq", p.name)
            gx = _shaped(p.ineq_jac(x), (m, n), "ineq_jac", p.name)
            pa, pb = fb_smooth_partials(lam, -g, eps)
            full[:n, n : n + m] = gx.T
            full[n + q :, :n] = -pb[:, None] * gx
            full[n + q :, n : n + m] = np.diag(pa)
        return full

    return StationarityModel(
        name=p.name,
        state_layout=state,
        residual_layout=residual,
        fun=fun,
        jac=jac,
        smoothing=eps,
        primal_monotonicity=p.monotone_constant,
    )
