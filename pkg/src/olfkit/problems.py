"""Built-in benchmark problems and the independent oracles that check them.

Each builder returns a problem description plus a serializable
:class:`BenchmarkSpec` (dimensions, parameters, start state, recommended
law parameters, oracle handle).  Oracles are direct linear algebra or
exhaustive enumeration only; no iterative solver is trusted as ground
truth.
"""

import itertools
import json
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .encodings import (
    ConstrainedProblem,
    GNEProblem,
    MinimaxProblem,
    UnconstrainedProblem,
    encode_constrained_exact,
    encode_constrained_fb,
    encode_gne,
    encode_minimax,
    encode_unconstrained,
)
from .errors import ConstructionError, DomainViolation, OracleAmbiguous, OracleFailure
from .model import StationarityModel

Array = np.ndarray

_LAW_DEFAULTS = {
    "exp": {"c": 1.0},
    "ft": {"k": 1.0, "gamma": 0.5},
    "fxt": {"a": 1.0, "b": 1.0, "gamma": 0.5, "delta": 2.0},
    "pt": {"mu": 6.0, "T": 5.0},
}


@dataclass(frozen=True)
class BenchmarkSpec:
    """Serializable description of one shipped benchmark."""

    name: str
    encoding: str
    dims: Dict[str, int]
    params: Dict[str, object]
    z0: List[float]
    law_defaults: Dict[str, Dict[str, float]] = field(
        default_factory=lambda: json.loads(json.dumps(_LAW_DEFAULTS))
    )
    max_time: float = 100.0
    gd_constant: Optional[float] = None
    oracle: Optional[str] = None
    notes: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "BenchmarkSpec":
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "BenchmarkSpec":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# builders


def build_logsumexp(n: int = 50) -> Tuple[UnconstrainedProblem, BenchmarkSpec]:
    """Smooth strongly convex test objective log(sum_i(e^x_i + e^-x_i)) + ||x||^2/2.

    The unique minimizer is the origin; the quadratic term keeps the
    Hessian bounded below by the identity, so gd may run with m = 1.
    """
    if n < 1:
        raise ConstructionError(f"n must be >= 1, got {n}")

    def grad(x):
        return np.sinh(x) / np.sum(np.cosh(x)) + x

    def hess(x):
        c = np.cosh(x)
        s = np.sinh(x)
        total = np.sum(c)
        return np.diag(c) / total - np.outer(s, s) / total**2 + np.eye(n)

    problem = UnconstrainedProblem(
        dim=n, grad=grad, hess=hess, name="logsumexp", strong_convexity=1.0
    )
    spec = BenchmarkSpec(
        name="logsumexp",
        encoding="unconstrained",
        dims={"n": n},
        params={},
        z0=[1.0] * n,
        max_time=200.0,
        gd_constant=1.0,
        oracle="origin",
        notes="unique minimizer at the origin; start at the all-ones vector",
    )
    return problem, spec


def build_sphere(n: int = 2) -> Tuple[UnconstrainedProblem, BenchmarkSpec]:
    """Pure quadratic bowl ||x||^2/2; closed forms exist for every law."""
    if n < 1:
        raise ConstructionError(f"n must be >= 1, got {n}")
    problem = UnconstrainedProblem(
        dim=n,
        grad=lambda x: x.copy(),
        hess=lambda x: np.eye(n),
        name="sphere",
        strong_convexity=1.0,
    )
    z0 = [0.0] * n
    z0[0] = 1.0
    spec = BenchmarkSpec(
        name="sphere",
        encoding="unconstrained",
        dims={"n": n},
        params={},
        z0=z0,
        gd_constant=1.0,
        oracle="origin",
        notes="gd with an exponential law gives the closed form x(t) = exp(-c t/2 m) x0",
    )
    return problem, spec


def build_boundqp(eps: float = 1e-6) -> Tuple[ConstrainedProblem, BenchmarkSpec]:
    """min ||x||^2/2 subject to x_1 >= 1; the bound is active at the optimum.

    KKT solution: x = (1, 0), multiplier 1.
    """
    problem = ConstrainedProblem(
        dim=2,
        grad=lambda x: x.copy(),
        hess=lambda x: np.eye(2),
        n_ineq=1,
        ineq=lambda x: np.array([1.0 - x[0]]),
        ineq_jac=lambda x: np.array([[-1.0, 0.0]]),
        smoothing=eps,
        name="boundqp",
        strong_convexity=1.0,
    )
    spec = BenchmarkSpec(
        name="boundqp",
        encoding="kkt-fb",
        dims={"n": 2, "m": 1, "q": 0},
        params={"smoothing": float(eps)},
        z0=[2.0, 0.5, 0.5],
        oracle="kkt-active-set",
        notes="tiny QP with one active bound; exact-encoding variant: boundqp-exact",
    )
    return problem, spec


def build_num(
    routing=None, capacity=None, weights=None, eps: float = 1e-6, x_min: float = 1e-9
) -> Tuple[ConstrainedProblem, BenchmarkSpec]:
    """Rate allocation over capacity-limited links (log utilities).

    Maximizing sum_j weights_j * log(x_j) under routing @ x <= capacity is
    encoded as minimizing the negated utility.  Rates must stay strictly
    positive; the gradient aborts with DomainViolation below ``x_min``.
    The default instance has two sources sharing one unit link, with
    optimum x = (0.5, 0.5) and multiplier 2.
    """
    routing = np.asarray([[1.0, 1.0]] if routing is None else routing, dtype=float)
    if routing.ndim != 2:
        raise ConstructionError("routing must be a 2-d 0/1 matrix")
    links, sources = routing.shape
    capacity = np.asarray([1.0] if capacity is None else capacity, dtype=float)
    weights = np.asarray([1.0] * sources if weights is None else weights, dtype=float)
    if not np.all(np.isin(routing, (0.0, 1.0))):
        raise ConstructionError("routing entries must be 0 or 1")
    if not np.all(routing.sum(axis=0) >= 1):
        raise ConstructionError("every source must use at least one link")
    if capacity.shape != (links,) or not np.all(capacity > 0):
        raise ConstructionError("capacity must be positive, one entry per link")
    if weights.shape != (sources,) or not np.all(weights > 0):
        raise ConstructionError("weights must be positive, one entry per source")

    def _guard(x):
        if np.any(x <= x_min):
            raise DomainViolation(
                f"a source rate dropped to {x.min():.3e} <= {x_min:.1e}; "
                "log utilities need strictly positive rates",
                z=x,
            )

    def grad(x):
        _guard(x)
        return -weights / x

    def hess(x):
        _guard(x)
        return np.diag(weights / x**2)

    problem = ConstrainedProblem(
        dim=sources,
        grad=grad,
        hess=hess,
        n_ineq=links,
        ineq=lambda x: routing @ x - capacity,
        ineq_jac=lambda x: routing,
        smoothing=eps,
        name="num",
        strong_convexity=None,
    )
    x0 = np.full(sources, 0.5 * capacity.min() / sources)
    spec = BenchmarkSpec(
        name="num",
        encoding="kkt-fb",
        dims={"n": int(sources), "m": int(links), "q": 0},
        params={
            "routing": routing.tolist(),
            "capacity": capacity.tolist(),
            "weights": weights.tolist(),
            "smoothing": float(eps),
            "x_min": float(x_min),
        },
        z0=[float(v) for v in x0] + [1.0] * links,
        oracle="num-analytic",
        notes="start state is an artifact choice (strictly feasible interior point)",
    )
    return problem, spec


def build_cournot(eps: float = 1e-6) -> Tuple[GNEProblem, BenchmarkSpec]:
    """Four firms supplying two markets under linear inverse demand.

    Firm k picks a production pair; prices are price_base - aggregate
    supply; production costs are quadratic.  Shared constraints: the
    first market's total supply is fixed at 12, market capacities cap the
    aggregates, and production is nonnegative (its own inequality rows).
    The pseudogradient is affine and strongly monotone.
    """
    n_firms, n_markets = 4, 2
    dim = n_firms * n_markets
    agg = np.tile(np.eye(n_markets), (1, n_firms))
    price_base = np.array([10.0, 8.0])
    slope = np.eye(n_markets)
    jac = (
        np.eye(dim)
        + np.kron(np.eye(n_firms), slope)
        + np.kron(np.ones((n_firms, n_firms)), slope)
    )
    offset = -np.tile(price_base, n_firms)
    cap = np.array([20.0, 15.0])
    ineq_matrix = np.vstack([agg, -np.eye(dim)])
    ineq_rhs = np.concatenate([cap, np.zeros(dim)])
    eq_matrix = agg[:1].copy()
    eq_rhs = np.array([12.0])
    monotone = float(np.linalg.eigvalsh(0.5 * (jac + jac.T)).min())

    problem = GNEProblem(
        player_dims=(n_markets,) * n_firms,
        pseudogradient=lambda x: jac @ x + offset,
        pseudogradient_jac=lambda x: jac,
        n_ineq=ineq_matrix.shape[0],
        ineq=lambda x: ineq_matrix @ x - ineq_rhs,
        ineq_jac=lambda x: ineq_matrix,
        eq_matrix=eq_matrix,
        eq_rhs=eq_rhs,
        monotone_constant=monotone,
        name="cournot",
    )
    spec = BenchmarkSpec(
        name="cournot",
        encoding="gne",
        dims={"n": dim, "m": int(ineq_matrix.shape[0]), "q": 1},
        params={
            "aggregation": agg.tolist(),
            "price_base": price_base.tolist(),
            "price_slope": slope.tolist(),
            "capacities": cap.tolist(),
            "supply_target": 12.0,
            "smoothing": float(eps),
            "monotone_constant": monotone,
        },
        z0=[1.0] * dim + [1.0] * ineq_matrix.shape[0] + [0.0],
        oracle="kkt-active-set",
        notes="nonnegativity enters as inequality rows so one KKT system covers the feasible set",
    )
    return problem, spec


def build_minimax_toy(
    variant: str = "ineq", eps: float = 1e-6
) -> Tuple[MinimaxProblem, BenchmarkSpec]:
    """Scalar saddle objective x^2/2 - y^2/2 + x y.

    variant "ineq": one coupled constraint x + y <= 1, inactive at the
    saddle (0, 0).  variant "eq": the constraint x + y = 2 instead, with
    saddle point (0, 2) and multiplier -2.
    """
    common = dict(
        dim_x=1,
        dim_y=1,
        grad_x=lambda x, y: x + y,
        grad_y=lambda x, y: x - y,
        hess_xx=lambda x, y: np.array([[1.0]]),
        hess_xy=lambda x, y: np.array([[1.0]]),
        hess_yx=lambda x, y: np.array([[1.0]]),
        hess_yy=lambda x, y: np.array([[-1.0]]),
    )
    if variant == "ineq":
        problem = MinimaxProblem(
            n_ineq=1,
            ineq=lambda x, y: np.array([x[0] + y[0] - 1.0]),
            ineq_jac_x=lambda x, y: np.array([[1.0]]),
            ineq_jac_y=lambda x, y: np.array([[1.0]]),
            name="minimax",
            **common,
        )
        dims = {"n_x": 1, "n_y": 1, "m": 1, "q": 0}
        z0 = [1.0, -1.0, 0.5]
        name = "minimax"
    elif variant == "eq":
        problem = MinimaxProblem(
            eq_matrix_x=np.array([[1.0]]),
            eq_matrix_y=np.array([[1.0]]),
            eq_rhs=np.array([2.0]),
            name="minimax-eq",
            **common,
        )
        dims = {"n_x": 1, "n_y": 1, "m": 0, "q": 1}
        z0 = [1.0, -1.0, 0.5]
        name = "minimax-eq"
    else:
        raise ConstructionError(f"unknown minimax variant {variant!r}")
    spec = BenchmarkSpec(
        name=name,
        encoding="minimax",
        dims=dims,
        params={"variant": variant, "smoothing": float(eps)},
        z0=z0,
        oracle="saddle-direct",
        notes="strongly convex in x, strongly concave in y",
    )
    return problem, spec


# ---------------------------------------------------------------------------
# registry


def _make_logsumexp(eps):
    problem, spec = build_logsumexp()
    return encode_unconstrained(problem), spec


def _make_sphere(eps):
    problem, spec = build_sphere()
    return encode_unconstrained(problem), spec


def _make_boundqp(eps):
    problem, spec = build_boundqp(eps=eps or 1e-6)
    return encode_constrained_fb(problem), spec


def _make_boundqp_exact(eps):
    problem, spec = build_boundqp()
    spec = BenchmarkSpec(**{
        **spec.to_dict(),
        "name": "boundqp-exact",
        "encoding": "kkt-exact",
        "params": {},
        "notes": "exact complementarity rows (no smoothing); pair with hgd only",
    })
    return encode_constrained_exact(problem), spec


def _make_num(eps):
    problem, spec = build_num(eps=eps or 1e-6)
    return encode_constrained_fb(problem), spec


def _make_cournot(eps):
    problem, spec = build_cournot(eps=eps or 1e-6)
    return encode_gne(problem, eps=eps or 1e-6), spec


def _make_minimax(eps):
    problem, spec = build_minimax_toy("ineq", eps=eps or 1e-6)
    return encode_minimax(problem, eps=eps or 1e-6), spec


def _make_minimax_eq(eps):
    problem, spec = build_minimax_toy("eq", eps=eps or 1e-6)
    return encode_minimax(problem, eps=eps or 1e-6), spec


_REGISTRY = {
    "logsumexp": _make_logsumexp,
    "sphere": _make_sphere,
    "boundqp": _make_boundqp,
    "boundqp-exact": _make_boundqp_exact,
    "num": _make_num,
    "cournot": _make_cournot,
    "minimax": _make_minimax,
    "minimax-eq": _make_minimax_eq,
}


def available_problems() -> List[str]:
    return sorted(_REGISTRY)


def build_problem(
    name: str, eps: Optional[float] = None
) -> Tuple[StationarityModel, BenchmarkSpec]:
    """Build a registered benchmark model; eps overrides the smoothing."""
    try:
        maker = _REGISTRY[name]
    except KeyError:
        raise ConstructionError(
            f"unknown problem {name!r}; available: {available_problems()}"
        ) from None
    return maker(eps)


# ---------------------------------------------------------------------------
# oracles


def solve_affine_stationarity(matrix: Array, offset: Array) -> Array:
    """Solve the square affine system matrix @ z + offset = 0 directly."""
    matrix = np.asarray(matrix, dtype=float)
    offset = np.asarray(offset, dtype=float)
    try:
        z = np.linalg.solve(matrix, -offset)
    except np.linalg.LinAlgError as exc:
        raise OracleFailure(f"affine stationarity system is singular ({exc})") from exc
    residual = np.linalg.norm(matrix @ z + offset)
    if not np.isfinite(residual) or residual > 1e-8 * (1.0 + np.linalg.norm(offset)):
        raise OracleFailure(
            f"affine stationarity solve left residual {residual:.3e} (ill-conditioned)"
        )
    return z


@dataclass(frozen=True)
class AffineKKT:
    """Affine optimality data: stationarity(x) = H x + h, G x <= d, A x = b."""

    stat_matrix: Array
    stat_offset: Array
    ineq_matrix: Array
    ineq_rhs: Array
    eq_matrix: Optional[Array] = None
    eq_rhs: Optional[Array] = None

    @property
    def dim(self) -> int:
        return self.stat_matrix.shape[0]

    @property
    def n_ineq(self) -> int:
        return self.ineq_matrix.shape[0]

    @property
    def n_eq(self) -> int:
        return 0 if self.eq_matrix is None else self.eq_matrix.shape[0]


def oracle_kkt_affine(data: AffineKKT, active=()) -> Array:
    """Solve the KKT equations with the given inequality rows held active.

    Returns z = (x, lam, mu) with zero multipliers on inactive rows.
    Raises OracleFailure when the linear system is singular.
    """
    active = sorted(set(int(i) for i in active))
    n, m, q = data.dim, data.n_ineq, data.n_eq
    k = len(active)
    size = n + k + q
    mat = np.zeros((size, size))
    rhs = np.zeros(size)
    mat[:n, :n] = data.stat_matrix
    rhs[:n] = -data.stat_offset
    if k:
        g_active = data.ineq_matrix[active]
        mat[:n, n : n + k] = g_active.T
        mat[n : n + k, :n] = g_active
        rhs[n : n + k] = data.ineq_rhs[active]
    if q:
        mat[:n, n + k :] = data.eq_matrix.T
        mat[n + k :, :n] = data.eq_matrix
        rhs[n + k :] = data.eq_rhs
    try:
        sol = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise OracleFailure(f"KKT system singular for active set {active}") from exc
    residual = np.linalg.norm(mat @ sol - rhs)
    if not np.isfinite(residual) or residual > 1e-8 * (1.0 + np.linalg.norm(rhs)):
        raise OracleFailure(
            f"KKT solve for active set {active} left residual {residual:.3e}"
        )
    lam = np.zeros(m)
    lam[active] = sol[n : n + k]
    return np.concatenate([sol[:n], lam, sol[n + k :]])


def oracle_active_set(data: AffineKKT, feas_tol: float = 1e-9) -> Array:
    """Enumerate every active set and return the unique feasible survivor.

    A candidate survives when G x <= d + tol and all multipliers are
    >= -tol.  Survivors are deduplicated as points; zero or several
    distinct survivors raise OracleAmbiguous (a modeling error).
    """
    if data.n_ineq > 16:
        raise ConstructionError(
            f"enumeration over {data.n_ineq} inequalities is unreasonable (max 16)"
        )
    n, m = data.dim, data.n_ineq
    survivors: List[Array] = []
    for r in range(m + 1):
        for active in itertools.combinations(range(m), r):
            try:
                z = oracle_kkt_affine(data, active)
            except OracleFailure:
                continue
            x, lam = z[:n], z[n : n + m]
            if np.any(data.ineq_matrix @ x - data.ineq_rhs > feas_tol):
                continue
            if np.any(lam < -feas_tol):
                continue
            if not any(np.allclose(z, s, atol=1e-8) for s in survivors):
                survivors.append(z)
    if len(survivors) != 1:
        raise OracleAmbiguous(
            f"active-set enumeration found {len(survivors)} distinct candidates"
        )
    return survivors[0]


def boundqp_affine_kkt() -> AffineKKT:
    return AffineKKT(
        stat_matrix=np.eye(2),
        stat_offset=np.zeros(2),
        ineq_matrix=np.array([[-1.0, 0.0]]),
        ineq_rhs=np.array([-1.0]),
    )


def cournot_affine_kkt() -> AffineKKT:
    problem, _ = build_cournot()
    zero = np.zeros(problem.dim)
    return AffineKKT(
        stat_matrix=problem.pseudogradient_jac(zero),
        stat_offset=problem.pseudogradient(zero),
        ineq_matrix=problem.ineq_jac(zero),
        ineq_rhs=-problem.ineq(zero),
        eq_matrix=problem.eq_matrix,
        eq_rhs=problem.eq_rhs,
    )


def minimax_toy_vpoint(variant: str = "ineq") -> Array:
    """Saddle KKT point of the toy problem by direct linear solve.

    variant "ineq" treats the coupled constraint as inactive (which it is
    at the saddle) and returns (x, y, lam) with lam = 0; variant "eq"
    solves the 3x3 equality system for (x, y, mu).
    """
    if variant == "ineq":
        xy = solve_affine_stationarity(
            np.array([[1.0, 1.0], [-1.0, 1.0]]), np.zeros(2)
        )
        return np.array([xy[0], xy[1], 0.0])
    if variant == "eq":
        mat = np.array([[1.0, 1.0, 1.0], [-1.0, 1.0, 1.0], [1.0, 1.0, 0.0]])
        return solve_affine_stationarity(mat, np.array([0.0, 0.0, -2.0]))
    raise ConstructionError(f"unknown minimax variant {variant!r}")


def num_optimum(routing=None, capacity=None, weights=None) -> Tuple[Array, Array]:
    """Closed-form optimum of a single fully-shared-link rate instance.

    With one link used by every source, the link is saturated at the
    optimum and the multiplier is sum(weights)/capacity, giving rates
    x_j = weights_j / multiplier.
    """
    routing = np.asarray([[1.0, 1.0]] if routing is None else routing, dtype=float)
    capacity = np.asarray([1.0] if capacity is None else capacity, dtype=float)
    weights = np.asarray(
        [1.0] * routing.shape[1] if weights is None else weights, dtype=float
    )
    if routing.shape[0] != 1 or not np.all(routing == 1.0):
        raise OracleFailure(
            "closed-form optimum covers only one link shared by every source"
        )
    lam = float(weights.sum() / capacity[0])
    return weights / lam, np.array([lam])
