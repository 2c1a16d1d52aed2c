import numpy as np
import pytest

from olfkit import (
    ConvergedAlready,
    ExponentialLaw,
    FiniteTimeLaw,
    FixedTimeLaw,
    GradientDynamics,
    HessianGradientDynamics,
    NewtonDynamics,
    PrescribedTimeLaw,
    SingularityEncountered,
    StationarityModel,
    UnsupportedRealization,
    build_cournot,
    build_logsumexp,
    build_boundqp,
    encode_constrained_exact,
    encode_gne,
    encode_unconstrained,
    gd_field,
    hgd_field,
    layout,
    make_realization,
    nd_field,
)


def quadratic_model(mat, offset=None):
    mat = np.asarray(mat, dtype=float)
    n = mat.shape[0]
    offset = np.zeros(n) if offset is None else np.asarray(offset, dtype=float)
    return StationarityModel(
        name="quadratic",
        state_layout=layout(("x", n, "primal-x")),
        residual_layout=layout(("stat", n, "stationarity")),
        fun=lambda z: mat @ z - offset,
        jac=lambda z: mat,
    )


LAWS = [
    ExponentialLaw(rate=1.0),
    FiniteTimeLaw(gain=1.0, exponent=0.5),
    FixedTimeLaw(gain_lo=1.0, gain_hi=1.0, exponent_lo=0.5, exponent_hi=2.0),
    PrescribedTimeLaw(gain=3.0, horizon=10.0),
]


class TestHessianGradient:
    def test_identity_bowl_direct(self):
        model = quadratic_model(np.eye(2))
        u = hgd_field(model, ExponentialLaw(rate=1.0), np.array([1.0, 0.0]))
        np.testing.assert_allclose(u, [-0.5, 0.0], atol=1e-15)

    def test_enforces_equality_everywhere(self):
        problem, _ = build_logsumexp(5)
        model = encode_unconstrained(problem)
        rng = np.random.default_rng(1)
        for law in LAWS:
            for _ in range(5):
                z = rng.uniform(-2, 2, size=5)
                t = rng.uniform(0.0, 5.0)
                u = hgd_field(model, law, z, t)
                v = model.olf_value(z)
                sigma = law.sigma(v, t)
                lhs = float(model.olf_gradient(z) @ u)
                assert abs(lhs + sigma) <= 1e-9 * max(1.0, sigma)

    def test_direction_is_hessian_gradient_product(self):
        problem, _ = build_logsumexp(50)
        model = encode_unconstrained(problem)
        z = np.ones(50)
        u = hgd_field(model, ExponentialLaw(rate=1.0), z)
        w = problem.hess(z) @ problem.grad(z)  # assembled independently
        cosine = float(u @ w) / (np.linalg.norm(u) * np.linalg.norm(w))
        assert cosine == pytest.approx(-1.0, abs=1e-12)

    def test_singularity_reported(self):
        # S(z) = 1 + z^2 has grad V = 0 at z = 0 while S = 1
        model = StationarityModel(
            name="plateau",
            state_layout=layout(("x", 1, "primal-x")),
            residual_layout=layout(("stat", 1, "stationarity")),
            fun=lambda z: np.array([1.0 + z[0] ** 2]),
            jac=lambda z: np.array([[2.0 * z[0]]]),
        )
        with pytest.raises(SingularityEncountered):
            hgd_field(model, ExponentialLaw(rate=1.0), np.array([0.0]))

    def test_floor_signals_convergence(self):
        model = quadratic_model(np.eye(1))
        with pytest.raises(ConvergedAlready):
            hgd_field(model, ExponentialLaw(rate=1.0), np.array([1e-16]))


class TestNewton:
    def test_scaled_bowl_direct(self):
        model = quadratic_model(2.0 * np.eye(2))
        u = nd_field(model, ExponentialLaw(rate=2.0), np.array([1.0, 0.0]))
        np.testing.assert_allclose(u, [-1.0, 0.0], atol=1e-14)

    def test_reduces_to_scaled_newton_direction(self):
        rng = np.random.default_rng(2)
        base = rng.normal(size=(4, 4))
        mat = base.T @ base + np.eye(4)
        offset = rng.normal(size=4)
        model = quadratic_model(mat, offset)
        c = 1.7
        x = rng.normal(size=4)
        u = nd_field(model, ExponentialLaw(rate=c), x)
        expected = -(c / 2.0) * (x - np.linalg.solve(mat, offset))
        np.testing.assert_allclose(u, expected, rtol=1e-12)

    def test_enforces_equality(self):
        problem, _ = build_logsumexp(5)
        model = encode_unconstrained(problem)
        rng = np.random.default_rng(3)
        for law in LAWS:
            z = rng.uniform(-1, 1, size=5)
            u = nd_field(model, law, z, 0.5)
            v = model.olf_value(z)
            sigma = law.sigma(v, 0.5)
            assert abs(float(model.olf_gradient(z) @ u) + sigma) <= 1e-10 * max(1.0, sigma)

    def test_singular_jacobian_reported(self):
        from olfkit import JacobianSingular

        model = quadratic_model(np.zeros((2, 2)), np.array([-1.0, 0.0]))
        with pytest.raises(JacobianSingular):
            nd_field(model, ExponentialLaw(rate=1.0), np.zeros(2))

    def test_rejects_nonsquare_encoding(self):
        problem, _ = build_boundqp()
        model = encode_constrained_exact(problem)
        with pytest.raises(UnsupportedRealization):
            nd_field(model, ExponentialLaw(rate=1.0), np.array([2.0, 0.5, 0.5]))


class TestGradient:
    def test_identity_bowl_direct(self):
        model = quadratic_model(np.eye(2))
        u = gd_field(model, ExponentialLaw(rate=2.0), np.array([1.0, 0.0]), m=1.0)
        np.testing.assert_allclose(u, [-1.0, 0.0], atol=1e-15)

    def test_quadratic_form_bound(self):
        rng = np.random.default_rng(4)
        base = rng.normal(size=(5, 5))
        m = 0.7
        mat = base.T @ base + m * np.eye(5)
        model = quadratic_model(mat)
        for _ in range(10):
            x = rng.normal(size=5)
            s = model.stationarity(x)
            assert float(s @ (mat @ s)) >= m * float(s @ s) - 1e-12

    def test_one_sided_decay_on_logsumexp(self):
        problem, _ = build_logsumexp(8)
        model = encode_unconstrained(problem)
        rng = np.random.default_rng(5)
        for law in LAWS:
            z = rng.uniform(-1, 1, size=8)
            u = gd_field(model, law, z, 0.2, m=1.0)
            sigma = law.sigma(model.olf_value(z), 0.2)
            assert float(model.olf_gradient(z) @ u) + sigma <= 1e-9 * max(1.0, sigma)

    def test_rejects_nonsquare_encoding(self):
        problem, _ = build_boundqp()
        model = encode_constrained_exact(problem)
        with pytest.raises(UnsupportedRealization):
            gd_field(model, ExponentialLaw(rate=1.0), np.array([2.0, 0.5, 0.5]), m=1.0)

    def test_needs_positive_constant(self):
        with pytest.raises(ValueError):
            GradientDynamics(monotone_bound=0.0)
        with pytest.raises(ValueError, match="monotonicity constant"):
            make_realization("gd")


class TestStructuralProperties:
    def test_skew_part_contributes_nothing(self):
        problem, _ = build_cournot()
        model = encode_gne(problem)
        rng = np.random.default_rng(6)
        for _ in range(10):
            z = rng.uniform(-2, 2, size=19)
            s = model.stationarity(z)
            jac = model.jacobian(z)
            skew = 0.5 * (jac - jac.T)
            scale = float(s @ s) * np.linalg.norm(jac)
            assert abs(float(s @ (skew @ s)) - 0.5 * float(s @ (jac @ s) - s @ (jac.T @ s))) <= 1e-9 * max(1.0, scale)
            assert abs(float(s @ (skew @ s))) <= 1e-12 * max(1.0, scale)

    def test_doubling_the_rate_doubles_the_field(self):
        problem, _ = build_logsumexp(6)
        model = encode_unconstrained(problem)
        z = np.linspace(-1, 1, 6)
        for maker in (hgd_field, nd_field):
            u1 = maker(model, ExponentialLaw(rate=1.0), z)
            u2 = maker(model, ExponentialLaw(rate=2.0), z)
            np.testing.assert_allclose(u2, 2.0 * u1, rtol=1e-13)
        u1 = gd_field(model, ExponentialLaw(rate=1.0), z, m=1.0)
        u2 = gd_field(model, ExponentialLaw(rate=2.0), z, m=1.0)
        np.testing.assert_allclose(u2, 2.0 * u1, rtol=1e-13)

    def test_guard_validation(self):
        with pytest.raises(ValueError):
            HessianGradientDynamics(tol_sing=0.0)
        with pytest.raises(ValueError):
            NewtonDynamics(v_floor=-1.0)
        with pytest.raises(ValueError, match="unknown dynamics"):
            make_realization("momentum")
