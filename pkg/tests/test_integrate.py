import numpy as np
import pytest

from olfkit import (
    ExponentialLaw,
    FiniteTimeLaw,
    FixedTimeLaw,
    PrescribedTimeLaw,
    SolveConfig,
    SolveStatus,
    StationarityModel,
    layout,
    make_law,
    make_realization,
    solve,
    verify_decay,
    verify_trajectory,
)
from olfkit.runner import run_case


def sphere_model(n=2):
    return StationarityModel(
        name="sphere",
        state_layout=layout(("x", n, "primal-x")),
        residual_layout=layout(("stat", n, "stationarity")),
        fun=lambda z: z.copy(),
        jac=lambda z: np.eye(n),
        gd_constant=1.0,
    )


class TestClosedForm:
    def test_gd_exponential_matches_exact_flow(self):
        # gd + exp(c=2, m=1) on the identity bowl closes to dx/dt = -x
        config = SolveConfig(
            law=ExponentialLaw(rate=2.0),
            realization=make_realization("gd", monotone_bound=1.0),
        )
        traj, report = solve(sphere_model(), config, np.array([1.0, 0.0]))
        assert report.status is SolveStatus.CONVERGED
        exact = np.exp(-traj.t)
        rel = np.abs(traj.norm_s - exact) / exact
        assert rel.max() <= 1e-6
        for i in range(1, len(traj)):
            x_exact = np.array([np.exp(-traj.t[i]), 0.0])
            assert np.linalg.norm(traj.z[i] - x_exact) <= 1e-6 * np.linalg.norm(x_exact)

    def test_stop_time_matches_crossing(self):
        config = SolveConfig(
            law=ExponentialLaw(rate=2.0),
            realization=make_realization("gd", monotone_bound=1.0),
        )
        _, report = solve(sphere_model(), config, np.array([1.0, 0.0]))
        t_star = np.log(1e6)  # ||x(t)|| = e^-t hits 1e-6
        assert abs(report.stop_time - t_star) <= 1e-6 * t_star


class TestStopConditions:
    def test_settling_bounds_hold_with_zero_slack(self):
        for law in (
            FiniteTimeLaw(gain=1.0, exponent=0.5),
            FixedTimeLaw(gain_lo=1.0, gain_hi=1.0, exponent_lo=0.5, exponent_hi=2.0),
        ):
            config = SolveConfig(law=law, realization=make_realization("hgd"))
            traj, report = solve(sphere_model(), config, np.array([3.0, -1.0]))
            assert report.status is SolveStatus.CONVERGED
            assert report.stop_time <= report.settling_bound
            assert report.within_bound is True

    def test_prescribed_horizon_clip(self):
        law = PrescribedTimeLaw(gain=6.0, horizon=2.0)
        config = SolveConfig(law=law, realization=make_realization("hgd"))
        traj, report = solve(sphere_model(), config, np.array([5.0, 2.0]))
        assert report.status is SolveStatus.CONVERGED
        assert report.stop_time <= 2.0 * (1.0 - 1e-3)
        assert report.v_final <= 1e-6 * report.v_initial

    def test_weak_prescribed_gain_reaches_clip_not_tolerance(self):
        # v(clip)/v0 = clip_fraction**gain = 1e-7.5 beats 1e-6 but not the
        # stop tolerance on ||S||, so the run ends at the clip time
        law = PrescribedTimeLaw(gain=2.5, horizon=2.0)
        config = SolveConfig(law=law, realization=make_realization("hgd"))
        traj, report = solve(sphere_model(), config, np.array([5.0, 2.0]))
        assert report.status is SolveStatus.HORIZON_REACHED
        assert report.stop_time == pytest.approx(2.0 * (1.0 - 1e-3))
        assert report.v_final <= 1e-6 * report.v_initial

    def test_horizon_reached_on_short_budget(self):
        config = SolveConfig(
            law=ExponentialLaw(rate=1.0),
            realization=make_realization("hgd"),
            max_time=1.0,
        )
        _, report = solve(sphere_model(), config, np.array([1.0, 0.0]))
        assert report.status is SolveStatus.HORIZON_REACHED
        assert report.stop_time == pytest.approx(1.0)

    def test_start_inside_tolerance_converges_immediately(self):
        config = SolveConfig(
            law=ExponentialLaw(rate=1.0), realization=make_realization("hgd")
        )
        traj, report = solve(sphere_model(), config, np.array([1e-8, 0.0]))
        assert report.status is SolveStatus.CONVERGED
        assert report.stop_time == 0.0
        assert len(traj) == 1

    def test_singular_stall_reported(self):
        model = StationarityModel(
            name="plateau",
            state_layout=layout(("x", 1, "primal-x")),
            residual_layout=layout(("stat", 1, "stationarity")),
            fun=lambda z: np.array([1.0 + z[0] ** 2]),
            jac=lambda z: np.array([[2.0 * z[0]]]),
        )
        config = SolveConfig(
            law=ExponentialLaw(rate=1.0), realization=make_realization("hgd")
        )
        _, report = solve(model, config, np.array([0.0]))
        assert report.status is SolveStatus.SINGULAR_STALL
        assert "grad V" in report.detail or "gradient" in report.detail.lower()

    def test_step_failure_when_field_turns_undefined(self):
        # residual target sits beyond a region where the field returns nan
        def fun(z):
            return z - 2.0

        def jac(z):
            if z[0] > 1.0:
                return np.array([[np.nan]])
            return np.eye(1)

        model = StationarityModel(
            name="wall",
            state_layout=layout(("x", 1, "primal-x")),
            residual_layout=layout(("stat", 1, "stationarity")),
            fun=fun,
            jac=jac,
        )
        config = SolveConfig(
            law=ExponentialLaw(rate=1.0), realization=make_realization("hgd"),
            max_time=50.0,
        )
        _, report = solve(model, config, np.array([0.5]))
        assert report.status is SolveStatus.STEP_FAILURE

    def test_domain_violation_status(self):
        from olfkit import DomainViolation

        # the domain edge sits between the start and the residual zero
        def guard(z):
            if z[0] > 1.0:
                raise DomainViolation("left the allowed region", z=z)

        def fun(z):
            guard(z)
            return z - 2.0

        def jac(z):
            guard(z)
            return np.eye(1)

        model = StationarityModel(
            name="fence",
            state_layout=layout(("x", 1, "primal-x")),
            residual_layout=layout(("stat", 1, "stationarity")),
            fun=fun,
            jac=jac,
        )
        config = SolveConfig(
            law=ExponentialLaw(rate=1.0), realization=make_realization("hgd"),
            max_time=50.0,
        )
        _, report = solve(model, config, np.array([0.5]))
        assert report.status is SolveStatus.DOMAIN_VIOLATION
        assert "region" in report.detail


class TestTrajectoryContract:
    def test_times_increase_and_v_decreases(self):
        for law_kind in ("exp", "ft", "fxt", "pt"):
            result = run_case("logsumexp", "hgd", law_kind, samples=200)
            t, v = result.trajectory.t, result.trajectory.v
            assert np.all(np.diff(t) > 0)
            assert np.all(np.diff(v) <= 1e-12 * v[0])
            assert result.trajectory.norm_s[-1] <= result.config.tol_stat

    def test_sample_budget_respected(self):
        result = run_case("logsumexp", "hgd", "exp", samples=50)
        assert 2 <= len(result.trajectory) <= 50

    def test_exponential_rate_regression(self):
        for dyn in ("hgd", "nd"):
            result = run_case("logsumexp", dyn, "exp")
            t, v = result.trajectory.t, result.trajectory.v
            lo, hi = int(0.1 * len(t)), int(0.9 * len(t))
            slope = np.polyfit(t[lo:hi], np.log(v[lo:hi]), 1)[0]
            assert -1.05 <= slope <= -0.95
        result = run_case("logsumexp", "gd", "exp")
        t, v = result.trajectory.t, result.trajectory.v
        lo, hi = int(0.1 * len(t)), int(0.9 * len(t))
        slope = np.polyfit(t[lo:hi], np.log(v[lo:hi]), 1)[0]
        assert slope <= -0.95

    def test_determinism(self):
        a = run_case("num", "hgd", "ft")
        b = run_case("num", "hgd", "ft")
        np.testing.assert_array_equal(a.trajectory.z, b.trajectory.z)
        np.testing.assert_array_equal(a.trajectory.t, b.trajectory.t)
        assert a.report.stop_time == b.report.stop_time


class TestNonlinearConstraintFlow:
    def test_ball_constrained_qp_reaches_hand_derived_kkt(self):
        # min ||x||^2/2 s.t. ||x - (2,0)||^2 <= 1: the bound is active at
        # x = (1, 0), where stationarity gives multiplier 1/2
        from olfkit import encode_constrained_fb
        from test_encodings import ball_constrained_qp

        model = encode_constrained_fb(ball_constrained_qp())
        config = SolveConfig(
            law=FixedTimeLaw(gain_lo=1.0, gain_hi=1.0, exponent_lo=0.5, exponent_hi=2.0),
            realization=make_realization("hgd"),
        )
        traj, report = solve(model, config, np.array([3.0, 1.0, 1.0]))
        assert report.status is SolveStatus.CONVERGED
        z = traj.z[-1]
        np.testing.assert_allclose(z[:2], [1.0, 0.0], atol=1e-4)
        assert abs(z[2] - 0.5) <= 1e-4 + 1e-5


class TestVerifyDecay:
    def test_equality_designs_at_rounding_level(self):
        for dyn in ("hgd", "nd"):
            result = run_case("logsumexp", dyn, "exp")
            violation = verify_decay(
                result.model, result.trajectory, result.config.law,
                result.config.realization,
            )
            assert violation <= 1e-9

    def test_gd_one_sided(self):
        result = run_case("logsumexp", "gd", "exp")
        violation = verify_decay(
            result.model, result.trajectory, result.config.law,
            result.config.realization,
        )
        assert violation <= 1e-9

    def test_newton_fixed_time_on_quadratic(self):
        config = SolveConfig(
            law=FixedTimeLaw(gain_lo=1.0, gain_hi=1.0, exponent_lo=0.5, exponent_hi=2.0),
            realization=make_realization("nd"),
        )
        model = sphere_model()
        traj, report = solve(model, config, np.array([2.0, 1.0]))
        assert verify_decay(model, traj, config.law, config.realization) <= 1e-9


class TestVerifyTrajectory:
    def _fresh(self):
        result = run_case("sphere", "gd", "exp", law_params={"c": 2.0})
        return result

    def test_accepts_own_recording(self):
        r = self._fresh()
        out = verify_trajectory(
            r.model, r.config.law, r.config.realization,
            r.trajectory.t, r.trajectory.z,
            v=r.trajectory.v, norm_u=r.trajectory.norm_u, sigma=r.trajectory.sigma,
        )
        assert out.ok and out.max_violation <= 1e-9

    def test_flags_corrupted_value(self):
        r = self._fresh()
        v = r.trajectory.v.copy()
        v[7] *= 1.01
        out = verify_trajectory(
            r.model, r.config.law, r.config.realization,
            r.trajectory.t, r.trajectory.z, v=v,
        )
        assert not out.ok
        assert out.bad_index == 7

    def test_flags_wrong_realization(self):
        r = run_case("logsumexp", "gd", "exp")
        hgd = make_realization("hgd")
        out = verify_trajectory(
            r.model, r.config.law, hgd,
            r.trajectory.t, r.trajectory.z,
            v=r.trajectory.v, norm_u=r.trajectory.norm_u, sigma=r.trajectory.sigma,
        )
        assert not out.ok
        assert any("||u||" in f for f in out.failures)

    def test_flags_wrong_law(self):
        r = self._fresh()
        wrong = make_law("exp", {"c": 3.0})
        out = verify_trajectory(
            r.model, wrong, r.config.realization,
            r.trajectory.t, r.trajectory.z,
            v=r.trajectory.v, norm_u=r.trajectory.norm_u, sigma=r.trajectory.sigma,
        )
        assert not out.ok


class TestConfigValidation:
    def test_bad_tolerances(self):
        law = ExponentialLaw(rate=1.0)
        real = make_realization("hgd")
        with pytest.raises(ValueError):
            SolveConfig(law=law, realization=real, tol_stat=0.0)
        with pytest.raises(ValueError):
            SolveConfig(law=law, realization=real, pt_clip=1.5)
        with pytest.raises(ValueError):
            SolveConfig(law=law, realization=real, samples=1)
