import numpy as np
import pytest

from olfkit import (
    BlockLayout,
    ConstructionError,
    StationarityModel,
    build_logsumexp,
    encode_unconstrained,
    fd_check,
    layout,
)


def affine_model(mat, offset, blocks=None):
    mat = np.asarray(mat, dtype=float)
    offset = np.asarray(offset, dtype=float)
    r, n = mat.shape
    return StationarityModel(
        name="affine",
        state_layout=layout(("x", n, "primal-x")),
        residual_layout=blocks or layout(("stat", r, "stationarity")),
        fun=lambda z: mat @ z + offset,
        jac=lambda z: mat,
    )


class TestBlockLayout:
    def test_slices_and_split(self):
        lay = layout(("x", 2, "primal-x"), ("lam", 1, "ineq-multiplier"))
        assert lay.dim == 3
        assert lay.slice_of("lam") == slice(2, 3)
        parts = lay.split(np.array([1.0, 2.0, 3.0]))
        assert parts["x"].tolist() == [1.0, 2.0]
        assert parts["lam"].tolist() == [3.0]

    def test_zero_sized_blocks_are_dropped(self):
        lay = layout(("x", 2, "primal-x"), ("mu", 0, "eq-multiplier"))
        assert [b.name for b in lay.blocks] == ["x"]

    def test_duplicate_names_rejected(self):
        from olfkit import Block

        with pytest.raises(ConstructionError):
            BlockLayout((Block("x", 1), Block("x", 2)))

    def test_empty_layout_rejected(self):
        with pytest.raises(ConstructionError):
            layout(("x", 0, "primal-x"))


class TestLyapunovValue:
    def test_zero_residual(self):
        model = affine_model(np.eye(2), np.zeros(2))
        assert model.olf_value(np.zeros(2)) == 0.0

    def test_three_four(self):
        # S(z) = (3, 4) constant at z = 0
        model = affine_model(np.zeros((2, 2)), np.array([3.0, 4.0]))
        assert model.olf_value(np.zeros(2)) == pytest.approx(12.5)

    def test_identity_quadratic(self):
        model = affine_model(np.eye(2), np.zeros(2))
        assert model.olf_value(np.array([1.0, 1.0])) == pytest.approx(1.0)

    def test_zero_iff_residual_zero(self):
        model = affine_model(np.eye(2), np.array([-1.0, 0.0]))
        assert model.olf_value(np.array([1.0, 0.0])) == 0.0
        assert model.olf_value(np.array([1.0, 1e-8])) > 0.0


class TestLyapunovGradient:
    def test_identity_hessian_case(self):
        model = affine_model(np.eye(2), np.zeros(2))
        np.testing.assert_allclose(
            model.olf_gradient(np.array([1.0, 0.0])), np.array([1.0, 0.0])
        )

    def test_zero_at_stationary_point(self):
        model = affine_model(np.eye(3), np.zeros(3))
        np.testing.assert_array_equal(model.olf_gradient(np.zeros(3)), np.zeros(3))

    def test_matches_scalar_finite_differences(self):
        # independent oracle: central differences of the scalar V itself
        rng = np.random.default_rng(3)
        base = rng.normal(size=(4, 4))
        mat = base.T @ base + np.eye(4)
        offset = rng.normal(size=4)
        model = affine_model(mat, offset)
        z = rng.normal(size=4)
        grad = model.olf_gradient(z)
        h = 1e-6 * (1.0 + np.max(np.abs(z)))
        fd = np.empty(4)
        for j in range(4):
            zp, zm = z.copy(), z.copy()
            zp[j] += h
            zm[j] -= h
            fd[j] = (model.olf_value(zp) - model.olf_value(zm)) / (2.0 * h)
        assert np.max(np.abs(fd - grad) / (1.0 + np.abs(grad))) <= 1e-5

    def test_logsumexp_gradient_matches_finite_differences(self):
        problem, _ = build_logsumexp(50)
        model = encode_unconstrained(problem)
        z = np.ones(50)
        grad = model.olf_gradient(z)
        h = 1e-6 * (1.0 + 1.0)
        fd = np.empty(50)
        for j in range(50):
            zp, zm = z.copy(), z.copy()
            zp[j] += h
            zm[j] -= h
            fd[j] = (model.olf_value(zp) - model.olf_value(zm)) / (2.0 * h)
        assert np.max(np.abs(fd - grad) / (1.0 + np.abs(grad))) <= 1e-5


class TestFdCheck:
    def test_affine_maps_are_exact(self):
        rng = np.random.default_rng(11)
        model = affine_model(rng.normal(size=(3, 3)), rng.normal(size=3))
        assert fd_check(model, rng.normal(size=3)) <= 1e-9

    def test_logsumexp_hessian(self):
        problem, _ = build_logsumexp(50)
        model = encode_unconstrained(problem)
        assert fd_check(model, np.ones(50)) <= 1e-5

    def test_rejects_nonpositive_step(self):
        model = affine_model(np.eye(2), np.zeros(2))
        with pytest.raises(ValueError):
            fd_check(model, np.zeros(2), step=0.0)


class TestBlockResiduals:
    def test_two_block_example(self):
        blocks = layout(("stat", 2, "stationarity"), ("eq", 2, "equality"))
        model = affine_model(np.zeros((4, 4)), np.array([3.0, 0.0, 4.0, 0.0]), blocks)
        z = np.zeros(4)
        res = model.block_residuals(z)
        assert res == {"stat": 3.0, "eq": 4.0}
        s_norm = np.sqrt(2.0 * model.olf_value(z))
        assert max(res.values()) <= s_norm == pytest.approx(5.0)

    def test_all_blocks_zero_at_solution(self):
        blocks = layout(("stat", 1, "stationarity"), ("eq", 1, "equality"))
        model = affine_model(np.eye(2), np.zeros(2), blocks)
        assert model.block_residuals(np.zeros(2)) == {"stat": 0.0, "eq": 0.0}

    def test_stacked_norm_dominates_blocks(self):
        rng = np.random.default_rng(5)
        blocks = layout(("stat", 2, "stationarity"), ("ineq", 3, "complementarity"))
        model = affine_model(rng.normal(size=(5, 5)), rng.normal(size=5), blocks)
        for _ in range(20):
            z = rng.normal(size=5)
            res = model.block_residuals(z)
            assert max(res.values()) <= np.linalg.norm(model.stationarity(z)) + 1e-15


class TestShapeValidation:
    def test_wrong_state_length(self):
        model = affine_model(np.eye(2), np.zeros(2))
        with pytest.raises(ValueError):
            model.stationarity(np.zeros(3))

    def test_bad_callback_shapes_reported(self):
        model = StationarityModel(
            name="broken",
            state_layout=layout(("x", 2, "primal-x")),
            residual_layout=layout(("stat", 2, "stationarity")),
            fun=lambda z: np.zeros(3),
            jac=lambda z: np.zeros((2, 2)),
        )
        with pytest.raises(ConstructionError):
            model.stationarity(np.zeros(2))
