import numpy as np
import pytest

from posecast import (
    ArModel,
    InvalidInputError,
    RankDeficiencyError,
    ar_predict,
    bic_order_select,
    fit_ar_batch,
    lagged_design,
)


class TestLaggedDesign:
    def test_rows_are_reversed_lags(self):
        y = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        phi, targets = lagged_design(y, 2)
        assert np.array_equal(targets, [3.0, 4.0, 5.0])
        assert np.array_equal(phi, [[2.0, 1.0], [3.0, 2.0], [4.0, 3.0]])

    def test_order_zero(self):
        phi, targets = lagged_design([1.0, 2.0], 0)
        assert phi.shape == (2, 0)
        assert np.array_equal(targets, [1.0, 2.0])

    def test_too_short(self):
        with pytest.raises(InvalidInputError):
            lagged_design([1.0, 2.0], 2)


class TestFitArBatch:
    def test_zero_series(self):
        model = fit_ar_batch(np.zeros(100), 2, ridge=1e-6)
        assert np.array_equal(model.coefficients, [0.0, 0.0])
        assert model.innovation_variance == 0.0

    def test_ar1_recovery(self, ar_walk):
        y = ar_walk([0.9], 0.1, 10_000, seed=3)
        model = fit_ar_batch(y, 1, forgetting=1.0)
        assert abs(model.coefficients[0] - 0.9) < 0.02
        assert abs(model.innovation_variance - 0.01) < 0.002

    def test_unweighted_equals_lstsq_oracle(self, rng):
        y = rng.normal(size=400)
        model = fit_ar_batch(y, 3, forgetting=1.0, ridge=0.0)
        # independent oracle: raw design + lstsq
        phi = np.stack([y[2:-1], y[1:-2], y[0:-3]], axis=1)
        oracle = np.linalg.lstsq(phi, y[3:], rcond=None)[0]
        assert np.abs(model.coefficients - oracle).max() < 1e-8

    def test_weighted_fit_matches_explicit_normal_equations(self, rng):
        y = rng.normal(size=120)
        gamma = 0.95
        model = fit_ar_batch(y, 2, forgetting=gamma, ridge=1e-3)
        phi, targets = lagged_design(y, 2)
        n = targets.size
        A = 1e-3 * np.eye(2)
        b = np.zeros(2)
        for j in range(n):
            w = gamma ** (n - 1 - j)
            A += w * np.outer(phi[j], phi[j])
            b += w * phi[j] * targets[j]
        oracle = np.linalg.solve(A, b)
        assert np.abs(model.coefficients - oracle).max() < 1e-10

    def test_multi_series_pooling(self, rng):
        a = rng.normal(size=60)
        b = rng.normal(size=80)
        model = fit_ar_batch([a, b], 1, forgetting=1.0, ridge=0.0)
        phi = np.concatenate([a[:-1], b[:-1]])[:, None]
        tgt = np.concatenate([a[1:], b[1:]])
        oracle = np.linalg.lstsq(phi, tgt, rcond=None)[0]
        assert np.abs(model.coefficients - oracle).max() < 1e-10

    def test_order_zero_variance(self, rng):
        y = rng.normal(size=500)
        model = fit_ar_batch(y, 0)
        assert model.order == 0
        assert np.isclose(model.innovation_variance, np.mean(y**2))

    def test_singular_without_ridge(self):
        with pytest.raises(RankDeficiencyError, match="ridge"):
            fit_ar_batch(np.zeros(50), 2, ridge=0.0)

    def test_bad_forgetting(self):
        with pytest.raises(InvalidInputError):
            fit_ar_batch(np.ones(10), 1, forgetting=0.0)

    def test_bad_ridge(self):
        with pytest.raises(InvalidInputError):
            fit_ar_batch(np.ones(10), 1, ridge=-1.0)

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidInputError):
            fit_ar_batch([1.0, np.nan, 2.0], 1)


class TestArPredict:
    def test_ar1_geometric_decay(self):
        model = ArModel(order=1, coefficients=[0.9])
        assert np.allclose(ar_predict(model, [1.0], 3), [0.9, 0.81, 0.729])

    def test_zero_coefficients(self):
        model = ArModel(order=1, coefficients=[0.0])
        assert np.array_equal(ar_predict(model, [5.0], 4), np.zeros(4))

    def test_ar2_hand_recursion(self):
        model = ArModel(order=2, coefficients=[0.5, 0.25])
        # history oldest-first: (y_{t-2}, y_{t-1}) = (1, 1)
        assert np.allclose(ar_predict(model, [1.0, 1.0], 2), [0.75, 0.625])

    def test_one_step_equals_linear_prediction(self, rng):
        coeffs = rng.normal(size=4)
        model = ArModel(order=4, coefficients=coeffs)
        hist = rng.normal(size=7)
        expected = float(coeffs @ hist[-1:-5:-1])
        assert ar_predict(model, hist, 1)[0] == expected

    def test_order_zero_forecast(self):
        model = ArModel(order=0, coefficients=[])
        assert np.array_equal(ar_predict(model, [], 3), np.zeros(3))

    def test_short_history_rejected(self):
        model = ArModel(order=3, coefficients=[0.1, 0.1, 0.1])
        with pytest.raises(InvalidInputError):
            ar_predict(model, [1.0, 2.0], 2)

    def test_unstable_allowed(self):
        model = ArModel(order=1, coefficients=[1.5])
        out = ar_predict(model, [1.0], 10)
        assert out[-1] == pytest.approx(1.5**10)


class TestBicOrderSelect:
    def test_white_noise_prefers_order_zero(self):
        hits = 0
        for seed in range(20):
            y = np.random.default_rng(seed).normal(size=5000)
            if bic_order_select(y, 5).order == 0:
                hits += 1
        assert hits >= 18

    def test_ar2_recovered(self, ar_walk):
        hits = 0
        for seed in range(20):
            y = ar_walk([1.2, -0.4], 0.1, 5000, seed=seed)
            if bic_order_select(y, 5).order == 2:
                hits += 1
        assert hits >= 18

    def test_deterministic_series_flags_smallest_zero_order(self):
        # noise-free AR(1): order 1 already fits exactly, higher orders too
        y = 0.8 ** np.arange(60)
        sel = bic_order_select(y, 4)
        assert sel.order == 1
        assert sel.deterministic

    def test_all_zero_series(self):
        sel = bic_order_select(np.zeros(50), 3)
        assert sel.order == 0
        assert sel.deterministic

    def test_constant_series_is_deterministic_at_order_one(self):
        sel = bic_order_select(np.full(50, 2.5), 3)
        assert sel.order == 1
        assert sel.deterministic

    def test_scores_exposed_and_common_sample(self, rng):
        y = rng.normal(size=300)
        sel = bic_order_select(y, 3)
        assert len(sel.residual_variances) == 4
        assert not sel.deterministic
        assert len(sel.scores) == 4

    def test_too_short_rejected(self):
        with pytest.raises(InvalidInputError):
            bic_order_select(np.ones(4), 5)


class TestArModelSerialization:
    def test_json_round_trip(self, tmp_path):
        model = ArModel(order=2, coefficients=[0.5, -0.2], innovation_variance=0.01)
        path = tmp_path / "m.json"
        model.save(path)
        loaded = ArModel.load(path)
        assert loaded.order == 2
        assert np.array_equal(loaded.coefficients, model.coefficients)
        assert loaded.innovation_variance == model.innovation_variance

    def test_order_coefficient_mismatch(self):
        with pytest.raises(InvalidInputError):
            ArModel(order=2, coefficients=[0.5])
