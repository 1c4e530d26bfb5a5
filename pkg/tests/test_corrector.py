import numpy as np
import pytest

from posecast import InvalidInputError, ResidualCorrector, ar_predict


def ar1_noise(a, sigma, length, seed):
    gen = np.random.default_rng(seed)
    eps = gen.normal(0.0, sigma, size=length)
    r = np.zeros(length)
    for t in range(1, length):
        r[t] = a * r[t - 1] + eps[t]
    return r


class TestColdStartAndPassThrough:
    def test_first_step_passes_base_through(self, rng):
        corr = ResidualCorrector(dims=3)
        base = rng.normal(size=(4, 3))
        out = corr.step(rng.normal(size=3), base)
        assert np.array_equal(out, base)
        assert np.array_equal(corr.last_correction, np.zeros((4, 3)))

    def test_zero_residual_passes_base_through(self):
        corr = ResidualCorrector(dims=2)
        base1 = np.ones((3, 2))
        corr.step(np.zeros(2), base1)
        # observe exactly what the base forecast: residual is zero
        out = corr.step(base1[0], np.full((3, 2), 2.0))
        assert np.array_equal(out, np.full((3, 2), 2.0))

    def test_zero_coefficients_pass_base_through(self, rng):
        corr = ResidualCorrector(dims=2)
        corr.step(rng.normal(size=2), rng.normal(size=(3, 2)))
        # second step: residual exists but no update has happened yet -> alpha = 0
        out_base = rng.normal(size=(3, 2))
        out = corr.step(rng.normal(size=2), out_base)
        assert np.array_equal(out, out_base)
        assert np.array_equal(corr.coefficients, np.zeros((2, 1)))

    def test_base_recoverable_bit_exactly(self):
        trend = 5.0 + np.sin(np.arange(300) / 9.0)
        x = trend + ar1_noise(0.9, 0.1, 300, seed=4)
        corr = ResidualCorrector(dims=1, forgetting=1.0)
        for t in range(260):
            base = trend[t + 1 : t + 6].reshape(5, 1)
            corrected = corr.step(x[t : t + 1], base)
            # always: the input is kept and corrected is exactly its sum with
            # the stored correction
            assert np.array_equal(corr.last_base, base)
            assert np.array_equal(corrected, corr.last_base + corr.last_correction)
            if t >= 100:
                # once corrections sit at data scale, plain subtraction
                # recovers the base bit-exactly too
                assert np.array_equal(corrected - corr.last_correction, base)


class TestCorrectionGain:
    def test_ar1_residuals_one_step_mse(self):
        # base residuals are AR(1)(a, sigma): corrected one-step MSE ~ sigma^2,
        # base one-step MSE ~ sigma^2 / (1 - a^2) (stationary variance oracle)
        a, sigma, T, N = 0.9, 0.1, 5000, 5
        trend = 3.0 * np.sin(2 * np.pi * np.arange(T) / 40.0)
        r = ar1_noise(a, sigma, T, seed=11)
        x = trend + r
        corr = ResidualCorrector(dims=1, order=1, forgetting=1.0)
        base_se, corrected_se = [], []
        for t in range(T - N - 1):
            base = trend[t + 1 : t + 1 + N].reshape(N, 1)
            corrected = corr.step(x[t : t + 1], base)
            if t >= 50:
                base_se.append((base[0, 0] - x[t + 1]) ** 2)
                corrected_se.append((corrected[0, 0] - x[t + 1]) ** 2)
        base_mse = np.mean(base_se)
        corrected_mse = np.mean(corrected_se)
        assert abs(base_mse - sigma**2 / (1 - a**2)) < 0.2 * sigma**2 / (1 - a**2)
        assert abs(corrected_mse - sigma**2) < 0.1 * sigma**2
        assert corrected_mse < 0.4 * base_mse  # >= 60% reduction

    def test_learned_coefficient_near_truth(self):
        a, sigma, T = 0.9, 0.1, 4000
        r = ar1_noise(a, sigma, T, seed=21)
        corr = ResidualCorrector(dims=1, order=1, forgetting=1.0)
        for t in range(T - 2):
            base = np.zeros((1, 1))  # base predicts 0, so residuals are r itself
            corr.step(r[t : t + 1], base)
        assert abs(corr.coefficients[0, 0] - a) < 0.05


class TestCorrectionDecay:
    def test_order1_correction_is_geometric(self):
        corr = ResidualCorrector(dims=1, order=1, forgetting=1.0)
        r = ar1_noise(0.8, 0.2, 200, seed=5)
        for t in range(200):
            corr.step(r[t : t + 1], np.zeros((8, 1)))
        alpha = corr.coefficients[0, 0]
        expected = alpha ** np.arange(1, 9) * corr.last_residual[0]
        assert np.allclose(corr.last_correction[:, 0], expected, rtol=1e-9)
        mags = np.abs(corr.last_correction[:, 0])
        assert np.all(np.diff(mags) <= 1e-15)

    def test_higher_order_uses_multi_step_extrapolation(self):
        corr = ResidualCorrector(dims=1, order=2, forgetting=1.0)
        r = ar1_noise(0.7, 0.3, 300, seed=6)
        for t in range(300):
            corr.step(r[t : t + 1], np.zeros((4, 1)))
        # residual history is (r[298]-r[297], r[299]-r[298]) relative to base 0 rows:
        # base always predicts 0 so residuals are r itself
        state = corr.states[0]
        expected = ar_predict(state, [r[298], r[299]], 4)
        assert np.allclose(corr.last_correction[:, 0], expected)


class TestBookkeeping:
    def test_bounded_residual_memory(self, rng):
        corr = ResidualCorrector(dims=2, order=3)
        for _ in range(50):
            corr.step(rng.normal(size=2), rng.normal(size=(4, 2)))
        assert len(corr._residuals) == 3

    def test_reset(self, rng):
        corr = ResidualCorrector(dims=2)
        for _ in range(10):
            corr.step(rng.normal(size=2), rng.normal(size=(3, 2)))
        corr.reset()
        base = rng.normal(size=(3, 2))
        assert np.array_equal(corr.step(rng.normal(size=2), base), base)

    def test_parameter_count(self):
        assert ResidualCorrector(dims=48, order=1).parameter_count() == 48
        assert ResidualCorrector(dims=10, order=3).parameter_count() == 30

    def test_input_validation(self, rng):
        corr = ResidualCorrector(dims=2)
        with pytest.raises(InvalidInputError):
            corr.step(rng.normal(size=3), rng.normal(size=(3, 2)))
        with pytest.raises(InvalidInputError):
            corr.step(rng.normal(size=2), rng.normal(size=(3, 4)))
        with pytest.raises(InvalidInputError):
            corr.step(np.array([np.nan, 0.0]), rng.normal(size=(3, 2)))
