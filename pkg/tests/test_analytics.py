import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpsketch import (
    ProjectionFamily,
    SketchConfig,
    delta4,
    delta6,
    monte_carlo_validate,
    simulate_estimates,
    variance_alternative_p4,
    variance_alternative_p6,
    variance_basic_p4,
    variance_basic_p6,
    variance_mle_p4,
    variance_subgaussian_p4,
)
from lpsketch.errors import ParameterError
from lpsketch.model import joint_moments


def pair(rng, D=12, nonneg=False):
    x, y = rng.normal(size=D), rng.normal(size=D)
    if nonneg:
        x, y = np.abs(x), np.abs(y)
    return x, y


class TestP4Formulas:
    def test_hand_values(self):
        x, y = [1.0, 0.0], [0.0, 1.0]
        assert variance_basic_p4(x, y, 1) == 4.0
        assert variance_alternative_p4(x, y, 1) == 68.0
        assert delta4(x, y, 1) == -64.0
        assert variance_mle_p4(x, y, 1) == 68.0

    def test_zero_partner(self):
        x = np.random.default_rng(0).normal(size=8)
        zero = np.zeros(8)
        assert variance_basic_p4(x, zero, 4) == 0.0
        assert variance_basic_p6(x, zero, 4) == 0.0

    def test_mle_zero_at_constant_equal_inputs(self):
        # Every term hits Cauchy-Schwarz equality when |x| is constant and y = x.
        x = np.full(10, 1.3)
        assert variance_mle_p4(x, x, 8) == pytest.approx(0.0, abs=1e-8)

    def test_mle_22_term_drops_at_equal_inputs(self):
        # x = y zeroes the (2,2) numerator; the odd-order terms survive.
        x = np.abs(np.random.default_rng(1).normal(size=10))
        M = joint_moments(x, x, 6).M
        assert M[4, 0] * M[0, 4] - M[2, 2] ** 2 == pytest.approx(0.0, abs=1e-8)

    @given(st.integers(0, 10_000))
    @settings(max_examples=200, deadline=None)
    def test_identity_basic_equals_alt_plus_delta(self, seed):
        x, y = pair(np.random.default_rng(seed))
        basic = variance_basic_p4(x, y, 8)
        resid = basic - variance_alternative_p4(x, y, 8) - delta4(x, y, 8)
        assert abs(resid) <= 1e-9 * max(1.0, abs(basic))

    def test_delta4_nonpositive_on_nonnegative_data(self):
        rng = np.random.default_rng(10)
        for _ in range(1000):
            x, y = pair(rng, nonneg=True)
            # Mixed sparsity: zero out random coordinates.
            x[rng.random(x.size) < 0.3] = 0.0
            y[rng.random(y.size) < 0.3] = 0.0
            assert delta4(x, y, 8) <= 1e-12

    def test_delta4_nonnegative_for_opposite_signs(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            x = -np.abs(rng.normal(size=10))
            y = np.abs(rng.normal(size=10))
            assert delta4(x, y, 8) >= -1e-12

    def test_mle_term_not_above_alternative_term(self):
        rng = np.random.default_rng(12)
        for _ in range(500):
            x, y = pair(rng)
            M = joint_moments(x, y, 6).M
            for s, t in ((2, 2), (3, 1), (1, 3)):
                prod, sq = M[2 * s, 0] * M[0, 2 * t], M[s, t] ** 2
                if prod + sq > 0:
                    assert (prod - sq) ** 2 / (prod + sq) <= prod + sq + 1e-9

    def test_mle_not_above_alternative(self):
        rng = np.random.default_rng(13)
        for _ in range(500):
            x, y = pair(rng)
            assert variance_mle_p4(x, y, 8) <= variance_alternative_p4(x, y, 8) + 1e-9

    def test_alternative_and_mle_nonnegative(self):
        rng = np.random.default_rng(14)
        for _ in range(500):
            x, y = pair(rng)
            assert variance_alternative_p4(x, y, 8) >= 0.0
            assert variance_mle_p4(x, y, 8) >= 0.0
            assert variance_basic_p4(x, y, 8) >= -1e-9

    def test_k_validation(self):
        with pytest.raises(ParameterError):
            variance_basic_p4([1.0], [1.0], 0)


class TestSubGaussianFormula:
    def test_s3_reduces_to_normal(self):
        rng = np.random.default_rng(20)
        for _ in range(200):
            x, y = pair(rng)
            a = variance_subgaussian_p4(x, y, 8, 3.0)
            b = variance_basic_p4(x, y, 8)
            assert abs(a - b) <= 1e-12 * max(1.0, abs(b))

    def test_disjoint_support_kills_corrections(self):
        x = np.array([1.0, 2.0, 0.0, 0.0])
        y = np.array([0.0, 0.0, 3.0, 1.0])
        for s in (1.0, 1.8, 7.0):
            assert variance_subgaussian_p4(x, y, 4, s) == variance_basic_p4(x, y, 4)

    def test_rejects_s_below_one(self):
        with pytest.raises(ParameterError):
            variance_subgaussian_p4([1.0], [1.0], 4, 0.5)


class TestP6Formulas:
    def test_identity_and_nonnegativity(self):
        rng = np.random.default_rng(30)
        for _ in range(500):
            x, y = pair(rng)
            basic = variance_basic_p6(x, y, 8)
            resid = basic - variance_alternative_p6(x, y, 8) - delta6(x, y, 8)
            assert abs(resid) <= 1e-9 * max(1.0, abs(basic))
            assert variance_alternative_p6(x, y, 8) >= 0.0
            assert basic >= -1e-9 * max(1.0, variance_alternative_p6(x, y, 8))

    def test_delta6_sign_conjecture_reported(self):
        # Unproven in general; recorded as an observation, not asserted per-pair.
        rng = np.random.default_rng(31)
        signs = [delta6(*pair(rng, nonneg=True), 8) <= 1e-12 for _ in range(200)]
        assert sum(signs) >= 195  # expect the conjecture to hold essentially always


class TestMonteCarlo:
    def test_rejects_small_trials(self):
        with pytest.raises(ParameterError):
            monte_carlo_validate([1.0, 0.0], [0.0, 1.0], SketchConfig(p=4, k=2), 10)

    def test_zero_partner_degenerate(self):
        x = np.abs(np.random.default_rng(2).normal(size=8))
        rep = monte_carlo_validate(x, np.zeros(8), SketchConfig(p=4, k=4, master_seed=5), 500)
        assert rep.empirical_variance <= 1e-24 * rep.empirical_mean**2
        assert rep.empirical_mean == pytest.approx(np.sum(x**4), rel=1e-12)

    def test_reproducible(self):
        x, y = pair(np.random.default_rng(3))
        c = SketchConfig(p=4, k=8, master_seed=17)
        a = monte_carlo_validate(x, y, c, 2000)
        b = monte_carlo_validate(x, y, c, 2000)
        assert a == b

    def test_batch_size_invariance(self):
        x, y = pair(np.random.default_rng(4))
        c = SketchConfig(p=4, k=8, master_seed=19)
        a = simulate_estimates(x, y, c, 1000, batch=64)
        b = simulate_estimates(x, y, c, 1000, batch=1000)
        assert np.array_equal(a, b)

    def test_basic_p4_variance_ratio(self):
        x, y = pair(np.random.default_rng(5), D=16, nonneg=True)
        c = SketchConfig(p=4, k=8, master_seed=23)
        rep = monte_carlo_validate(x, y, c, 100_000)
        assert 0.95 <= rep.variance_ratio <= 1.05
        assert abs(rep.mean_z_score) <= 4.0

    def test_threepoint_vs_normal_ratio_prediction(self):
        x, y = pair(np.random.default_rng(6), D=16, nonneg=True)
        k = 8
        normal = SketchConfig(p=4, k=k, master_seed=29)
        threept = SketchConfig(
            p=4, k=k, family=ProjectionFamily("threepoint", 1.0), master_seed=29
        )
        rn = monte_carlo_validate(x, y, normal, 100_000)
        rt = monte_carlo_validate(x, y, threept, 100_000)
        predicted = variance_subgaussian_p4(x, y, k, 1.0) / variance_basic_p4(x, y, k)
        observed = rt.empirical_variance / rn.empirical_variance
        assert abs(observed / predicted - 1.0) <= 0.10

    def test_estimator_strategy_mismatch(self):
        with pytest.raises(ParameterError):
            simulate_estimates([1.0], [1.0], SketchConfig(p=4, k=2), 100, estimator="alternative")
