import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import inar1 as m
from inar1.errors import ParameterError, UndefinedRatioError

from oracles import poisson_pmf_exact

GEO = m.InnovationSpec.geometric(0.5)
EXP_GEO = m.limit_experiment(GEO)  # lambda_unit = 1/4


class TestLimitExperiment:
    def test_lambda_unit_from_spec(self):
        assert EXP_GEO.lambda_unit == pytest.approx(0.25)
        exp_pois = m.limit_experiment(m.InnovationSpec.poisson(1.0))
        assert exp_pois.lambda_unit == pytest.approx(math.exp(-1.0) / 2.0)

    def test_degenerate_unit_allowed_but_estimator_guarded(self):
        degenerate = m.LimitExperiment(0.0)
        with pytest.raises(ParameterError):
            m.limit_efficient_estimator(degenerate, 1)
        with pytest.raises(ParameterError):
            m.LimitExperiment(-1.0)


class TestLimitLr:
    def test_identical_measures(self):
        for z in range(6):
            assert m.limit_lr(EXP_GEO, z, 2.0, 2.0) == pytest.approx(1.0)

    def test_null_reference_at_zero(self):
        assert m.limit_lr(EXP_GEO, 0, 2.0, 0.0) == pytest.approx(math.exp(-0.5), rel=1e-12)

    def test_null_reference_off_zero(self):
        assert m.limit_lr(EXP_GEO, 1, 2.0, 0.0) == 0.0

    def test_zero_numerator(self):
        assert m.limit_lr(EXP_GEO, 1, 0.0, 2.0) == 0.0
        assert m.limit_lr(EXP_GEO, 0, 0.0, 2.0) == pytest.approx(math.exp(0.5), rel=1e-12)

    def test_both_zero_undefined(self):
        with pytest.raises(UndefinedRatioError):
            m.limit_lr(EXP_GEO, 1, 0.0, 0.0)

    def test_matches_poisson_pmf_ratio(self):
        for h, h0 in ((2.0, 1.0), (0.5, 3.0), (4.0, 0.25)):
            for z in range(8):
                want = poisson_pmf_exact(z, h * 0.25) / poisson_pmf_exact(z, h0 * 0.25)
                assert m.limit_lr(EXP_GEO, z, h, h0) == pytest.approx(want, rel=1e-11)

    @pytest.mark.parametrize("h", [0.0, 0.5, 2.0, 6.0])
    def test_change_of_measure_identity(self, h):
        h0 = 1.5
        total = math.fsum(
            m.limit_lr(EXP_GEO, z, h, h0) * poisson_pmf_exact(z, h0 * 0.25)
            for z in range(200)
        )
        assert total == pytest.approx(1.0, abs=1e-10)


class TestEfficientEstimator:
    def test_values(self):
        assert m.limit_efficient_estimator(EXP_GEO, 0) == 0.0
        assert m.limit_efficient_estimator(EXP_GEO, 3) == pytest.approx(12.0)

    @pytest.mark.parametrize("h", [0.5, 1.0, 4.0])
    def test_unbiased(self, h):
        lam = h * EXP_GEO.lambda_unit
        mean = math.fsum(
            m.limit_efficient_estimator(EXP_GEO, z) * poisson_pmf_exact(z, lam)
            for z in range(300)
        )
        assert mean == pytest.approx(h, abs=1e-10)

    @pytest.mark.parametrize("h", [0.5, 1.0, 4.0])
    def test_variance_attains_bound(self, h):
        lam = h * EXP_GEO.lambda_unit
        second = math.fsum(
            m.limit_efficient_estimator(EXP_GEO, z) ** 2 * poisson_pmf_exact(z, lam)
            for z in range(400)
        )
        var = second - h * h
        assert var == pytest.approx(m.limit_variance_bound(EXP_GEO, h), rel=1e-9)

    def test_bound_formula(self):
        # 2h / (g(0) * mu) with g(0) = 1/2, mu = 1
        assert m.limit_variance_bound(EXP_GEO, 4.0) == pytest.approx(16.0)


class TestLimitTestPower:
    def test_level_at_null(self):
        assert m.limit_test_power(EXP_GEO, 0.0, 0.05) == pytest.approx(0.05)

    def test_frozen_value(self):
        # h * lambda_unit = 1 at h = 4
        assert m.limit_test_power(EXP_GEO, 4.0, 0.05) == pytest.approx(
            1.0 - 0.95 * math.exp(-1.0), rel=1e-12
        )

    def test_matches_expectation_of_randomized_test(self):
        alpha, h = 0.05, 4.0
        lam = h * EXP_GEO.lambda_unit
        want = math.fsum(
            (alpha if z == 0 else 1.0) * poisson_pmf_exact(z, lam) for z in range(200)
        )
        assert m.limit_test_power(EXP_GEO, h, alpha) == pytest.approx(want, abs=1e-12)

    @given(st.floats(min_value=0.0, max_value=40.0), st.floats(min_value=0.01, max_value=0.99))
    def test_algebraic_identity(self, h, alpha):
        lhs = m.limit_test_power(EXP_GEO, h, alpha)
        rhs = alpha + (1.0 - alpha) * (1.0 - math.exp(-h * EXP_GEO.lambda_unit))
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_strictly_increasing_to_one(self):
        vals = [m.limit_test_power(EXP_GEO, h, 0.05) for h in (0.0, 1.0, 5.0, 20.0, 80.0)]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 1.0
        assert m.limit_test_power(EXP_GEO, 1e6, 0.05) == pytest.approx(1.0)

    def test_alpha_domain(self):
        with pytest.raises(ParameterError):
            m.limit_test_power(EXP_GEO, 1.0, 0.0)


class TestSerflingBound:
    def test_trivial_cases(self):
        assert m.serfling_bound([]) == 0.0
        assert m.serfling_bound([0.0, 0.0]) == 0.0
        assert m.serfling_bound([0.1]) == pytest.approx(0.01)
        assert m.serfling_bound([0.1, 0.2], [0.0, 0.05]) == pytest.approx(0.10)

    def test_domain(self):
        with pytest.raises(ParameterError):
            m.serfling_bound([1.5])
        with pytest.raises(ParameterError):
            m.serfling_bound([0.1], [-0.1])


class TestPoissonBinomial:
    def test_two_bernoullis_by_hand(self):
        got = m.poisson_binomial_pmf([0.5, 0.25])
        want = [0.5 * 0.75, 0.5 * 0.75 + 0.5 * 0.25, 0.5 * 0.25]
        assert np.allclose(got, want, rtol=1e-14)

    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=0, max_size=10))
    def test_normalized(self, probs):
        pmf = m.poisson_binomial_pmf(probs)
        assert pmf.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(pmf >= -1e-15)


class TestExactTv:
    def test_self_distance_is_zero(self):
        lam = 0.7
        probs = [poisson_pmf_exact(z, lam) for z in range(40)]  # tail < 1e-12
        assert m.exact_tv_vs_poisson(probs, lam) < 1e-11

    def test_bernoulli_example(self):
        tv = m.exact_tv_vs_poisson([0.9, 0.1], 0.1)
        assert tv == pytest.approx(0.009516258196404048, rel=1e-10)
        assert tv <= m.serfling_bound([0.1])

    def test_point_mass_against_unit_poisson(self):
        assert m.exact_tv_vs_poisson([1.0], 1.0) == pytest.approx(
            1.0 - math.exp(-1.0), rel=1e-12
        )

    def test_input_validation(self):
        with pytest.raises(ParameterError):
            m.exact_tv_vs_poisson([0.5, 0.4], 1.0)  # not normalized
        with pytest.raises(ParameterError):
            m.exact_tv_vs_poisson([], 1.0)
        with pytest.raises(ParameterError):
            m.exact_tv_vs_poisson([1.0], -1.0)

    @given(
        st.lists(st.floats(min_value=0.001, max_value=0.3), min_size=1, max_size=12)
    )
    def test_poisson_binomial_tv_below_serfling(self, probs):
        pmf = m.poisson_binomial_pmf(probs)
        # renormalize away the accumulated float error before the 1e-12 gate
        pmf = pmf / pmf.sum()
        tv = m.exact_tv_vs_poisson(pmf, sum(probs))
        assert tv <= m.serfling_bound(probs) + 1e-12
