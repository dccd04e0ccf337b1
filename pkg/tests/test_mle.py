import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oufar import (
    DomainError,
    OuParams,
    TimeGrid,
    ZeroDenominator,
    asymptotic_std,
    confidence_band,
    estimate_theta_endpoint,
    estimate_theta_ito,
    lil_envelope,
    sample_exact,
    theta_endpoint_from_values,
    theta_ito_from_values,
)

BAND_3SIGMA_T2000 = 3.0 * math.sqrt(2.0 / 2000.0)  # 0.0949 for theta = 1


def _exact_path(theta, t_end, dt, seed):
    return sample_exact(
        OuParams(theta=theta), TimeGrid(t_end, dt), np.random.default_rng(seed), stationary=True
    )


class TestItoForm:
    def test_constant_path_gives_zero_flagged(self):
        est = theta_ito_from_values(np.full(101, 3.0), 0.02)
        assert est.theta_hat == 0.0
        assert est.nonpositive
        assert est.numerator == 0.0 and est.denominator > 0.0

    def test_zero_path_raises(self):
        with pytest.raises(ZeroDenominator):
            theta_ito_from_values(np.zeros(101), 0.02)

    def test_too_short(self):
        with pytest.raises(DomainError):
            theta_ito_from_values(np.array([1.0]), 0.02)

    def test_fixed_seed_path_within_band(self):
        est = estimate_theta_ito(_exact_path(1.0, 2000.0, 0.02, seed=7))
        assert est.form == "ito_discrete"
        assert abs(est.theta_hat - 1.0) <= BAND_3SIGMA_T2000
        assert est.theta_hat == pytest.approx(est.numerator / est.denominator, rel=1e-15)


class TestEndpointForm:
    def test_synthetic_plugin_arithmetic(self):
        # xi_0 = xi_T and sum xi_i^2 dt = T/2 force the estimate to 1
        t_end, dt = 2.0, 0.02
        values = np.full(101, math.sqrt(0.5))
        est = theta_endpoint_from_values(values, dt)
        assert est.t_end == pytest.approx(t_end)
        assert est.theta_hat == pytest.approx(1.0, rel=1e-12)

    def test_zero_path_raises(self):
        with pytest.raises(ZeroDenominator):
            theta_endpoint_from_values(np.zeros(101), 0.02)

    def test_fixed_seed_path_within_band(self):
        est = estimate_theta_endpoint(_exact_path(1.0, 2000.0, 0.02, seed=7))
        assert est.form == "endpoint"
        assert abs(est.theta_hat - 1.0) <= BAND_3SIGMA_T2000


class TestFormAgreement:
    @pytest.mark.parametrize("i,dt", [(0, 0.02), (1, 0.01), (2, 0.005)])
    def test_forms_converge_as_dt_shrinks(self, i, dt):
        path = _exact_path(1.0, 2000.0, dt, seed=97 + i)
        ito = estimate_theta_ito(path).theta_hat
        endpoint = estimate_theta_endpoint(path).theta_hat
        # Ito-correction residual is O(dt); 5 dt was calibrated on this family
        assert abs(ito - endpoint) / abs(endpoint) <= 5.0 * dt

    @pytest.mark.parametrize("theta", [0.1, 0.5, 1.0])
    @pytest.mark.parametrize("t_end", [100.0, 500.0])
    def test_sign_agreement_on_corpus(self, theta, t_end):
        path = _exact_path(theta, t_end, 0.02, seed=int(theta * 1000 + t_end))
        ito = estimate_theta_ito(path).theta_hat
        endpoint = estimate_theta_endpoint(path).theta_hat
        assert math.copysign(1.0, ito) == math.copysign(1.0, endpoint)


class TestAsymptoticStd:
    def test_values(self):
        assert asymptotic_std(0.1, 12000.0) == pytest.approx(4.0824829e-3, rel=1e-7)
        assert asymptotic_std(1.0, 2000.0) == pytest.approx(0.0316227766, rel=1e-9)

    @given(theta=st.floats(0.01, 10.0), t_end=st.floats(1.0, 1e6))
    def test_halves_when_t_quadruples(self, theta, t_end):
        assert asymptotic_std(theta, 4.0 * t_end) == pytest.approx(
            0.5 * asymptotic_std(theta, t_end), rel=1e-12
        )

    def test_rejects_bad_domain(self):
        with pytest.raises(DomainError):
            asymptotic_std(0.0, 100.0)


class TestConfidenceBand:
    def test_degenerate(self):
        assert confidence_band(1.0, 100.0, k=0.0) == (0.0, 0.0)

    def test_value(self):
        lo, hi = confidence_band(5.0, 18000.0, k=3.0)
        assert hi == pytest.approx(0.070710678, rel=1e-8)
        assert lo == -hi


class TestLilEnvelope:
    def test_forced_by_composition(self):
        t_end = math.e**math.e  # log log T = 1
        assert lil_envelope(1.0, t_end) == pytest.approx(math.sqrt(4.0 / t_end), rel=1e-12)

    def test_value(self):
        assert lil_envelope(0.4, 1e6) == pytest.approx(2.0497e-3, rel=1e-4)

    def test_domain(self):
        with pytest.raises(DomainError):
            lil_envelope(1.0, math.e)

    @given(theta=st.floats(0.01, 10.0), t_end=st.floats(16.0, 1e9))
    def test_ratio_to_asymptotic_std(self, theta, t_end):
        ratio = lil_envelope(theta, t_end) / asymptotic_std(theta, t_end)
        assert ratio == pytest.approx(math.sqrt(2.0 * math.log(math.log(t_end))), rel=1e-9)

    def test_ratio_grows_without_bound(self):
        ratios = [
            lil_envelope(1.0, t) / asymptotic_std(1.0, t) for t in (1e2, 1e4, 1e8, 1e16)
        ]
        assert all(b > a for a, b in zip(ratios, ratios[1:]))


class TestStandardizedInvariants:
    """Desk-scale checks of the sqrt(T)-normality of the estimator."""

    def test_standardized_errors_exact_scheme(self):
        # small theta keeps the Ito-discretization bias well inside the gate
        theta, t_end, n = 0.4, 2000.0, 300
        z = np.empty(n)
        for r in range(n):
            est = estimate_theta_ito(_exact_path(theta, t_end, 0.02, seed=300_000 + r))
            z[r] = (est.theta_hat - theta) / asymptotic_std(theta, t_end)
        assert abs(z.mean()) <= 0.15
        assert 0.8 <= z.var(ddof=1) <= 1.2

    def test_emse_ratio_exact_scheme(self):
        theta, t_end, n = 0.4, 2000.0, 200
        sq = np.empty(n)
        for r in range(n):
            est = estimate_theta_ito(_exact_path(theta, t_end, 0.02, seed=400_000 + r))
            sq[r] = (theta - est.theta_hat) ** 2
        assert 0.6 <= sq.mean() * t_end / (2.0 * theta) <= 1.5
