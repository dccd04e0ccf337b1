import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from oufar import (
    DomainError,
    GridMismatch,
    OuParams,
    TimeGrid,
    conditional_moments,
    covariance,
    exact_transition,
    gaussian_tail_bound,
    sample_euler,
    sample_exact,
    stationary_density,
)

params_st = st.builds(
    OuParams,
    theta=st.floats(0.05, 10.0),
    mu=st.floats(-5.0, 5.0),
    sigma=st.floats(0.1, 5.0),
)


class TestParams:
    def test_defaults(self):
        p = OuParams(theta=0.5)
        assert p.mu == 0.0 and p.sigma == 1.0

    @pytest.mark.parametrize("kwargs", [dict(theta=0.0), dict(theta=-1.0), dict(theta=1.0, sigma=0.0)])
    def test_rejects_nonpositive(self, kwargs):
        with pytest.raises(DomainError):
            OuParams(**kwargs)


class TestTimeGrid:
    def test_step_count(self):
        g = TimeGrid(t_end=5.0, dt=0.02)
        assert g.n_steps == 250
        assert g.times().shape == (251,)
        assert math.isclose(g.n_steps * g.dt, g.t_end, rel_tol=1e-12)

    def test_rejects_misaligned(self):
        with pytest.raises(GridMismatch):
            TimeGrid(t_end=1.0, dt=0.3)

    def test_path_length_validated(self):
        from oufar import SamplePath

        with pytest.raises(GridMismatch):
            SamplePath(TimeGrid(1.0, 0.5), np.zeros(5), OuParams(theta=1.0), "euler")
        with pytest.raises(ValueError):
            SamplePath(TimeGrid(1.0, 0.5), np.array([0.0, np.inf, 0.0]), None, "euler")


class TestStationaryDensity:
    def test_value_at_mean(self):
        assert stationary_density(OuParams(theta=0.5), 0.0) == pytest.approx(
            math.sqrt(0.5 / math.pi), rel=1e-12
        )

    @given(params=params_st, a=st.floats(0.0, 10.0))
    def test_symmetric_about_mu(self, params, a):
        assert stationary_density(params, params.mu + a) == pytest.approx(
            stationary_density(params, params.mu - a), rel=1e-12
        )

    @pytest.mark.parametrize("theta,sigma", [(0.5, 1.0), (2.0, 0.7), (0.1, 3.0)])
    def test_integrates_to_one(self, theta, sigma):
        p = OuParams(theta=theta, mu=0.3, sigma=sigma)
        lim = 10.0 * p.stationary_std
        total, _ = integrate.quad(lambda x: stationary_density(p, x), p.mu - lim, p.mu + lim)
        assert total == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("theta,sigma", [(0.5, 1.0), (5.0, 1.0), (0.3, 2.0)])
    def test_variance_by_quadrature(self, theta, sigma):
        p = OuParams(theta=theta, sigma=sigma)
        lim = 12.0 * p.stationary_std
        var, _ = integrate.quad(lambda x: x * x * stationary_density(p, x), -lim, lim)
        assert var == pytest.approx(p.stationary_variance, rel=1e-7)
        assert covariance(p, 3.0, 3.0) == pytest.approx(var, rel=1e-7)


class TestCovariance:
    def test_equal_times(self):
        assert covariance(OuParams(theta=5.0), 2.0, 2.0) == pytest.approx(0.1, rel=1e-12)

    @given(params=params_st, t=st.floats(-50.0, 50.0), s=st.floats(-50.0, 50.0))
    def test_symmetric(self, params, t, s):
        assert covariance(params, t, s) == covariance(params, s, t)


class TestConditionalMoments:
    def test_conditioning_point(self):
        mean, _ = conditional_moments(OuParams(theta=0.7, mu=1.5), c=-2.0, t=0.0, s=0.0)
        assert mean == pytest.approx(-2.0, rel=1e-12)

    def test_long_run_limits(self):
        p = OuParams(theta=1.0, mu=0.5)
        mean, cov = conditional_moments(p, c=4.0, t=500.0, s=500.0)
        assert mean == pytest.approx(p.mu, abs=1e-12)
        assert cov == pytest.approx(p.stationary_variance, abs=1e-12)

    def test_closed_form_point(self):
        mean, cov = conditional_moments(OuParams(theta=1.0), c=2.0, t=1.0, s=1.0)
        assert mean == pytest.approx(2.0 * math.exp(-1.0), rel=1e-12)
        assert cov == pytest.approx(0.5 + 4.0 * math.exp(-2.0), rel=1e-12)

    def test_negative_time_rejected(self):
        with pytest.raises(DomainError):
            conditional_moments(OuParams(theta=1.0), c=0.0, t=-1.0, s=0.0)


class TestGaussianTailBound:
    def test_boundary(self):
        assert gaussian_tail_bound(1.0, 0.0) == 1.0

    def test_against_normal_cdf(self):
        assert gaussian_tail_bound(1.0, 1.0) == pytest.approx(math.exp(-0.5), rel=1e-12)
        assert gaussian_tail_bound(1.0, 1.0) >= 2.0 * stats.norm.cdf(-1.0)

    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
    def test_dominates_exact_tail_on_grid(self, sigma):
        x = np.arange(0.0, 5.0001, 0.1)
        exact = 2.0 * stats.norm.sf(x / sigma)
        assert np.all(gaussian_tail_bound(sigma, x) >= exact)


class TestSamplers:
    def test_drift_skeleton(self):
        # with increments forced to zero the recursion is xi_i = x0 (1 - theta dt)^i
        p = OuParams(theta=0.5)
        g = TimeGrid(t_end=1.0, dt=0.1)
        path = sample_euler(p, g, np.random.default_rng(0), x0=2.0, _zero_noise=True)
        expected = 2.0 * (1.0 - 0.5 * 0.1) ** np.arange(11)
        np.testing.assert_allclose(path.values, expected, rtol=1e-12)

    def test_euler_tail_variance(self):
        path = sample_euler(OuParams(theta=5.0), TimeGrid(5.0, 0.02), np.random.default_rng(42))
        tail_var = float(np.var(path.values[50:]))
        # stationary variance is 0.1; one short path has ~20 effective samples
        assert 0.05 <= tail_var <= 0.2

    def test_euler_terminal_mean_matches_conditional_oracle(self):
        p = OuParams(theta=1.0)
        g = TimeGrid(1.0, 0.005)
        terminal = np.array(
            [sample_euler(p, g, np.random.default_rng(1000 + r), x0=2.0).values[-1] for r in range(10_000)]
        )
        mean_oracle, _ = conditional_moments(p, c=2.0, t=1.0, s=1.0)
        se = terminal.std(ddof=1) / math.sqrt(terminal.size)
        assert abs(terminal.mean() - mean_oracle) <= 3.0 * se

    def test_exact_transition_degenerate_step(self):
        decay, sd = exact_transition(OuParams(theta=3.0), 0.0)
        assert decay == 1.0 and sd == 0.0
        # one step with these coefficients leaves the state unchanged
        assert decay * 1.7 + sd * 0.0 == 1.7

    def test_exact_stationary_lag_covariance(self):
        p = OuParams(theta=1.0)
        g = TimeGrid(5.0, 0.02)
        reps = 4000
        values = np.empty((reps, g.n_steps + 1))
        for r in range(reps):
            values[r] = sample_exact(p, g, np.random.default_rng(50_000 + r), stationary=True).values
        for lag in (0.0, 0.5, 1.0, 2.0, 5.0):
            j = int(round(lag / g.dt))
            products = values[:, 0] * values[:, j]
            se = products.std(ddof=1) / math.sqrt(reps)
            assert abs(products.mean() - covariance(p, 0.0, lag)) <= 3.0 * se

    @pytest.mark.parametrize("sampler,kwargs", [(sample_euler, {"x0": 0.0}), (sample_exact, {"stationary": True})])
    def test_bit_determinism(self, sampler, kwargs):
        p = OuParams(theta=0.7)
        g = TimeGrid(10.0, 0.02)
        a = sampler(p, g, np.random.default_rng(123), **kwargs)
        b = sampler(p, g, np.random.default_rng(123), **kwargs)
        assert a.values.tobytes() == b.values.tobytes()

    def test_exact_zero_noise_decays_deterministically(self):
        p = OuParams(theta=2.0)
        g = TimeGrid(1.0, 0.25)
        path = sample_exact(p, g, np.random.default_rng(0), x0=1.0, _zero_noise=True)
        np.testing.assert_allclose(path.values, np.exp(-2.0 * g.times()), rtol=1e-12)
