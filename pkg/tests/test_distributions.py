import math

import numpy as np
import pytest
from scipy import stats as sps

from guided_abc.distributions import (
    MvGaussian,
    MvStudentT,
    marginal_cdf,
    marginal_logpdf,
    marginal_sample,
    params_from_moments,
    t_cdf_1d,
    t_inv_cdf_1d,
)

ALL_KINDS = ["triangular", "location-scale-t", "logistic", "gumbel", "uniform", "normal"]


class TestParamsFromMoments:
    def test_uniform_case(self):
        f = params_from_moments("uniform", 0.0, 3.0)
        assert np.allclose(f.params, (-3.0, 3.0))

    def test_triangular_case(self):
        f = params_from_moments("triangular", 1.0, 6.0)
        assert np.allclose(f.params, (-5.0, 7.0, 1.0))

    def test_normal_identity(self):
        f = params_from_moments("normal", 2.0, 4.0)
        assert np.allclose(f.params, (2.0, 4.0))

    def test_gumbel_reconstruction(self):
        f = params_from_moments("gumbel", 1.5, 2.0)
        loc, beta = f.params
        assert math.isclose(beta, math.sqrt(12.0) / math.pi)
        assert math.isclose(loc + beta * np.euler_gamma, 1.5)

    def test_invalid_variance(self):
        with pytest.raises(ValueError):
            params_from_moments("normal", 0.0, -1.0)

    def test_invalid_dof(self):
        with pytest.raises(ValueError):
            params_from_moments("location-scale-t", 0.0, 1.0, nu=2.0)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_analytic_moments_via_scipy(self, kind):
        m, v = -0.4, 2.7
        f = params_from_moments(kind, m, v)
        dist = _scipy_equivalent(f)
        assert math.isclose(dist.mean(), m, abs_tol=1e-9)
        assert math.isclose(dist.var(), v, rel_tol=1e-9)


def _scipy_equivalent(f):
    k, p = f.kind, f.params
    if k == "uniform":
        return sps.uniform(loc=p[0], scale=p[1] - p[0])
    if k == "normal":
        return sps.norm(loc=p[0], scale=math.sqrt(p[1]))
    if k == "logistic":
        return sps.logistic(loc=p[0], scale=p[1])
    if k == "gumbel":
        return sps.gumbel_r(loc=p[0], scale=p[1])
    if k == "location-scale-t":
        return sps.t(df=p[2], loc=p[0], scale=p[1])
    a, b, c = p
    return sps.triang(c=(c - a) / (b - a), loc=a, scale=b - a)


class TestMarginalFunctions:
    def test_uniform_logpdf(self):
        f = params_from_moments("uniform", 0.0, 1.0 / 3.0)  # U(-1, 1)
        assert math.isclose(float(marginal_logpdf(f, 0.0)), math.log(0.5))

    def test_triangular_peak(self):
        from guided_abc.distributions import MarginalFamily

        f = MarginalFamily("triangular", (-1.0, 1.0, 0.0))
        assert math.isclose(float(f.pdf(0.0)), 1.0)

    def test_logistic_cdf_symmetry(self):
        from guided_abc.distributions import MarginalFamily

        f = MarginalFamily("logistic", (0.0, 1.0))
        assert math.isclose(float(marginal_cdf(f, 0.0)), 0.5)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_cdf_invcdf_roundtrip(self, kind):
        f = params_from_moments(kind, 0.9, 1.7)
        u = np.linspace(0.001, 0.999, 199)
        assert np.allclose(f.cdf(f.inv_cdf(u)), u, atol=1e-8)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_invcdf_strictly_increasing(self, kind):
        f = params_from_moments(kind, -1.2, 0.5)
        u = np.linspace(0.001, 0.999, 300)
        x = f.inv_cdf(u)
        assert np.all(np.diff(x) > 0)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_pdf_cdf_consistency_vs_scipy(self, kind):
        f = params_from_moments(kind, 0.3, 1.1)
        dist = _scipy_equivalent(f)
        x = np.linspace(*dist.ppf([0.01, 0.99]), 41)
        assert np.allclose(f.pdf(x), dist.pdf(x), atol=1e-10)
        assert np.allclose(f.cdf(x), dist.cdf(x), atol=1e-10)

    def test_logpdf_outside_support(self):
        f = params_from_moments("uniform", 0.0, 1.0)
        assert marginal_logpdf(f, 10.0) == -np.inf
        g = params_from_moments("triangular", 0.0, 1.0)
        assert marginal_logpdf(g, 100.0) == -np.inf

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_sampling_moments(self, kind, rng):
        m, v = 1.3, 0.8
        f = params_from_moments(kind, m, v)
        draws = marginal_sample(f, rng.random(100_000))
        assert abs(draws.mean() - m) < 4.0 * math.sqrt(v / 100_000)
        assert abs(draws.var() - v) < 0.1 * v


class TestUnivariateT:
    def test_cauchy_median(self):
        assert math.isclose(float(t_cdf_1d(1.0, 0.0)), 0.5)

    def test_cauchy_quantile(self):
        assert math.isclose(float(t_inv_cdf_1d(1.0, 0.75)), 1.0, abs_tol=1e-8)

    def test_accuracy_vs_scipy(self):
        for nu in (1.0, 3.0, 7.5):
            x = np.linspace(-6, 6, 25)
            assert np.allclose(t_cdf_1d(nu, x), sps.t(df=nu).cdf(x), atol=1e-8)
            u = np.linspace(0.01, 0.99, 25)
            assert np.allclose(t_inv_cdf_1d(nu, u), sps.t(df=nu).ppf(u), atol=1e-8)


class TestMvGaussian:
    def test_standard_normal_at_zero(self):
        g = MvGaussian(np.zeros(1), np.eye(1))
        assert math.isclose(g.logpdf(np.zeros(1)), -0.9189385, abs_tol=1e-6)

    def test_quadratic_term_vanishes_at_mean(self):
        mean = np.array([3.0, -2.0])
        cov = np.array([[2.0, 0.4], [0.4, 1.0]])
        g = MvGaussian(mean, cov)
        expect = -0.5 * (2 * math.log(2 * math.pi) + math.log(np.linalg.det(cov)))
        assert math.isclose(g.logpdf(mean), expect, rel_tol=1e-12)

    def test_independence_factorizes(self):
        g2 = MvGaussian(np.zeros(2), np.eye(2))
        g1 = MvGaussian(np.zeros(1), np.eye(1))
        x = np.array([0.7, -1.1])
        assert math.isclose(
            g2.logpdf(x), g1.logpdf(x[:1]) + g1.logpdf(x[1:]), rel_tol=1e-12
        )

    def test_sampling_moments(self, rng):
        mean = np.array([1.0, -2.0])
        cov = np.array([[1.5, -0.4], [-0.4, 0.7]])
        g = MvGaussian(mean, cov)
        draws = g.sample(rng, size=100_000)
        assert np.allclose(draws.mean(axis=0), mean, atol=0.02)
        assert np.allclose(np.cov(draws.T), cov, atol=0.03)

    def test_logpdf_vs_scipy(self, rng):
        mean = rng.standard_normal(3)
        a = rng.standard_normal((3, 3))
        cov = a @ a.T + np.eye(3)
        g = MvGaussian(mean, cov)
        x = rng.standard_normal((5, 3))
        assert np.allclose(
            g.logpdf(x), sps.multivariate_normal(mean, cov).logpdf(x), atol=1e-10
        )


class TestMvStudentT:
    def test_normalizing_constant_at_mean(self):
        from scipy.special import gammaln

        for d, nu in ((1, 3.0), (3, 5.0)):
            t = MvStudentT(np.zeros(d), np.eye(d), nu)
            expect = (
                gammaln((nu + d) / 2) - gammaln(nu / 2) - 0.5 * d * math.log(nu * math.pi)
            )
            assert math.isclose(t.logpdf(np.zeros(d)), expect, rel_tol=1e-12)

    def test_logpdf_vs_scipy(self, rng):
        mean = rng.standard_normal(2)
        a = rng.standard_normal((2, 2))
        scale = a @ a.T + np.eye(2)
        t = MvStudentT(mean, scale, 4.5)
        x = rng.standard_normal((6, 2))
        ref = sps.multivariate_t(loc=mean, shape=scale, df=4.5).logpdf(x)
        assert np.allclose(t.logpdf(x), ref, atol=1e-10)

    def test_sampling_moments(self, rng):
        nu = 6.0
        t = MvStudentT(np.array([2.0]), np.array([[1.0]]), nu)
        draws = t.sample(rng, size=200_000)
        assert abs(draws.mean() - 2.0) < 0.02
        # variance of a t is nu/(nu-2) times the scale
        assert abs(draws.var() - nu / (nu - 2.0)) < 0.05


class TestConditionedDensityConsistency:
    def test_conditional_density_equals_ratio(self, rng):
        from guided_abc.stats import condition_gaussian

        for d in (2, 3):
            a = rng.standard_normal((d, d))
            cov = a @ a.T + 0.5 * np.eye(d)
            mean = rng.standard_normal(d)
            joint = MvGaussian(mean, cov)
            kept = [0]
            obs = list(range(1, d))
            value = rng.standard_normal(d - 1)
            cond = condition_gaussian(mean, cov, kept, obs, value)
            g_cond = MvGaussian(cond.mean, cond.cov)
            marg = MvGaussian(mean[obs], cov[np.ix_(obs, obs)])
            for _ in range(10):
                x0 = rng.standard_normal(1)
                full = np.concatenate([x0, value])
                ratio = joint.logpdf(full) - marg.logpdf(value)
                assert math.isclose(g_cond.logpdf(x0), ratio, abs_tol=1e-8)
