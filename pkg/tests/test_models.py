import math

import numpy as np
import pytest

from guided_abc.models import (
    BoomBustModel,
    CellModel,
    HierarchicalGkModel,
    TwistedModel,
    TwoMoonsModel,
    boom_bust_summaries,
    cell_simulate,
    get_model,
    gk_quantile,
    mad_calibrate,
    two_moons_simulate,
)


class _ForcedRng:
    """Returns scripted values for uniform/normal draws."""

    def __init__(self, uniform=0.0, normal=0.0):
        self._uniform = uniform
        self._normal = normal

    def uniform(self, low, high, size=None):
        return self._uniform

    def normal(self, loc, scale, size=None):
        return loc + scale * self._normal


class TestTwoMoons:
    def test_forced_draw_hand_value(self):
        # a = 0 (midpoint of the uniform), r = 0.1 (the normal's mean)
        z = two_moons_simulate([0.0, 0.0], _ForcedRng(uniform=0.0, normal=0.0))
        assert np.allclose(z, [0.35, 0.0])

    def test_antisymmetric_theta_only_shifts_second_coord(self, rng):
        c = 0.4
        base = two_moons_simulate([0.0, 0.0], np.random.default_rng(5))
        shifted = two_moons_simulate([c, -c], np.random.default_rng(5))
        assert math.isclose(shifted[0], base[0], abs_tol=1e-12)
        assert math.isclose(shifted[1] - base[1], -2 * c / math.sqrt(2), abs_tol=1e-12)

    def test_first_offset_coordinate_nonpositive(self, rng):
        model = TwoMoonsModel()
        theta = np.array([0.3, 0.4])
        crescent_max = 0.0
        for _ in range(2000):
            z = model.simulate(theta, rng)
            crescent_max = max(crescent_max, z[0] + abs(theta[0] + theta[1]) / math.sqrt(2))
        # the crescent sits at positive abscissa before the shift
        assert crescent_max > 0

    def test_prior_support(self):
        model = TwoMoonsModel()
        assert model.prior_logpdf([0.5, -0.5]) == pytest.approx(2 * math.log(0.5))
        assert model.prior_logpdf([1.5, 0.0]) == -math.inf

    def test_summaries_concentrate_near_observed_on_the_moon(self, rng):
        # points on either posterior moon satisfy |t1 + t2| / sqrt(2) ~ 0.3
        # with t1 ~ t2, so simulated outputs can reach the observed origin
        model = TwoMoonsModel()
        for theta in ([0.21, 0.21], [-0.21, -0.21]):
            best = min(
                np.linalg.norm(model.simulate(theta, rng)) for _ in range(10_000)
            )
            assert best < 0.1


class TestTwisted:
    def test_unnormalized_logprior_zero_case(self):
        model = TwistedModel()
        assert model.prior_logpdf([0.0, -10.0, 0.0, 0.0, 0.0]) == pytest.approx(0.0)

    def test_prior_sample_shift(self):
        model = TwistedModel()

        class _Zero:
            def standard_normal(self, n):
                return np.zeros(n)

        theta = model.prior_sample(_Zero())
        assert np.allclose(theta, [0.0, -10.0, 0.0, 0.0, 0.0])

    def test_simulate_mean_and_variance(self, rng):
        model = TwistedModel()
        theta = np.array([1.0, -2.0, 0.5, 0.0, 3.0])
        sims = np.array([model.simulate(theta, rng) for _ in range(10_000)])
        assert np.allclose(sims.mean(axis=0), theta, atol=0.05)
        assert np.allclose(sims.var(axis=0), 1.0, atol=0.06)

    def test_observed_vector(self):
        model = TwistedModel()
        assert np.array_equal(model.observed_summaries(), [10.0, 0.0, 0.0, 0.0, 0.0])


class TestGk:
    def test_gaussian_special_case(self):
        for z in (0.1, 0.35, 0.8):
            r = float(gk_quantile(z, 1.0, 2.0, 0.0, 0.0))
            from scipy.special import ndtri

            assert math.isclose(r, 1.0 + 2.0 * ndtri(z), rel_tol=1e-12)

    def test_median_is_location(self):
        assert math.isclose(float(gk_quantile(0.5, 3.7, 0.192, 0.622, 0.438)), 3.7)

    def test_monotone_quantile(self):
        z = np.linspace(1e-3, 1 - 1e-3, 1000)
        q = gk_quantile(z, 0.0, 0.192, 0.622, 0.438)
        assert np.all(np.diff(q) > 0)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            gk_quantile(0.0, 0.0, 1.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            gk_quantile(0.5, 0.0, -1.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            gk_quantile(0.5, 0.0, 1.0, 0.0, -0.6)

    def test_quantile_agrees_with_simulated_ecdf(self, rng):
        a, b, g, k = 0.0, 0.192, 0.622, 0.438
        from guided_abc.models import gk_sample

        draws = gk_sample(200_000, a, b, g, k, rng)
        for p in (0.25, 0.5, 0.75):
            exact = float(gk_quantile(p, a, b, g, k))
            est = np.quantile(draws, p)
            assert abs(est - exact) < 0.01

    def test_hierarchical_shapes_and_summaries(self, rng):
        model = HierarchicalGkModel(n_units=3, n_obs=50)
        assert model.d_theta == 4 and model.d_s == 27
        theta = model.prior_sample(rng)
        data = model.simulate(theta, rng)
        assert data.shape == (3, 50)
        s = model.summarize(data)
        assert s.shape == (27,)
        # each block of nine quantiles is nondecreasing
        for i in range(3):
            block = s[9 * i:9 * (i + 1)]
            assert np.all(np.diff(block) >= 0)

    def test_prior_logpdf(self):
        model = HierarchicalGkModel(n_units=2)
        lp = model.prior_logpdf([0.0, 0.0, 0.0])
        expect = -math.log(20.0) - math.log(2 * math.pi)
        assert math.isclose(lp, expect)
        assert model.prior_logpdf([11.0, 0.0, 0.0]) == -math.inf


class TestBoomBust:
    def test_expected_growth_poisson_branch(self, rng):
        # below threshold: E[N'] = N (1 + r) + beta
        n_next = []
        for _ in range(20_000):
            series = _one_transition(10, 0.4, 50.0, 0.09, 0.05, rng)
            n_next.append(series)
        assert abs(np.mean(n_next) - 14.05) < 0.1

    def test_crash_branch_zero_alpha(self, rng):
        for _ in range(200):
            out = _one_transition(60, 0.4, 50.0, 0.0, 0.0, rng)
            assert out == 0

    def test_constant_series_guarded(self):
        s = boom_bust_summaries(np.full(250, 7.0))
        assert np.all(np.isfinite(s))
        # variance, skewness, kurtosis of a constant series are zero-guarded
        assert s[1] == 0.0 and s[2] == 0.0 and s[3] == 0.0

    def test_series_length_and_summary_order(self, rng):
        model = BoomBustModel()
        y = model.simulate(model.prior_sample(rng), rng)
        assert y.shape == (250,)
        s = model.summarize(y)
        assert s.shape == (12,)
        assert math.isclose(s[0], y.mean())
        assert math.isclose(s[4], np.diff(y).mean())
        ratio = (y[1:] + 1.0) / (y[:-1] + 1.0)
        assert math.isclose(s[8], ratio.mean())


def _one_transition(n, r, kappa, alpha, beta, rng):
    if n <= kappa:
        out = rng.poisson(n * (1.0 + r))
    else:
        out = rng.binomial(n, alpha)
    return out + rng.poisson(beta)


class TestCell:
    def test_frozen_lattice(self, rng):
        hamming, counts = cell_simulate([0.0, 0.0], rng)
        assert np.all(hamming == 0)
        assert counts[-1] == 110

    def test_motility_conserves_count(self, rng):
        hamming, counts = cell_simulate([1.0, 0.0], rng)
        assert np.all(counts == 110)

    def test_full_lattice_blocks_everything(self, rng):
        hamming, counts = cell_simulate(
            [1.0, 1.0], rng, rows=4, cols=5, n_steps=10, n_initial=20, initial_rows=4
        )
        assert np.all(hamming == 0)
        assert np.all(counts == 20)

    def test_counts_nondecreasing(self, rng):
        for _ in range(5):
            theta = rng.uniform(0.0, 1.0, size=2)
            _, counts = cell_simulate(theta, rng, rows=9, cols=12, n_steps=30,
                                      n_initial=12, initial_rows=4)
            assert np.all(np.diff(counts) >= 0)

    def test_summary_layout(self, rng):
        model = CellModel(rows=9, cols=12, n_steps=20, n_initial=12, initial_rows=4)
        s = model.summarize(model.simulate([0.3, 0.01], rng))
        assert s.shape == (21,)
        assert model.d_s == 21


class TestMadCalibrate:
    def test_constant_coordinate_guard(self):
        class Const:
            d_s = 2

            def prior_sample(self, rng):
                return np.zeros(1)

            def simulate(self, theta, rng):
                return rng.normal(size=2)

            def summarize(self, data):
                return np.array([5.0, data[0]])

        scale = mad_calibrate(Const(), 500, np.random.default_rng(0))
        assert scale[0] == 1.0
        assert scale[1] > 0.0

    def test_symmetric_two_point(self):
        class TwoPoint:
            d_s = 1
            _i = 0

            def prior_sample(self, rng):
                return np.zeros(1)

            def simulate(self, theta, rng):
                self._i += 1
                return np.array([1.0 if self._i % 2 else -1.0])

            def summarize(self, data):
                return data

        scale = mad_calibrate(TwoPoint(), 400, np.random.default_rng(0))
        assert scale[0] == 1.0  # median 0, |s| = 1

    def test_boom_bust_scales_positive(self, rng):
        model = BoomBustModel()
        scale = mad_calibrate(model, 500, rng)
        assert scale.shape == (12,)
        assert np.all(scale > 0)


@pytest.mark.slow
@pytest.mark.parametrize(
    "factory",
    [
        TwoMoonsModel,
        TwistedModel,
        lambda: HierarchicalGkModel(n_units=4, n_obs=100),
        BoomBustModel,
        lambda: CellModel(rows=9, cols=12, n_steps=24, n_initial=12, initial_rows=4),
    ],
    ids=["two_moons", "twisted", "gk", "boom_bust", "cell"],
)
def test_simulators_total_on_prior_support(factory, rng):
    model = factory()
    for _ in range(10_000):
        theta = model.prior_sample(rng)
        assert np.isfinite(model.prior_logpdf(theta))
        s = model.summarize(model.simulate(theta, rng))
        assert s.shape == (model.d_s,)
        assert np.all(np.isfinite(s))


def test_registry():
    model = get_model("two_moons")
    assert isinstance(model, TwoMoonsModel)
    model = get_model("gk_hierarchical", n_units=2, n_obs=20)
    assert model.d_s == 18
    with pytest.raises(ValueError, match="unknown model"):
        get_model("nope")
