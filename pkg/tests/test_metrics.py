import itertools
import math

import numpy as np
import pytest

from guided_abc.engine import ParticleSystem
from guided_abc.metrics import (
    EmpiricalSample,
    posterior_summary,
    wasserstein1,
    wasserstein1_resampled,
    weighted_quantiles,
)


def brute_force_w1(a, b):
    """Minimum average transport cost over all point permutations."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    best = math.inf
    for perm in itertools.permutations(range(a.shape[0])):
        cost = sum(np.linalg.norm(a[i] - b[j]) for i, j in enumerate(perm))
        best = min(best, cost)
    return best / a.shape[0]


class TestWasserstein:
    def test_identical_samples(self, rng):
        x = rng.standard_normal((10, 2))
        assert wasserstein1(EmpiricalSample(x), EmpiricalSample(x.copy())) == 0.0

    def test_two_point_masses(self):
        a = EmpiricalSample(np.array([[0.0]]))
        b = EmpiricalSample(np.array([[1.0]]))
        assert wasserstein1(a, b) == 1.0

    def test_matches_brute_force(self, rng):
        for _ in range(100):
            m = int(rng.integers(2, 7))
            a = rng.standard_normal((m, 2))
            b = rng.standard_normal((m, 2))
            exact = wasserstein1(EmpiricalSample(a), EmpiricalSample(b))
            assert abs(exact - brute_force_w1(a, b)) < 1e-9

    def test_one_dimensional_sorted_coupling(self, rng):
        for _ in range(20):
            m = int(rng.integers(2, 40))
            a = rng.standard_normal(m)
            b = rng.standard_normal(m)
            exact = wasserstein1(EmpiricalSample(a), EmpiricalSample(b))
            sorted_cost = np.abs(np.sort(a) - np.sort(b)).mean()
            assert math.isclose(exact, sorted_cost, rel_tol=1e-12, abs_tol=1e-12)

    def test_triangle_inequality(self, rng):
        for _ in range(30):
            m = int(rng.integers(2, 17))
            a, b, c = (EmpiricalSample(rng.standard_normal((m, 2))) for _ in range(3))
            assert wasserstein1(a, c) <= wasserstein1(a, b) + wasserstein1(b, c) + 1e-9

    def test_symmetry(self, rng):
        a = EmpiricalSample(rng.standard_normal((8, 3)))
        b = EmpiricalSample(rng.standard_normal((8, 3)))
        assert math.isclose(wasserstein1(a, b), wasserstein1(b, a), rel_tol=1e-12)

    def test_size_cap(self, rng):
        big = EmpiricalSample(rng.standard_normal((513, 1)))
        with pytest.raises(ValueError, match="cap"):
            wasserstein1(big, big)

    def test_unequal_sizes_rejected(self, rng):
        a = EmpiricalSample(rng.standard_normal((4, 1)))
        b = EmpiricalSample(rng.standard_normal((5, 1)))
        with pytest.raises(ValueError):
            wasserstein1(a, b)

    def test_resampled_weighted_inputs(self, rng):
        # a point mass hidden behind weights: resampling must expose it
        pts = np.array([[0.0], [100.0]])
        a = EmpiricalSample(pts, np.array([1.0, 0.0]))
        b = EmpiricalSample(np.zeros((64, 1)))
        w1 = wasserstein1_resampled(a, b, m=64, rng=rng)
        assert w1 == 0.0


class TestPosteriorSummary:
    def make_system(self, thetas, weights):
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        weights = np.asarray(weights, dtype=float)
        return ParticleSystem(
            thetas=thetas,
            summaries=np.zeros_like(thetas),
            distances=np.full(thetas.shape[0], 0.1),
            weights_unnormalized=weights,
            weights=weights,
            iteration=1,
            delta=1.0,
        )

    def test_uniform_weights_match_unweighted(self, rng):
        x = rng.standard_normal((101, 2))
        system = self.make_system(x, np.full(101, 1.0 / 101))
        out = posterior_summary(system)
        assert np.allclose(out["mean"], x.mean(axis=0))
        med = out["quantiles"][2]
        assert np.allclose(med, np.median(x, axis=0), atol=0.05)

    def test_hand_weighted_mean(self):
        system = self.make_system([[0.0], [10.0]], [0.9, 0.1])
        out = posterior_summary(system)
        assert math.isclose(out["mean"][0], 1.0)

    def test_median_small_case(self):
        system = self.make_system([[1.0], [2.0], [3.0]], np.full(3, 1 / 3))
        out = posterior_summary(system)
        assert out["quantiles"][2, 0] == 2.0

    def test_quantiles_monotone_in_p(self, rng):
        x = rng.standard_normal(50)
        w = rng.random(50)
        w /= w.sum()
        q = weighted_quantiles(x, w, np.linspace(0.01, 0.99, 33))
        assert np.all(np.diff(q) >= 0)
