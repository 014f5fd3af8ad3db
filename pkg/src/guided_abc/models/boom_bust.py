"""Recruitment boom-and-bust population model with moment summaries."""

import math

import numpy as np

from ..rngs import data_rng
from .base import Model

N_STEPS = 300
N_DISCARD = 50
N_KEPT = N_STEPS - N_DISCARD


def boom_bust_simulate(theta, rng, n_steps=N_STEPS, n_discard=N_DISCARD, n1=10):
    """Simulate the population series, discarding the burn-in prefix.

    Growth is Poisson below the carrying threshold and a Binomial crash
    above it, plus Poisson immigration noise each step.
    """
    r, kappa, alpha, beta = (float(v) for v in theta)
    series = np.empty(n_steps, dtype=np.int64)
    n = int(n1)
    series[0] = n
    for t in range(1, n_steps):
        if n <= kappa:
            n = int(rng.poisson(n * (1.0 + r)))
        else:
            n = int(rng.binomial(n, alpha))
        n += int(rng.poisson(beta))
        series[t] = n
    return series[n_discard:]


def _moment_block(x):
    """Mean, variance and (guarded) skewness/kurtosis of a series."""
    x = np.asarray(x, dtype=float)
    mean = float(x.mean())
    var = float(x.var(ddof=1)) if x.size > 1 else 0.0
    dev = x - mean
    m2 = float(np.mean(dev ** 2))
    if m2 == 0.0:
        return np.array([mean, var, 0.0, 0.0])
    m3 = float(np.mean(dev ** 3))
    m4 = float(np.mean(dev ** 4))
    return np.array([mean, var, m3 / m2 ** 1.5, m4 / m2 ** 2])


def boom_bust_summaries(y):
    """Twelve summaries: moment blocks of the series, its diffs and ratios."""
    y = np.asarray(y, dtype=float)
    diff = y[1:] - y[:-1]
    ratio = (y[1:] + 1.0) / (y[:-1] + 1.0)
    return np.concatenate([_moment_block(y), _moment_block(diff), _moment_block(ratio)])


class BoomBustModel(Model):
    """Uniform priors on (r, kappa, alpha, beta); MAD-standardized distances."""

    d_theta = 4
    d_s = 12
    wants_mad = True
    mad_default_sims = 5_000

    def __init__(self, theta_true=(0.4, 50.0, 0.09, 0.05), data_seed=20_24):
        super().__init__()
        self.theta_true = np.asarray(theta_true, dtype=float)
        rng = data_rng(data_seed)
        self._observed = boom_bust_summaries(boom_bust_simulate(self.theta_true, rng))

    def prior_sample(self, rng):
        return np.array([
            rng.uniform(0.0, 1.0),
            rng.uniform(10.0, 80.0),
            rng.uniform(0.0, 1.0),
            rng.uniform(0.0, 1.0),
        ])

    def prior_logpdf(self, theta):
        r, kappa, alpha, beta = (float(v) for v in np.asarray(theta, dtype=float))
        if 0.0 <= r <= 1.0 and 10.0 <= kappa <= 80.0 and 0.0 <= alpha <= 1.0 \
                and 0.0 <= beta <= 1.0:
            return -math.log(70.0)
        return -math.inf

    def simulate(self, theta, rng):
        return boom_bust_simulate(theta, rng)

    def summarize(self, data):
        return boom_bust_summaries(data)

    def observed_summaries(self):
        return self._observed.copy()
