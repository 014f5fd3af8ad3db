"""Two-moons model: bimodal posterior with crescent-shaped geometry."""

import math

import numpy as np

from .base import Model

SQRT2 = math.sqrt(2.0)


def two_moons_simulate(theta, rng):
    """One draw of the two-moons generative process.

    A point on a noisy half-circle of radius ~0.1 around (0.25, 0) is
    shifted by (-|t1 + t2|, -t1 + t2) / sqrt(2).
    """
    t1, t2 = float(theta[0]), float(theta[1])
    a = rng.uniform(-math.pi / 2.0, math.pi / 2.0)
    r = rng.normal(0.1, 0.01)
    p = np.array([r * math.cos(a) + 0.25, r * math.sin(a)])
    offset = np.array([-abs(t1 + t2) / SQRT2, (-t1 + t2) / SQRT2])
    return p + offset


class TwoMoonsModel(Model):
    """Uniform(-1, 1)^2 prior; summaries are the simulated point itself."""

    d_theta = 2
    d_s = 2

    def __init__(self, observed=(0.0, 0.0)):
        super().__init__()
        self._observed = np.asarray(observed, dtype=float)

    def prior_sample(self, rng):
        return rng.uniform(-1.0, 1.0, size=2)

    def prior_logpdf(self, theta):
        theta = np.asarray(theta, dtype=float)
        if np.all(np.abs(theta) <= 1.0):
            return 2.0 * math.log(0.5)
        return -math.inf

    def simulate(self, theta, rng):
        return two_moons_simulate(theta, rng)

    def summarize(self, data):
        return np.asarray(data, dtype=float)

    def observed_summaries(self):
        return self._observed.copy()
