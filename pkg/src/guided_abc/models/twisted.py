"""Twisted-normal prior with Gaussian likelihood (banana-shaped prior)."""

import math

import numpy as np

from .base import Model


class TwistedModel(Model):
    """Gaussian observations around theta under a twisted-normal prior.

    The prior draws theta from N(0, diag(100, 1, ..., 1)) and then shifts
    the second coordinate by b * theta_1^2 - 100 b, which bends the
    (theta_1, theta_2) marginal into a banana.  The log-density below is
    unnormalized; normalized importance weights are invariant to the
    missing constant.
    """

    def __init__(self, d_theta=5, b=0.1, sigma0=1.0, observed=None):
        self.d_theta = int(d_theta)
        if self.d_theta < 2:
            raise ValueError("twisted model needs at least two coordinates")
        self.d_s = self.d_theta
        self.b = float(b)
        self.sigma0 = float(sigma0)
        super().__init__()
        if observed is None:
            observed = np.zeros(self.d_s)
            observed[0] = 10.0
        self._observed = np.asarray(observed, dtype=float)

    def prior_sample(self, rng):
        theta = rng.standard_normal(self.d_theta)
        theta[0] *= 10.0
        theta[1] += self.b * theta[0] ** 2 - 100.0 * self.b
        return theta

    def prior_logpdf(self, theta):
        theta = np.asarray(theta, dtype=float)
        t1, t2 = theta[0], theta[1]
        out = -(t1 ** 2) / 200.0 - (t2 - self.b * t1 ** 2 + 100.0 * self.b) ** 2 / 2.0
        if self.d_theta > 2:
            out -= float(np.sum(theta[2:] ** 2))
        return float(out)

    def simulate(self, theta, rng):
        theta = np.asarray(theta, dtype=float)
        return theta + self.sigma0 * rng.standard_normal(self.d_theta)

    def summarize(self, data):
        return np.asarray(data, dtype=float)

    def observed_summaries(self):
        return self._observed.copy()
