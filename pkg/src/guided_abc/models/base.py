"""Shared model interface and distance-scale calibration."""

import numpy as np


class Model:
    """Base class for generative models used by the engine.

    Subclasses provide ``d_theta``, ``d_s``, ``prior_sample(rng)``,
    ``prior_logpdf(theta)``, ``simulate(theta, rng)``, ``summarize(data)``
    and ``observed_summaries()``.  ``distance_scale`` defaults to ones and
    may be replaced by a calibrated scale.
    """

    d_theta = None
    d_s = None
    #: set True for models whose summaries need MAD standardization
    wants_mad = False
    #: calibration sample size used when MAD standardization is on
    mad_default_sims = 10_000

    def __init__(self):
        self.distance_scale = np.ones(self.d_s)

    def prior_sample(self, rng):
        raise NotImplementedError

    def prior_logpdf(self, theta):
        raise NotImplementedError

    def simulate(self, theta, rng):
        raise NotImplementedError

    def summarize(self, data):
        raise NotImplementedError

    def observed_summaries(self):
        raise NotImplementedError

    def set_distance_scale(self, scale):
        scale = np.asarray(scale, dtype=float)
        if scale.shape != (self.d_s,) or np.any(scale <= 0):
            raise ValueError("distance scale must be d_s positive reals")
        self.distance_scale = scale
        return self


def mad_calibrate(model, n_prior_sims, rng):
    """Median absolute deviation of prior-predictive summaries.

    Coordinates whose MAD comes out zero (degenerate summaries) fall back
    to a scale of one so the distance stays defined.
    """
    if n_prior_sims < 2:
        raise ValueError("need at least two prior-predictive simulations")
    sims = np.empty((n_prior_sims, model.d_s))
    for i in range(n_prior_sims):
        theta = model.prior_sample(rng)
        sims[i] = model.summarize(model.simulate(theta, rng))
    med = np.median(sims, axis=0)
    mad = np.median(np.abs(sims - med), axis=0)
    mad[mad == 0.0] = 1.0
    return mad
