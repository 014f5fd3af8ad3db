"""Estimator-style front end so runs compose with the sklearn ecosystem."""

import numpy as np
from sklearn.base import BaseEstimator

from .engine import StoppingRules, ThresholdSchedule, resample_equal_weight, run
from .metrics import posterior_summary
from .models import Model, get_model
from .proposals import ProposalSpec
from .rngs import PURPOSE_RESAMPLE, stream


class SequentialABC(BaseEstimator):
    """Sequential ABC sampler with a configurable proposal kind.

    Parameters mirror the run configuration: a registered model name (or
    a ``Model`` instance), the proposal kind with its copula options, a
    threshold schedule given either as a fixed decreasing list
    (``deltas``) or adaptively (``delta1``/``psi``/``delta_stop``), and
    the particle count and seed.  ``fit`` runs the inference against the
    observed summaries and exposes the weighted posterior particles.

    Attributes set by ``fit``: ``particles_``, ``weights_``,
    ``posterior_mean_``, ``reports_``, ``systems_``, ``stop_reason_``.
    """

    def __init__(self, model="two_moons", proposal="blocked", n_particles=1000,
                 deltas=None, delta1=None, psi=None, delta_stop=None, seed=0,
                 copula_kind=None, marginal_kind=None, nu=None, marginal_nu=None,
                 block_indices=None, max_iterations=None,
                 acceptance_floor_enabled=False, acceptance_floor=0.015,
                 workers=1):
        self.model = model
        self.proposal = proposal
        self.n_particles = n_particles
        self.deltas = deltas
        self.delta1 = delta1
        self.psi = psi
        self.delta_stop = delta_stop
        self.seed = seed
        self.copula_kind = copula_kind
        self.marginal_kind = marginal_kind
        self.nu = nu
        self.marginal_nu = marginal_nu
        self.block_indices = block_indices
        self.max_iterations = max_iterations
        self.acceptance_floor_enabled = acceptance_floor_enabled
        self.acceptance_floor = acceptance_floor
        self.workers = workers

    def _resolved(self):
        model = self.model if isinstance(self.model, Model) else get_model(self.model)
        spec = ProposalSpec(
            kind=self.proposal,
            copula_kind=self.copula_kind,
            marginal_kind=self.marginal_kind,
            nu=self.nu,
            marginal_nu=self.marginal_nu,
            block_indices=tuple(self.block_indices) if self.block_indices else None,
        )
        if self.deltas is not None:
            schedule = ThresholdSchedule(deltas=tuple(self.deltas))
        else:
            schedule = ThresholdSchedule(
                delta1=self.delta1, psi=self.psi, delta_stop=self.delta_stop
            )
        stop = StoppingRules(
            max_iterations=self.max_iterations,
            acceptance_floor=self.acceptance_floor,
            acceptance_floor_enabled=self.acceptance_floor_enabled,
        )
        return model, spec, schedule, stop

    def fit(self, X=None, y=None):
        """Run the inference; ``X`` is the observed summary vector.

        When ``X`` is None the model's own observed summaries are used.
        """
        model, spec, schedule, stop = self._resolved()
        s_y = None
        if X is not None:
            s_y = np.asarray(X, dtype=float).reshape(-1)
            if s_y.size != model.d_s:
                raise ValueError(
                    f"expected {model.d_s} observed summaries, got {s_y.size}"
                )
        result = run(
            model, spec, schedule, self.n_particles, seed=self.seed,
            s_y=s_y, stop=stop, workers=self.workers,
        )
        self.model_ = model
        self.particles_ = result.final.thetas
        self.weights_ = result.final.weights
        self.posterior_mean_ = posterior_summary(result.final)["mean"]
        self.reports_ = result.reports
        self.systems_ = result.systems
        self.stop_reason_ = result.stop_reason
        return self

    def sample(self, n, seed=0):
        """Equal-weight posterior draws from the fitted particle system."""
        if not hasattr(self, "systems_"):
            raise RuntimeError("call fit before sampling")
        rng = stream(seed, 0, PURPOSE_RESAMPLE)
        return resample_equal_weight(self.systems_[-1], n, rng)
