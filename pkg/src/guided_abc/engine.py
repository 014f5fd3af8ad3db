"""Sequential ABC engines: acceptance loops, weighting, thresholds, stops.

One ``run`` drives both algorithm flavours.  Iteration 1 always proposes
from the prior with unit weights; later iterations fit the configured
proposal sampler, repeat propose/simulate/accept until ``n_particles``
acceptances, and weight the accepted parameters by prior over proposal
density (a mixture density for the resampling kinds).

Randomness is counter-based: proposal number ``c`` of iteration ``t``
always uses the stream derived from ``(seed, run, t, c)``, and an
iteration consumes proposals strictly in counter order up to the one
that produced the final acceptance.  Results are therefore identical
for any number of workers.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import proposals as prop
from ._validation import as_vector, check_weights
from .rngs import proposal_rng

# Rejected-proposal distances kept per iteration for threshold updates.
DISTANCE_RESERVOIR_CAP = 10 ** 6


class StallError(RuntimeError):
    """An iteration exhausted its proposal budget without N acceptances."""


@dataclass(frozen=True)
class ParticleSystem:
    """Accepted, weighted particles of one iteration."""

    thetas: np.ndarray
    summaries: np.ndarray
    distances: np.ndarray
    weights_unnormalized: np.ndarray
    weights: np.ndarray
    iteration: int
    delta: float

    def __post_init__(self):
        thetas = np.atleast_2d(np.asarray(self.thetas, dtype=float))
        summaries = np.atleast_2d(np.asarray(self.summaries, dtype=float))
        distances = as_vector(self.distances, "distances")
        w_un = as_vector(self.weights_unnormalized, "weights_unnormalized")
        w = check_weights(self.weights, "weights")
        n = thetas.shape[0]
        if not (summaries.shape[0] == distances.size == w_un.size == w.size == n):
            raise ValueError("particle system fields disagree on N")
        if n < 1:
            raise ValueError("particle system needs at least one particle")
        if np.any(distances >= self.delta):
            raise ValueError("every accepted particle must beat the threshold")
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "summaries", summaries)
        object.__setattr__(self, "distances", distances)
        object.__setattr__(self, "weights_unnormalized", w_un)
        object.__setattr__(self, "weights", w)

    @property
    def n(self):
        return self.thetas.shape[0]

    @property
    def d_theta(self):
        return self.thetas.shape[1]


@dataclass(frozen=True)
class IterationReport:
    """Per-iteration bookkeeping for diagnostics and reporting."""

    t: int
    delta: float
    n_proposals: int
    acceptance_rate: float
    ess: float
    n_model_simulations: int
    wallclock_seconds: float


@dataclass(frozen=True)
class ThresholdSchedule:
    """Fixed threshold list, or percentile-driven adaptive updates.

    Adaptive mode starts at ``delta1`` and sets each next threshold to the
    ``psi``-th percentile (nearest rank) of the previous iteration's
    distances, falling back to ``0.95 * delta`` whenever the percentile
    fails to decrease; the run stops once the update reaches
    ``delta_stop``.
    """

    deltas: tuple | None = None
    delta1: float | None = None
    psi: float | None = None
    delta_stop: float | None = None

    def __post_init__(self):
        if self.deltas is not None:
            ds = tuple(float(d) for d in self.deltas)
            if len(ds) < 1 or any(b >= a for a, b in zip(ds, ds[1:])):
                raise ValueError("fixed schedule must be strictly decreasing")
            if self.delta1 is not None or self.psi is not None:
                raise ValueError("give either a fixed list or adaptive settings")
            object.__setattr__(self, "deltas", ds)
            return
        if self.delta1 is None or self.psi is None or self.delta_stop is None:
            raise ValueError("adaptive schedule needs delta1, psi and delta_stop")
        if not 0 < self.psi < 100:
            raise ValueError("psi must lie in (0, 100)")
        if not self.delta1 > self.delta_stop > 0:
            raise ValueError("need delta1 > delta_stop > 0")

    @property
    def mode(self):
        return "fixed_list" if self.deltas is not None else "adaptive"

    def initial(self):
        return self.deltas[0] if self.deltas is not None else float(self.delta1)

    def next_delta(self, t, distances_prev, delta_prev):
        """Threshold for iteration ``t`` (t >= 2); None when exhausted."""
        if self.deltas is not None:
            return self.deltas[t - 1] if t - 1 < len(self.deltas) else None
        return update_threshold(self, distances_prev, delta_prev)

    def to_dict(self):
        if self.deltas is not None:
            return {"deltas": list(self.deltas)}
        return {"delta1": self.delta1, "psi": self.psi, "delta_stop": self.delta_stop}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "deltas" in d:
            return cls(deltas=tuple(d["deltas"]))
        return cls(**d)


@dataclass(frozen=True)
class StoppingRules:
    """Optional stopping rules layered on top of the schedule."""

    max_iterations: int | None = None
    acceptance_floor: float = 0.015
    acceptance_floor_enabled: bool = False
    max_proposals_per_iteration: int | None = None

    def proposal_budget(self, n_particles):
        if self.max_proposals_per_iteration is not None:
            return int(self.max_proposals_per_iteration)
        return DISTANCE_RESERVOIR_CAP * n_particles

    def to_dict(self):
        return {
            "max_iterations": self.max_iterations,
            "acceptance_floor": self.acceptance_floor,
            "acceptance_floor_enabled": self.acceptance_floor_enabled,
            "max_proposals_per_iteration": self.max_proposals_per_iteration,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**dict(d))


@dataclass
class RunResult:
    """Everything a finished run produced."""

    final: ParticleSystem
    reports: list
    systems: list
    stop_reason: str
    iteration_distances: list = field(default_factory=list)


def ess(weights):
    """Effective sample size 1 / sum(w^2) of normalized weights."""
    w = check_weights(weights, "weights")
    return float(1.0 / np.sum(w * w))


def nearest_rank_percentile(values, psi):
    """The psi-th percentile as the ceil(psi/100 * n)-th order statistic."""
    values = np.sort(np.asarray(values, dtype=float))
    n = values.size
    if n == 0:
        raise ValueError("need at least one value")
    rank = int(np.ceil(psi / 100.0 * n))
    rank = min(max(rank, 1), n)
    return float(values[rank - 1])


def update_threshold(schedule, distances, delta_prev):
    """Percentile update with the multiplicative fallback.

    Takes the psi-th nearest-rank percentile of all distances produced at
    the previous iteration (rejected proposals included); if that does not
    decrease the threshold, shrink by factor 0.95 instead.
    """
    candidate = nearest_rank_percentile(distances, schedule.psi)
    return candidate if candidate < delta_prev else 0.95 * float(delta_prev)


def check_stop(reports, schedule, rules, next_delta=None):
    """Stop reason given the reports so far, or None to continue.

    ``next_delta`` is the candidate threshold for the upcoming iteration
    when the caller has already computed it (None otherwise).
    """
    t_done = len(reports)
    if next_delta is not None:
        if schedule.mode == "adaptive" and next_delta <= schedule.delta_stop:
            return "delta_stop"
    if schedule.mode == "fixed_list" and t_done >= len(schedule.deltas):
        return "schedule_exhausted"
    if rules.max_iterations is not None and t_done >= rules.max_iterations:
        return "max_iterations"
    if rules.acceptance_floor_enabled and t_done >= 2:
        last_two = [r.acceptance_rate for r in reports[-2:]]
        if all(r < rules.acceptance_floor for r in last_two):
            return "acceptance_floor"
    return None


def resample_equal_weight(system, m, rng):
    """Multinomial resampling to ``m`` equally weighted parameter draws."""
    idx = rng.choice(system.n, size=m, replace=True, p=system.weights)
    return system.thetas[idx]


def scaled_distance(s, s_y, scale):
    """Euclidean distance between summaries after per-coordinate scaling."""
    diff = (np.asarray(s, float) - s_y) / scale
    return float(np.sqrt(np.sum(diff * diff)))


@dataclass(frozen=True)
class _ProposalContext:
    """Everything a worker needs to evaluate one proposal counter."""

    model: object
    s_y: np.ndarray
    scale: np.ndarray
    fitted: object
    delta: float
    seed: int
    run_index: int
    t: int


def _evaluate_counter(ctx, counter):
    """Evaluate proposal ``counter``: returns (theta, s, distance) or marker.

    A None theta marks a prior-zero proposal (no simulation spent).
    """
    rng = proposal_rng(ctx.seed, ctx.run_index, ctx.t, counter)
    if ctx.fitted is None:
        theta = np.atleast_1d(np.asarray(ctx.model.prior_sample(rng), dtype=float))
    else:
        theta, _ = ctx.fitted.generate(rng)
        if not np.isfinite(ctx.model.prior_logpdf(theta)):
            return None, None, 0.0
    data = ctx.model.simulate(theta, rng)
    s = np.atleast_1d(np.asarray(ctx.model.summarize(data), dtype=float))
    dist = scaled_distance(s, ctx.s_y, ctx.scale)
    return theta, s, dist


def _evaluate_chunk(ctx, start, stop):
    return [_evaluate_counter(ctx, c) for c in range(start, stop)]


def _acceptance_loop(ctx, n_target, budget, pool=None, workers=1):
    """Consume proposal counters in order until ``n_target`` acceptances.

    Returns accepted (thetas, summaries, distances), the distances of all
    consumed proposals (reservoir-capped), the number of proposals
    consumed, and the number of model simulations spent.
    """
    accepted_theta, accepted_s, accepted_d = [], [], []
    all_distances = []
    n_proposals = 0
    n_sims = 0
    counter = 0
    batch = max(64, n_target)

    def consume(result):
        nonlocal n_proposals, n_sims
        theta, s, dist = result
        n_proposals += 1
        if theta is None:
            return False
        n_sims += 1
        if len(all_distances) < DISTANCE_RESERVOIR_CAP:
            all_distances.append(dist)
        if dist < ctx.delta:
            accepted_theta.append(theta)
            accepted_s.append(s)
            accepted_d.append(dist)
        return len(accepted_theta) == n_target

    done = False
    while not done:
        if n_proposals >= budget:
            raise StallError(
                f"iteration t={ctx.t} exhausted its proposal budget ({budget})"
            )
        if pool is None:
            done = consume(_evaluate_counter(ctx, counter))
            counter += 1
            continue
        batch = int(max(1, min(batch, budget - n_proposals)))
        stops = np.unique(
            np.linspace(counter, counter + batch, num=min(workers, batch) + 1).astype(int)
        )
        chunks = pool.map(
            _evaluate_chunk,
            [ctx] * (len(stops) - 1),
            stops[:-1].tolist(),
            stops[1:].tolist(),
        )
        for chunk in chunks:
            for result in chunk:
                done = consume(result)
                if done:
                    break
            if done:
                break
        counter += batch
        # Grow the batch toward the expected remaining effort.
        acc = max(len(accepted_theta), 1)
        remaining = n_target - len(accepted_theta)
        if remaining > 0:
            batch = int(np.clip(1.3 * remaining * n_proposals / acc, 64, 65536))
    return (
        np.asarray(accepted_theta),
        np.asarray(accepted_s),
        np.asarray(accepted_d),
        np.asarray(all_distances),
        n_proposals,
        n_sims,
    )


def _log_weights(model, fitted, thetas):
    """Log unnormalized importance weights of accepted particles."""
    if fitted is None:
        return np.zeros(thetas.shape[0])
    out = np.empty(thetas.shape[0])
    for i, theta in enumerate(thetas):
        out[i] = model.prior_logpdf(theta) - fitted.log_density(theta)
    return out


def run(model, proposal_spec, schedule, n_particles, seed, s_y=None,
        stop=None, workers=1, run_index=0, keep_distances=False):
    """Run a full sequential ABC inference.

    ``s_y`` defaults to the model's own observed summaries.  Returns a
    ``RunResult`` with the final particle system, per-iteration reports,
    all per-iteration particle snapshots and the stop reason.
    """
    if n_particles < 2:
        raise ValueError("need at least two particles")
    stop = stop or StoppingRules()
    if isinstance(proposal_spec, str):
        proposal_spec = prop.ProposalSpec(kind=proposal_spec)
    s_y = as_vector(s_y if s_y is not None else model.observed_summaries(), "s_y")
    scale = as_vector(model.distance_scale, "distance_scale")
    if np.any(scale <= 0):
        raise ValueError("distance scale must be strictly positive")
    budget = stop.proposal_budget(n_particles)

    reports = []
    systems = []
    per_iter_distances = []
    stop_reason = None
    prev_distances = None
    delta = schedule.initial()
    t = 1
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while True:
            tic = time.perf_counter()
            if t == 1:
                fitted = None
            else:
                delta_new = schedule.next_delta(t, prev_distances, delta)
                if delta_new is None:
                    stop_reason = "schedule_exhausted"
                    break
                reason = check_stop(reports, schedule, stop, next_delta=delta_new)
                if reason is not None:
                    stop_reason = reason
                    break
                delta = float(delta_new)
                try:
                    fitted = prop.fit(
                        proposal_spec, systems[-1], s_y, delta, t,
                        prior=(model.prior_sample, model.prior_logpdf),
                    )
                except prop.EmptySubsetError:
                    stop_reason = "n0_empty"
                    break
            ctx = _ProposalContext(
                model=model, s_y=s_y, scale=scale, fitted=fitted,
                delta=delta, seed=seed, run_index=run_index, t=t,
            )
            thetas, summaries, dists, all_d, n_prop, n_sims = _acceptance_loop(
                ctx, n_particles, budget, pool=pool, workers=workers
            )
            log_w = _log_weights(model, fitted, thetas)
            log_norm = logsumexp(log_w)
            weights = np.exp(log_w - log_norm)
            weights /= weights.sum()
            system = ParticleSystem(
                thetas=thetas,
                summaries=summaries,
                distances=dists,
                weights_unnormalized=np.exp(log_w),
                weights=weights,
                iteration=t,
                delta=delta,
            )
            report = IterationReport(
                t=t,
                delta=delta,
                n_proposals=n_prop,
                acceptance_rate=n_particles / n_prop,
                ess=ess(weights),
                n_model_simulations=n_sims,
                wallclock_seconds=time.perf_counter() - tic,
            )
            systems.append(system)
            reports.append(report)
            if keep_distances:
                per_iter_distances.append(all_d)
            prev_distances = all_d
            reason = check_stop(reports, schedule, stop, next_delta=None)
            if reason is not None:
                stop_reason = reason
                break
            t += 1
    finally:
        if pool is not None:
            pool.shutdown()
    return RunResult(
        final=systems[-1],
        reports=reports,
        systems=systems,
        stop_reason=stop_reason,
        iteration_distances=per_iter_distances,
    )
