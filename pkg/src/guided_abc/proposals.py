"""The proposal-sampler catalog for sequential ABC.

Two families live here.  Importance-sampling kinds build one global
proposal per iteration (conditionally Gaussian, its variance-optimized
variant, a hybrid of the two, and copula generalizations of all three).
Monte Carlo kinds perturb a particle resampled from the previous
iteration (the baseline covariance kernel, the local-covariance kernel,
a component-wise baseline, and per-coordinate or per-block kernels
conditioned on the remaining coordinates and the observed summaries).

Each fitted proposal exposes ``generate(rng)`` and ``log_density(theta)``;
for the resampling kinds the density is the full mixture over ancestors,
with per-ancestor covariances or variances cached at fit time.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ._validation import as_vector, check_choice
from .copulas import COPULA_KINDS, proposal_from_moments
from .distributions import MARGINAL_KINDS, MvGaussian
from .stats import PD_EPS, conditional_blocks, ensure_positive_definite, weighted_moments

SIS_KINDS = frozenset(
    {"prior", "blocked", "blockedopt", "hybrid", "cop_blocked", "cop_blockedopt", "cop_hybrid"}
)
SMC_KINDS = frozenset(
    {"standard", "olcm", "componentwise", "fullcond", "fullcondopt", "fullcondoptblocked"}
)
PROPOSAL_KINDS = SIS_KINDS | SMC_KINDS
COPULA_PROPOSAL_KINDS = frozenset({"cop_blocked", "cop_blockedopt", "cop_hybrid"})
# Kinds whose fit needs the below-threshold particle subset.
SUBSET_KINDS = frozenset(
    {"olcm", "blockedopt", "cop_blockedopt", "fullcondopt", "fullcondoptblocked"}
)

LOG_2PI = float(np.log(2.0 * np.pi))


class EmptySubsetError(RuntimeError):
    """No previous particle already beats the new threshold."""


@dataclass(frozen=True)
class ProposalSpec:
    """Configuration naming a proposal sampler kind.

    Copula fields must be given exactly for the ``cop_*`` kinds and
    ``block_indices`` (two or more coordinates) exactly for
    ``fullcondoptblocked``.  ``nu`` is the t-copula dof; ``marginal_nu``
    the dof of location-scale-t marginals (defaults to 5 when left unset).
    """

    kind: str
    copula_kind: str | None = None
    marginal_kind: str | None = None
    nu: float | None = None
    marginal_nu: float | None = None
    block_indices: tuple | None = None

    def __post_init__(self):
        check_choice(self.kind, PROPOSAL_KINDS, "proposal kind")
        if self.block_indices is not None:
            object.__setattr__(self, "block_indices", tuple(int(i) for i in self.block_indices))
        is_cop = self.kind in COPULA_PROPOSAL_KINDS
        if is_cop:
            if self.copula_kind is None or self.marginal_kind is None:
                raise ValueError(f"{self.kind} requires copula_kind and marginal_kind")
            check_choice(self.copula_kind, COPULA_KINDS, "copula_kind")
            check_choice(self.marginal_kind, MARGINAL_KINDS, "marginal_kind")
            if self.copula_kind == "t" and (self.nu is None or self.nu <= 0):
                raise ValueError("t copula requires nu > 0")
        else:
            for name in ("copula_kind", "marginal_kind", "nu", "marginal_nu"):
                if getattr(self, name) is not None:
                    raise ValueError(f"{name} is only valid for copula proposal kinds")
        if self.kind == "fullcondoptblocked":
            if self.block_indices is None or len(self.block_indices) < 2:
                raise ValueError("fullcondoptblocked requires block_indices with >= 2 entries")
        elif self.block_indices is not None:
            raise ValueError("block_indices is only valid for fullcondoptblocked")

    def validate_for(self, d_theta):
        if self.block_indices is not None:
            idx = self.block_indices
            if len(set(idx)) != len(idx) or min(idx) < 0 or max(idx) >= d_theta:
                raise ValueError("block_indices out of range or repeated")
        return self

    def to_dict(self):
        out = {"kind": self.kind}
        for name in ("copula_kind", "marginal_kind", "nu", "marginal_nu"):
            if getattr(self, name) is not None:
                out[name] = getattr(self, name)
        if self.block_indices is not None:
            out["block_indices"] = list(self.block_indices)
        return out

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        block = d.pop("block_indices", None)
        return cls(block_indices=tuple(block) if block is not None else None, **d)


def resolve_kind(kind, t):
    """Hybrid kinds switch strategy between the second and later iterations."""
    if kind == "hybrid":
        return "blocked" if t == 2 else "blockedopt"
    if kind == "cop_hybrid":
        return "cop_blocked" if t == 2 else "cop_blockedopt"
    return kind


def n0_subset(system, delta_t):
    """Previous particles whose stored distance already beats ``delta_t``.

    Returns the particles and their renormalized weights; raises
    ``EmptySubsetError`` when no particle qualifies, which callers treat
    as a stopping condition.
    """
    mask = np.asarray(system.distances) < delta_t
    if not np.any(mask):
        raise EmptySubsetError(f"no particle has distance below {delta_t!r}")
    thetas = np.atleast_2d(np.asarray(system.thetas, dtype=float))[mask]
    gammas = np.asarray(system.weights, dtype=float)[mask]
    total = gammas.sum()
    if total <= 0:
        raise EmptySubsetError("below-threshold particles carry zero weight")
    return thetas, gammas / total


def _norm_logpdf(x, mean, var):
    return -0.5 * (LOG_2PI + np.log(var) + (x - mean) ** 2 / var)


def _ancestor_index(cum_weights, rng):
    j = int(np.searchsorted(cum_weights, rng.random(), side="right"))
    return min(j, cum_weights.size - 1)


def _joint_moments(system):
    """Weighted moments of the stacked (theta, s) particles."""
    thetas = np.atleast_2d(np.asarray(system.thetas, dtype=float))
    summaries = np.atleast_2d(np.asarray(system.summaries, dtype=float))
    stacked = np.hstack([thetas, summaries])
    return weighted_moments(stacked, system.weights, d_theta=thetas.shape[1])


def _joint_conditional(system, s_y):
    """Moments of stacked (theta, s) and the summary-conditioned Gaussian."""
    moments = _joint_moments(system)
    d_theta = moments.d_theta
    kept = np.arange(d_theta)
    observed = np.arange(d_theta, moments.dim)
    reg, cond_cov = conditional_blocks(moments.cov, kept, observed)
    cond_mean = moments.mean_theta + reg @ (np.asarray(s_y, float) - moments.mean_s)
    return moments, cond_mean, cond_cov


class PriorProposal:
    """Propose straight from the prior; importance weights are flat."""

    kind = "prior"
    is_smc = False

    def __init__(self, prior_sample, prior_logpdf):
        self._sample = prior_sample
        self._logpdf = prior_logpdf

    def generate(self, rng):
        return np.atleast_1d(np.asarray(self._sample(rng), dtype=float)), None

    def log_density(self, theta):
        return float(self._logpdf(theta))


class GaussianGlobalProposal:
    """Global Gaussian proposal (conditioned mean, chosen covariance)."""

    is_smc = False

    def __init__(self, kind, gaussian):
        self.kind = kind
        self.gaussian = gaussian

    def generate(self, rng):
        return self.gaussian.sample(rng), None

    def log_density(self, theta):
        return float(self.gaussian.logpdf(theta))


class CopulaGlobalProposal:
    """Global copula proposal with moment-matched marginals."""

    is_smc = False

    def __init__(self, kind, proposal):
        self.kind = kind
        self.proposal = proposal

    def generate(self, rng):
        return self.proposal.sample(rng), None

    def log_density(self, theta):
        return float(self.proposal.logpdf(theta))


class _MixtureProposal:
    """Shared ancestor bookkeeping for the resampling kinds."""

    is_smc = True

    def __init__(self, thetas, weights):
        self.thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        self.weights = np.asarray(weights, dtype=float)
        self._cum = np.cumsum(self.weights)
        self._cum[-1] = 1.0
        with np.errstate(divide="ignore"):
            self._log_w = np.log(self.weights)

    @property
    def d_theta(self):
        return self.thetas.shape[1]

    def _mix(self, log_components):
        return float(logsumexp(self._log_w + log_components))


class StandardProposal(_MixtureProposal):
    """Perturb a resampled particle with twice the weighted covariance."""

    kind = "standard"

    def __init__(self, thetas, weights, cov2):
        super().__init__(thetas, weights)
        self.cov2, self.chol = ensure_positive_definite(cov2)
        self._log_det = 2.0 * float(np.log(np.diag(self.chol)).sum())

    def generate(self, rng):
        j = _ancestor_index(self._cum, rng)
        z = rng.standard_normal(self.d_theta)
        return self.thetas[j] + self.chol @ z, j

    def log_density(self, theta):
        dev = np.asarray(theta, float) - self.thetas
        sol = np.linalg.solve(self.chol, dev.T)
        maha = np.sum(sol * sol, axis=0)
        comps = -0.5 * (self.d_theta * LOG_2PI + self._log_det + maha)
        return self._mix(comps)


class ComponentwiseProposal(_MixtureProposal):
    """Independent per-coordinate perturbation with doubled variances."""

    kind = "componentwise"

    def __init__(self, thetas, weights, tau2):
        super().__init__(thetas, weights)
        self.tau2 = np.maximum(np.asarray(tau2, dtype=float), PD_EPS)

    def generate(self, rng):
        j = _ancestor_index(self._cum, rng)
        z = rng.standard_normal(self.d_theta)
        return self.thetas[j] + np.sqrt(self.tau2) * z, j

    def log_density(self, theta):
        comps = _norm_logpdf(np.asarray(theta, float), self.thetas, self.tau2).sum(axis=1)
        return self._mix(comps)


class OlcmProposal(_MixtureProposal):
    """Local-covariance kernel built from the below-threshold subset."""

    kind = "olcm"

    def __init__(self, thetas, weights, subset_thetas, subset_weights):
        super().__init__(thetas, weights)
        mu = subset_weights @ subset_thetas
        m2 = subset_thetas.T @ (subset_thetas * subset_weights[:, None])
        n, d = self.thetas.shape
        covs = np.empty((n, d, d))
        chols = np.empty((n, d, d))
        for j in range(n):
            tj = self.thetas[j]
            cov_j = m2 - np.outer(tj, mu) - np.outer(mu, tj) + np.outer(tj, tj)
            covs[j], chols[j] = ensure_positive_definite(0.5 * (cov_j + cov_j.T))
        self.covs = covs
        self.chols = chols
        diag = np.diagonal(chols, axis1=1, axis2=2)
        self._log_dets = 2.0 * np.log(diag).sum(axis=1)

    def generate(self, rng):
        j = _ancestor_index(self._cum, rng)
        z = rng.standard_normal(self.d_theta)
        return self.thetas[j] + self.chols[j] @ z, j

    def log_density(self, theta):
        dev = np.asarray(theta, float) - self.thetas
        sol = np.linalg.solve(self.chols, dev[:, :, None])[:, :, 0]
        maha = np.sum(sol * sol, axis=1)
        comps = -0.5 * (self.d_theta * LOG_2PI + self._log_dets + maha)
        return self._mix(comps)


class FullCondProposal(_MixtureProposal):
    """Per-coordinate kernels conditioned on the other coordinates and s_y.

    Means are ancestor-specific (cached as a matrix), variances are the
    global conditional variances.
    """

    kind = "fullcond"

    def __init__(self, thetas, weights, cond_means, cond_vars):
        super().__init__(thetas, weights)
        self.cond_means = cond_means
        self.cond_vars = np.maximum(np.asarray(cond_vars, dtype=float), PD_EPS)

    def _vars_for(self, j):
        return self.cond_vars

    def generate(self, rng):
        j = _ancestor_index(self._cum, rng)
        z = rng.standard_normal(self.d_theta)
        return self.cond_means[j] + np.sqrt(self._vars_for(j)) * z, j

    def log_density(self, theta):
        theta = np.asarray(theta, float)
        comps = _norm_logpdf(theta, self.cond_means, self._all_vars()).sum(axis=1)
        return self._mix(comps)

    def _all_vars(self):
        return self.cond_vars


class FullCondOptProposal(FullCondProposal):
    """Like ``fullcond`` but with ancestor-specific optimized variances."""

    kind = "fullcondopt"

    def _vars_for(self, j):
        return self.cond_vars[j]

    def _all_vars(self):
        return self.cond_vars


class FullCondOptBlockedProposal(_MixtureProposal):
    """Joint kernel for a coordinate block, per-coordinate for the rest."""

    kind = "fullcondoptblocked"

    def __init__(self, thetas, weights, block, block_means, block_covs,
                 rest, rest_means, rest_vars):
        super().__init__(thetas, weights)
        self.block = np.asarray(block, dtype=int)
        self.rest = np.asarray(rest, dtype=int)
        self.block_means = block_means
        self.rest_means = rest_means
        self.rest_vars = np.maximum(np.asarray(rest_vars, dtype=float), PD_EPS)
        n, b = block_means.shape
        covs = np.empty((n, b, b))
        chols = np.empty((n, b, b))
        for j in range(n):
            covs[j], chols[j] = ensure_positive_definite(
                0.5 * (block_covs[j] + block_covs[j].T)
            )
        self.block_covs = covs
        self.block_chols = chols
        diag = np.diagonal(chols, axis1=1, axis2=2)
        self._block_log_dets = 2.0 * np.log(diag).sum(axis=1)

    def generate(self, rng):
        j = _ancestor_index(self._cum, rng)
        theta = np.empty(self.d_theta)
        zb = rng.standard_normal(self.block.size)
        theta[self.block] = self.block_means[j] + self.block_chols[j] @ zb
        if self.rest.size:
            zr = rng.standard_normal(self.rest.size)
            theta[self.rest] = self.rest_means[j] + np.sqrt(self.rest_vars) * zr
        return theta, j

    def log_density(self, theta):
        theta = np.asarray(theta, float)
        dev = theta[self.block] - self.block_means
        sol = np.linalg.solve(self.block_chols, dev[:, :, None])[:, :, 0]
        maha = np.sum(sol * sol, axis=1)
        comps = -0.5 * (self.block.size * LOG_2PI + self._block_log_dets + maha)
        if self.rest.size:
            comps = comps + _norm_logpdf(
                theta[self.rest], self.rest_means, self.rest_vars
            ).sum(axis=1)
        return self._mix(comps)


def _conditional_mean_table(moments, kept_theta, thetas, s_y):
    """Per-ancestor conditional means of ``kept_theta`` given the rest and s_y.

    Returns ``(means, cond_cov)`` where ``means[j]`` conditions on ancestor
    ``j``'s remaining coordinates together with the observed summaries.
    """
    d_theta, dim = moments.d_theta, moments.dim
    kept = np.asarray(kept_theta, dtype=int)
    other_theta = np.setdiff1d(np.arange(d_theta), kept)
    observed = np.concatenate([other_theta, np.arange(d_theta, dim)])
    reg, cond_cov = conditional_blocks(moments.cov, kept, observed)
    dev_theta = thetas[:, other_theta] - moments.mean[other_theta]
    dev_s = np.asarray(s_y, float) - moments.mean_s
    dev = np.hstack([dev_theta, np.broadcast_to(dev_s, (thetas.shape[0], dev_s.size))])
    means = moments.mean[kept] + dev @ reg.T
    return means, cond_cov


def _optimized_variance_table(subset_thetas, subset_weights, coords, means):
    """Monte Carlo variances around per-ancestor means, per coordinate."""
    tk = subset_thetas[:, coords]
    e1 = subset_weights @ tk
    e2 = subset_weights @ (tk * tk)
    return e2 - 2.0 * means * e1 + means * means


def fit(spec, system, s_y, delta_t, t, prior=None):
    """Build the iteration-``t`` proposal from the previous particle system.

    ``t`` must be at least 2; the first iteration always proposes from the
    prior.  Kinds that need the below-threshold subset raise
    ``EmptySubsetError`` when it is empty.
    """
    if t < 2:
        raise ValueError("proposals are fitted from iteration 2 onwards")
    thetas = np.atleast_2d(np.asarray(system.thetas, dtype=float))
    spec.validate_for(thetas.shape[1])
    kind = resolve_kind(spec.kind, t)
    s_y = as_vector(s_y, "s_y") if s_y is not None else None

    if kind == "prior":
        if prior is None:
            raise ValueError("prior proposal needs (sample, logpdf) callables")
        return PriorProposal(*prior)

    if kind == "standard":
        moments = weighted_moments(thetas, system.weights)
        return StandardProposal(thetas, system.weights, 2.0 * moments.cov)

    if kind == "componentwise":
        moments = weighted_moments(thetas, system.weights)
        return ComponentwiseProposal(thetas, system.weights, 2.0 * np.diag(moments.cov))

    if kind == "olcm":
        sub_thetas, gammas = n0_subset(system, delta_t)
        return OlcmProposal(thetas, system.weights, sub_thetas, gammas)

    if kind in ("blocked", "cop_blocked", "blockedopt", "cop_blockedopt"):
        _, cond_mean, cond_cov = _joint_conditional(system, s_y)
        if kind in ("blockedopt", "cop_blockedopt"):
            sub_thetas, gammas = n0_subset(system, delta_t)
            dev = sub_thetas - cond_mean
            cov = dev.T @ (dev * gammas[:, None])
            cov = 0.5 * (cov + cov.T)
        else:
            cov = cond_cov
        if kind.startswith("cop_"):
            proposal = proposal_from_moments(
                cond_mean, cov,
                copula_kind=spec.copula_kind,
                marginal_kind=spec.marginal_kind,
                nu=spec.nu,
                marginal_nu=spec.marginal_nu,
            )
            return CopulaGlobalProposal(spec.kind, proposal)
        return GaussianGlobalProposal(spec.kind, MvGaussian(cond_mean, cov))

    if kind in ("fullcond", "fullcondopt"):
        moments = _joint_moments(system)
        d_theta = moments.d_theta
        means = np.empty((thetas.shape[0], d_theta))
        global_vars = np.empty(d_theta)
        for k in range(d_theta):
            mk, ck = _conditional_mean_table(moments, [k], thetas, s_y)
            means[:, k] = mk[:, 0]
            global_vars[k] = ck[0, 0]
        if kind == "fullcond":
            return FullCondProposal(thetas, system.weights, means, global_vars)
        sub_thetas, gammas = n0_subset(system, delta_t)
        variances = _optimized_variance_table(
            sub_thetas, gammas, np.arange(d_theta), means
        )
        return FullCondOptProposal(thetas, system.weights, means, variances)

    # fullcondoptblocked
    moments = _joint_moments(system)
    block = np.asarray(spec.block_indices, dtype=int)
    rest = np.setdiff1d(np.arange(moments.d_theta), block)
    sub_thetas, gammas = n0_subset(system, delta_t)
    block_means, _ = _conditional_mean_table(moments, block, thetas, s_y)
    tb = sub_thetas[:, block]
    mu = gammas @ tb
    m2 = tb.T @ (tb * gammas[:, None])
    n = thetas.shape[0]
    block_covs = (
        m2[None, :, :]
        - block_means[:, :, None] * mu[None, None, :]
        - mu[None, :, None] * block_means[:, None, :]
        + block_means[:, :, None] * block_means[:, None, :]
    )
    rest_means = np.empty((n, rest.size))
    rest_vars = np.empty(rest.size)
    for i, k in enumerate(rest):
        mk, ck = _conditional_mean_table(moments, [k], thetas, s_y)
        rest_means[:, i] = mk[:, 0]
        rest_vars[i] = ck[0, 0]
    return FullCondOptBlockedProposal(
        thetas, system.weights, block, block_means, block_covs,
        rest, rest_means, rest_vars,
    )


def generate(fitted, rng, system=None):
    """Draw one proposal; returns ``(theta, ancestor_index_or_None)``."""
    return fitted.generate(rng)


def log_gt(fitted, theta, system=None):
    """Log proposal density of ``theta`` under the fitted sampler."""
    return fitted.log_density(theta)
