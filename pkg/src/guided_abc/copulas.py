"""Gaussian and t copulas, and copula proposals with matched marginals.

A copula proposal is assembled from a target mean vector and covariance
matrix: the correlation matrix drives the copula, while each coordinate
gets a marginal family whose mean and variance match the corresponding
entries.  Sampling follows the inverse-CDF route (copula uniforms,
then per-coordinate quantile transforms) and the density factorizes as
copula density times the product of marginal densities.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from ._validation import as_square_matrix, as_vector, check_choice
from .distributions import (
    MvGaussian,
    MvStudentT,
    _t_logpdf_std,
    params_from_moments,
)
from .stats import correlation_from_covariance, ensure_positive_definite

COPULA_KINDS = frozenset({"gaussian", "t"})

# Uniform draws are kept strictly inside (0, 1) before quantile
# transforms so inverse CDFs stay finite.
U_CLIP = 1e-12


@dataclass(frozen=True)
class CopulaSpec:
    """Copula family: correlation matrix plus dof for the t case."""

    kind: str
    corr: np.ndarray
    nu: float | None = None
    _chol: np.ndarray = field(init=False, repr=False)
    _log_det: float = field(init=False, repr=False)

    def __post_init__(self):
        check_choice(self.kind, COPULA_KINDS, "copula kind")
        r = as_square_matrix(self.corr, "corr")
        if np.any(np.abs(np.diag(r) - 1.0) > 1e-12):
            raise ValueError("correlation matrix must have unit diagonal")
        r, chol = ensure_positive_definite(0.5 * (r + r.T))
        if self.kind == "t":
            if self.nu is None or self.nu <= 0:
                raise ValueError("t copula needs nu > 0")
            object.__setattr__(self, "nu", float(self.nu))
        object.__setattr__(self, "corr", r)
        object.__setattr__(self, "_chol", chol)
        object.__setattr__(self, "_log_det", 2.0 * float(np.log(np.diag(chol)).sum()))

    @property
    def dim(self):
        return self.corr.shape[0]


def copula_sample_u(spec, rng, size=None):
    """Draw from the copula; components are clamped inside (0, 1)."""
    shape = (size, spec.dim) if size is not None else (spec.dim,)
    z = rng.standard_normal(shape)
    x = z @ spec._chol.T if size is not None else spec._chol @ z
    if spec.kind == "t":
        g = rng.chisquare(spec.nu, size=size) / spec.nu
        factor = 1.0 / np.sqrt(g)
        x = x * (factor[:, None] if size is not None else factor)
        u = special.stdtr(spec.nu, x)
    else:
        u = special.ndtr(x)
    return np.clip(u, U_CLIP, 1.0 - U_CLIP)


def copula_logdensity(spec, u):
    """Log-density of the copula at a point in the open unit cube."""
    u = as_vector(u, "u")
    if u.size != spec.dim:
        raise ValueError("u dimension does not match the copula")
    if np.any((u <= 0.0) | (u >= 1.0)):
        raise ValueError("u components must lie strictly inside (0, 1)")
    if spec.kind == "gaussian":
        eta = special.ndtri(u)
        sol = np.linalg.solve(spec._chol, eta)
        quad = sol @ sol - eta @ eta
        return -0.5 * spec._log_det - 0.5 * quad
    x = special.stdtrit(spec.nu, u)
    joint = MvStudentT(np.zeros(spec.dim), spec.corr, spec.nu).logpdf(x)
    return float(joint - np.sum(_t_logpdf_std(spec.nu, x)))


@dataclass(frozen=True)
class CopulaProposal:
    """Copula plus per-coordinate marginals matched to (mean, cov)."""

    copula: CopulaSpec
    marginals: tuple
    source_mean: np.ndarray
    source_cov: np.ndarray

    def __post_init__(self):
        mean = as_vector(self.source_mean, "source_mean")
        cov = as_square_matrix(self.source_cov, "source_cov")
        if len(self.marginals) != mean.size or self.copula.dim != mean.size:
            raise ValueError("marginals, mean and copula dimensions disagree")
        object.__setattr__(self, "marginals", tuple(self.marginals))
        object.__setattr__(self, "source_mean", mean)
        object.__setattr__(self, "source_cov", cov)

    @property
    def dim(self):
        return self.source_mean.size

    def sample(self, rng, size=None):
        u = copula_sample_u(self.copula, rng, size=size)
        if size is None:
            return np.array([f.inv_cdf(u[j]) for j, f in enumerate(self.marginals)])
        out = np.empty_like(u)
        for j, f in enumerate(self.marginals):
            out[:, j] = f.inv_cdf(u[:, j])
        return out

    def logpdf(self, theta):
        theta = as_vector(theta, "theta")
        if theta.size != self.dim:
            raise ValueError("theta dimension does not match the proposal")
        marg = 0.0
        u = np.empty(self.dim)
        for j, f in enumerate(self.marginals):
            lp = float(f.logpdf(theta[j]))
            if not np.isfinite(lp):
                return -np.inf
            marg += lp
            u[j] = f.cdf(theta[j])
        u = np.clip(u, U_CLIP, 1.0 - U_CLIP)
        return float(copula_logdensity(self.copula, u)) + marg


def proposal_from_moments(mean, cov, copula_kind="gaussian", marginal_kind="normal",
                          nu=5.0, marginal_nu=5.0):
    """Assemble a copula proposal preserving ``mean`` and ``diag(cov)``.

    The copula correlation is derived from ``cov``; with a Gaussian copula
    and normal marginals the result is exactly N(mean, cov).
    """
    mean = as_vector(mean, "mean")
    cov = as_square_matrix(cov, "cov")
    cov, _ = ensure_positive_definite(0.5 * (cov + cov.T))
    variances = np.diag(cov)
    if np.any(variances <= 0):
        raise ValueError("cov has a nonpositive variance on the diagonal")
    corr = correlation_from_covariance(cov)
    spec = CopulaSpec(copula_kind, corr, nu=nu if copula_kind == "t" else None)
    marginals = tuple(
        params_from_moments(marginal_kind, mean[j], variances[j], nu=marginal_nu)
        for j in range(mean.size)
    )
    return CopulaProposal(copula=spec, marginals=marginals,
                          source_mean=mean, source_cov=cov)


def copula_proposal_sample(proposal, rng, size=None):
    return proposal.sample(rng, size=size)


def copula_proposal_logpdf(proposal, theta):
    return proposal.logpdf(theta)
