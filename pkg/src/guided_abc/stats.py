"""Weighted moments, Gaussian conditioning and positive-definiteness repair.

These are the linear-algebra primitives every proposal sampler is built
from: the weighted mean/covariance of stacked (parameter, summary)
particles, Schur-complement conditioning of a joint Gaussian on a subset
of coordinates, and an eigenvalue-clamping repair that makes empirical
covariance matrices safe to factorize.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import as_matrix, as_square_matrix, as_vector, check_weights

# Relative floor used when clamping eigenvalues during PD repair.  The
# value is a pragmatic choice: small enough not to distort healthy
# matrices, large enough that Cholesky succeeds afterwards.
PD_EPS = 1e-10


class DegenerateWeightsError(ValueError):
    """Weights put (almost) all mass on one point; covariance undefined."""


class SingularConditioningError(ValueError):
    """The conditioning block is singular even after PD repair."""


@dataclass(frozen=True)
class JointMoments:
    """Weighted mean and covariance of stacked (theta, s) particles.

    ``d_theta`` leading coordinates are parameters, the remaining ``d_s``
    are summaries; block accessors slice accordingly.
    """

    mean: np.ndarray
    cov: np.ndarray
    d_theta: int
    d_s: int

    def __post_init__(self):
        mean = as_vector(self.mean, "mean")
        cov = as_square_matrix(self.cov, "cov")
        if mean.size != cov.shape[0]:
            raise ValueError("mean and cov dimensions disagree")
        if self.d_theta + self.d_s != mean.size:
            raise ValueError("d_theta + d_s must equal the joint dimension")
        cov = 0.5 * (cov + cov.T)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self):
        return self.mean.size

    @property
    def mean_theta(self):
        return self.mean[: self.d_theta]

    @property
    def mean_s(self):
        return self.mean[self.d_theta:]

    @property
    def cov_theta(self):
        return self.cov[: self.d_theta, : self.d_theta]

    @property
    def cov_s(self):
        return self.cov[self.d_theta:, self.d_theta:]

    @property
    def cov_theta_s(self):
        return self.cov[: self.d_theta, self.d_theta:]

    @property
    def cov_s_theta(self):
        return self.cov_theta_s.T


@dataclass(frozen=True)
class ConditionalGaussian:
    """Mean and covariance of a Gaussian after conditioning."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = as_vector(self.mean, "mean")
        cov = as_square_matrix(self.cov, "cov")
        if mean.size != cov.shape[0]:
            raise ValueError("mean and cov dimensions disagree")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


def weighted_moments(points, weights, d_theta=None):
    """Weighted mean and covariance of ``points`` (rows are particles).

    The covariance uses the unbiased normalization 1/(1 - sum(w^2)) and is
    symmetrized.  Weights must be normalized; configurations with
    sum(w^2) >= 1 - 1e-12 (all mass on one point) are rejected because the
    covariance divisor vanishes.
    """
    x = as_matrix(np.atleast_2d(np.asarray(points, dtype=float)), "points")
    w = check_weights(weights, "weights")
    n, d = x.shape
    if n < 2:
        raise ValueError("need at least two points")
    if w.size != n:
        raise ValueError("points and weights lengths disagree")
    w2 = float(np.sum(w * w))
    if w2 >= 1.0 - 1e-12:
        raise DegenerateWeightsError(
            f"sum of squared weights is {w2!r}; covariance divisor vanishes"
        )
    mean = w @ x
    centered = x - mean
    cov = centered.T @ (centered * w[:, None])
    cov /= 1.0 - w2
    cov = 0.5 * (cov + cov.T)
    if d_theta is None:
        d_theta = d
    return JointMoments(mean=mean, cov=cov, d_theta=d_theta, d_s=d - d_theta)


def ensure_positive_definite(m, eps_scale=PD_EPS):
    """Return ``(repaired, lower_cholesky)`` for a symmetric matrix.

    A matrix that already factorizes is returned unchanged.  Otherwise its
    eigenvalues are clamped from below at ``eps_scale * max(1, ||m||_F)``
    and the result re-factorized.
    """
    m = as_square_matrix(m, "matrix")
    scale = max(1.0, float(np.abs(m).max()))
    if not np.allclose(m, m.T, atol=1e-8 * scale, rtol=0.0):
        raise ValueError("matrix is not symmetric")
    try:
        chol = np.linalg.cholesky(m)
        return m, chol
    except np.linalg.LinAlgError:
        pass
    sym = 0.5 * (m + m.T)
    eps = eps_scale * max(1.0, float(np.linalg.norm(sym, "fro")))
    eigvals, eigvecs = np.linalg.eigh(sym)
    clamped = np.maximum(eigvals, eps)
    repaired = (eigvecs * clamped) @ eigvecs.T
    repaired = 0.5 * (repaired + repaired.T)
    chol = np.linalg.cholesky(repaired)
    return repaired, chol


def correlation_from_covariance(s):
    """Correlation matrix of a covariance matrix with positive diagonal."""
    s = as_square_matrix(s, "covariance")
    diag = np.diag(s)
    if np.any(diag <= 0):
        raise ValueError("covariance has a nonpositive diagonal entry")
    inv_sd = 1.0 / np.sqrt(diag)
    r = s * np.outer(inv_sd, inv_sd)
    r = np.clip(r, -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    return 0.5 * (r + r.T)


def conditional_blocks(cov, kept, observed):
    """Regression matrix and conditional covariance for index partitions.

    Returns ``(reg, cond_cov)`` with ``reg = S_AB S_BB^{-1}`` so that the
    conditional mean is ``m_A + reg @ (x_B - m_B)`` and ``cond_cov`` is the
    Schur complement ``S_AA - reg @ S_BA`` (repaired to PSD, symmetrized).
    """
    cov = as_square_matrix(cov, "cov")
    kept = np.asarray(kept, dtype=int)
    observed = np.asarray(observed, dtype=int)
    if kept.size == 0 or np.intersect1d(kept, observed).size:
        raise ValueError("kept and observed index sets must be disjoint and nonempty")
    s_aa = cov[np.ix_(kept, kept)]
    s_ab = cov[np.ix_(kept, observed)]
    s_bb = cov[np.ix_(observed, observed)]
    if observed.size == 0:
        return np.zeros((kept.size, 0)), 0.5 * (s_aa + s_aa.T)
    s_bb_pd, chol = ensure_positive_definite(0.5 * (s_bb + s_bb.T))
    if not np.all(np.isfinite(chol)):
        raise SingularConditioningError("conditioning block is not invertible")
    # reg = S_AB S_BB^{-1} via two triangular solves on the transpose.
    tmp = np.linalg.solve(chol, s_ab.T)
    reg = np.linalg.solve(chol.T, tmp).T
    cond = s_aa - reg @ s_ab.T
    cond = 0.5 * (cond + cond.T)
    cond, _ = ensure_positive_definite(cond)
    return reg, cond


def condition_gaussian(mean, cov, kept, observed, observed_values):
    """Condition a joint Gaussian on ``observed`` coordinates.

    ``mean``/``cov`` may be a ``JointMoments`` (via its fields) or any
    vector/matrix pair; ``kept`` and ``observed`` are disjoint index sets
    into the joint coordinates.
    """
    if isinstance(mean, JointMoments):
        mean, cov = mean.mean, mean.cov
    mean = as_vector(mean, "mean")
    cov = as_square_matrix(cov, "cov")
    if mean.size != cov.shape[0]:
        raise ValueError("mean and cov dimensions disagree")
    kept = np.asarray(kept, dtype=int)
    observed = np.asarray(observed, dtype=int)
    values = as_vector(observed_values, "observed_values")
    if values.size != observed.size:
        raise ValueError("observed_values length must match observed index set")
    if kept.size and kept.max() >= mean.size or observed.size and observed.max() >= mean.size:
        raise ValueError("index out of range for the joint dimension")
    reg, cond_cov = conditional_blocks(cov, kept, observed)
    cond_mean = mean[kept] + reg @ (values - mean[observed])
    return ConditionalGaussian(mean=cond_mean, cov=cond_cov)
