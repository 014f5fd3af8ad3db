"""Marginal families and multivariate Gaussian / Student-t distributions.

The six marginal families (triangular, location-scale t, logistic,
Gumbel, uniform, normal) are parameterized from a target mean and
variance so that copula proposals preserve first and second moments.
Univariate normal and t CDFs/quantiles go through ``scipy.special``
(``ndtr``/``ndtri`` and the incomplete-beta based ``stdtr``/``stdtrit``),
which meet the 1e-8 accuracy the samplers rely on.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from ._validation import as_square_matrix, as_vector, check_choice
from .stats import ensure_positive_definite

EULER_GAMMA = float(np.euler_gamma)

MARGINAL_KINDS = frozenset(
    {"triangular", "location-scale-t", "logistic", "gumbel", "uniform", "normal"}
)

LOG_2PI = math.log(2.0 * math.pi)


def t_cdf_1d(nu, x):
    """CDF of a standard Student-t with ``nu`` degrees of freedom."""
    return special.stdtr(nu, x)


def t_inv_cdf_1d(nu, u):
    """Quantile of a standard Student-t with ``nu`` degrees of freedom."""
    return special.stdtrit(nu, u)


def _t_logpdf_std(nu, z):
    return (
        special.gammaln((nu + 1.0) / 2.0)
        - special.gammaln(nu / 2.0)
        - 0.5 * math.log(nu * math.pi)
        - ((nu + 1.0) / 2.0) * np.log1p(np.asarray(z) ** 2 / nu)
    )


@dataclass(frozen=True)
class MarginalFamily:
    """One-dimensional distribution with closed-form pdf/cdf/quantile.

    ``params`` is family-specific: (a, b, c) for triangular, (mu, sigma,
    nu) for location-scale t, (mu, s) for logistic, (loc, scale) for
    Gumbel, (a, b) for uniform, (mu, sigma2) for normal.
    """

    kind: str
    params: tuple

    def __post_init__(self):
        check_choice(self.kind, MARGINAL_KINDS, "marginal kind")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        k, p = self.kind, self.params
        if k == "triangular":
            a, b, c = p
            if not (a < b and a <= c <= b):
                raise ValueError("triangular requires a < b and a <= c <= b")
        elif k == "location-scale-t":
            _, sigma, nu = p
            if sigma <= 0:
                raise ValueError("t scale must be positive")
            if nu <= 2:
                raise ValueError("t needs nu > 2 for a finite variance")
        elif k == "logistic":
            if p[1] <= 0:
                raise ValueError("logistic scale must be positive")
        elif k == "gumbel":
            if p[1] <= 0:
                raise ValueError("gumbel scale must be positive")
        elif k == "uniform":
            if not p[0] < p[1]:
                raise ValueError("uniform requires a < b")
        elif k == "normal":
            if p[1] <= 0:
                raise ValueError("normal variance must be positive")

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        k, p = self.kind, self.params
        if k == "uniform":
            a, b = p
            out = np.where((x >= a) & (x <= b), -math.log(b - a), -np.inf)
            return out
        if k == "normal":
            mu, sigma2 = p
            return -0.5 * (LOG_2PI + math.log(sigma2)) - 0.5 * (x - mu) ** 2 / sigma2
        if k == "logistic":
            mu, s = p
            z = (x - mu) / s
            return -z - math.log(s) - 2.0 * np.logaddexp(0.0, -z)
        if k == "gumbel":
            loc, beta = p
            z = (x - loc) / beta
            return -math.log(beta) - z - np.exp(-z)
        if k == "location-scale-t":
            mu, sigma, nu = p
            return _t_logpdf_std(nu, (x - mu) / sigma) - math.log(sigma)
        a, b, c = p  # triangular
        scalar = x.ndim == 0
        x1 = np.atleast_1d(x)
        pdf = np.zeros_like(x1, dtype=float)
        if c > a:
            mask = (x1 >= a) & (x1 <= c)
            pdf[mask] = 2.0 * (x1[mask] - a) / ((b - a) * (c - a))
        if b > c:
            mask = (x1 > c) & (x1 <= b)
            pdf[mask] = 2.0 * (b - x1[mask]) / ((b - a) * (b - c))
        if c == a:
            pdf[x1 == a] = 2.0 / (b - a)
        with np.errstate(divide="ignore"):
            out = np.log(pdf)
        return float(out[0]) if scalar else out

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        k, p = self.kind, self.params
        if k == "uniform":
            a, b = p
            return np.clip((x - a) / (b - a), 0.0, 1.0)
        if k == "normal":
            mu, sigma2 = p
            return special.ndtr((x - mu) / math.sqrt(sigma2))
        if k == "logistic":
            mu, s = p
            return special.expit((x - mu) / s)
        if k == "gumbel":
            loc, beta = p
            return np.exp(-np.exp(-(x - loc) / beta))
        if k == "location-scale-t":
            mu, sigma, nu = p
            return special.stdtr(nu, (x - mu) / sigma)
        a, b, c = p  # triangular
        out = np.zeros_like(x, dtype=float)
        if c > a:
            mask = (x > a) & (x <= c)
            out = np.where(mask, (x - a) ** 2 / ((b - a) * (c - a)), out)
        if b > c:
            mask = (x > c) & (x < b)
            out = np.where(mask, 1.0 - (b - x) ** 2 / ((b - a) * (b - c)), out)
        return np.where(x >= b, 1.0, out)

    def inv_cdf(self, u):
        u = np.asarray(u, dtype=float)
        if np.any((u < 0.0) | (u > 1.0)):
            raise ValueError("u must lie in [0, 1]")
        k, p = self.kind, self.params
        if k == "uniform":
            a, b = p
            return a + u * (b - a)
        if k == "normal":
            mu, sigma2 = p
            return mu + math.sqrt(sigma2) * special.ndtri(u)
        if k == "logistic":
            mu, s = p
            return mu + s * special.logit(u)
        if k == "gumbel":
            loc, beta = p
            with np.errstate(divide="ignore"):
                return loc - beta * np.log(-np.log(u))
        if k == "location-scale-t":
            mu, sigma, nu = p
            return mu + sigma * special.stdtrit(nu, u)
        a, b, c = p  # triangular
        split = (c - a) / (b - a)
        left = a + np.sqrt(np.maximum(u, 0.0) * (b - a) * (c - a))
        right = b - np.sqrt(np.maximum(1.0 - u, 0.0) * (b - a) * (b - c))
        return np.where(u <= split, left, right)

    def sample(self, u):
        """Inverse-CDF transform of uniform draws ``u``."""
        return self.inv_cdf(u)

    @property
    def support(self):
        k, p = self.kind, self.params
        if k in ("uniform", "triangular"):
            return p[0], p[1]
        return -np.inf, np.inf


def params_from_moments(kind, m, v, nu=None):
    """Build a marginal family with analytic mean ``m`` and variance ``v``.

    Moment-matching maps: t has sigma^2 = (nu - 2) v / nu; logistic scale
    s = sqrt(3 v) / pi; triangular endpoints m +/- sqrt(6 v) with mode m;
    uniform endpoints m +/- sqrt(3 v); Gumbel scale sqrt(6 v) / pi with
    location shifted by the Euler-Mascheroni constant.
    """
    check_choice(kind, MARGINAL_KINDS, "marginal kind")
    m = float(m)
    v = float(v)
    if not np.isfinite(v) or v <= 0:
        raise ValueError(f"variance must be positive and finite, got {v!r}")
    if kind == "normal":
        return MarginalFamily("normal", (m, v))
    if kind == "logistic":
        return MarginalFamily("logistic", (m, math.sqrt(3.0 * v) / math.pi))
    if kind == "uniform":
        h = math.sqrt(3.0 * v)
        return MarginalFamily("uniform", (m - h, m + h))
    if kind == "triangular":
        h = math.sqrt(6.0 * v)
        return MarginalFamily("triangular", (m - h, m + h, m))
    if kind == "gumbel":
        beta = math.sqrt(6.0 * v) / math.pi
        return MarginalFamily("gumbel", (m - beta * EULER_GAMMA, beta))
    # location-scale t
    nu = 5.0 if nu is None else float(nu)
    if nu <= 2:
        raise ValueError(f"location-scale t needs nu > 2, got {nu!r}")
    return MarginalFamily("location-scale-t", (m, math.sqrt((nu - 2.0) * v / nu), nu))


def marginal_sample(family, u):
    return family.inv_cdf(u)


def marginal_logpdf(family, x):
    return family.logpdf(x)


def marginal_cdf(family, x):
    return family.cdf(x)


@dataclass(frozen=True)
class MvGaussian:
    """Multivariate Gaussian with a cached Cholesky factor."""

    mean: np.ndarray
    cov: np.ndarray
    chol: np.ndarray = field(init=False, repr=False)
    _log_det: float = field(init=False, repr=False)

    def __post_init__(self):
        mean = as_vector(self.mean, "mean")
        cov = as_square_matrix(self.cov, "cov")
        if mean.size != cov.shape[0]:
            raise ValueError("mean and cov dimensions disagree")
        cov, chol = ensure_positive_definite(cov)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "chol", chol)
        object.__setattr__(self, "_log_det", 2.0 * float(np.log(np.diag(chol)).sum()))

    @property
    def dim(self):
        return self.mean.size

    def sample(self, rng, size=None):
        if size is None:
            z = rng.standard_normal(self.dim)
            return self.mean + self.chol @ z
        z = rng.standard_normal((size, self.dim))
        return self.mean + z @ self.chol.T

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        dev = np.atleast_2d(x) - self.mean
        sol = np.linalg.solve(self.chol, dev.T)
        maha = np.sum(sol * sol, axis=0)
        out = -0.5 * (self.dim * LOG_2PI + self._log_det + maha)
        return float(out[0]) if x.ndim == 1 else out


@dataclass(frozen=True)
class MvStudentT:
    """Multivariate Student-t with scale matrix and dof ``nu``."""

    mean: np.ndarray
    scale: np.ndarray
    nu: float
    chol: np.ndarray = field(init=False, repr=False)
    _log_det: float = field(init=False, repr=False)

    def __post_init__(self):
        mean = as_vector(self.mean, "mean")
        scale = as_square_matrix(self.scale, "scale")
        if mean.size != scale.shape[0]:
            raise ValueError("mean and scale dimensions disagree")
        if self.nu <= 0:
            raise ValueError("nu must be positive")
        scale, chol = ensure_positive_definite(scale)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "nu", float(self.nu))
        object.__setattr__(self, "chol", chol)
        object.__setattr__(self, "_log_det", 2.0 * float(np.log(np.diag(chol)).sum()))

    @property
    def dim(self):
        return self.mean.size

    def sample(self, rng, size=None):
        shape = (size, self.dim) if size is not None else (self.dim,)
        z = rng.standard_normal(shape)
        g = rng.chisquare(self.nu, size=size) / self.nu
        factor = 1.0 / np.sqrt(g)
        if size is None:
            return self.mean + factor * (self.chol @ z)
        return self.mean + (z @ self.chol.T) * factor[:, None]

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        dev = np.atleast_2d(x) - self.mean
        sol = np.linalg.solve(self.chol, dev.T)
        maha = np.sum(sol * sol, axis=0)
        d, nu = self.dim, self.nu
        out = (
            special.gammaln((nu + d) / 2.0)
            - special.gammaln(nu / 2.0)
            - 0.5 * d * math.log(nu * math.pi)
            - 0.5 * self._log_det
            - ((nu + d) / 2.0) * np.log1p(maha / nu)
        )
        return float(out[0]) if x.ndim == 1 else out


def mvn_sample(g, rng, size=None):
    return g.sample(rng, size=size)


def mvn_logpdf(g, x):
    return g.logpdf(x)


def mvt_sample(t, rng, size=None):
    return t.sample(rng, size=size)


def mvt_logpdf(t, x):
    return t.logpdf(x)
