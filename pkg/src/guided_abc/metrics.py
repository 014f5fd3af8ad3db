"""Posterior-quality diagnostics: exact Wasserstein-1 and summaries."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from ._validation import as_vector, check_weights

# Exact assignment is kept to modest sample sizes on purpose.
WASSERSTEIN_SIZE_CAP = 512


@dataclass(frozen=True)
class EmpiricalSample:
    """Weighted point cloud; weights default to uniform."""

    points: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("points must be a nonempty M x d array")
        object.__setattr__(self, "points", pts)
        if self.weights is not None:
            w = check_weights(self.weights, "weights")
            if w.size != pts.shape[0]:
                raise ValueError("points and weights lengths disagree")
            object.__setattr__(self, "weights", w)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def is_uniform(self):
        if self.weights is None:
            return True
        return bool(np.allclose(self.weights, 1.0 / self.n, atol=1e-12))

    def resample(self, m, rng):
        """Multinomial resampling to ``m`` uniform-weight points."""
        p = self.weights if self.weights is not None else None
        idx = rng.choice(self.n, size=m, replace=True, p=p)
        return EmpiricalSample(self.points[idx])


def wasserstein1(a, b):
    """Exact order-1 Wasserstein distance between equal-size uniform samples.

    Solves the optimal assignment on the Euclidean cost matrix; inputs
    must already be uniform-weight samples of the same size, at most
    ``WASSERSTEIN_SIZE_CAP`` points each (use ``wasserstein1_resampled``
    for weighted or oversized inputs).
    """
    if not isinstance(a, EmpiricalSample):
        a = EmpiricalSample(a)
    if not isinstance(b, EmpiricalSample):
        b = EmpiricalSample(b)
    if a.n != b.n:
        raise ValueError("samples must have equal sizes")
    if a.n > WASSERSTEIN_SIZE_CAP:
        raise ValueError(f"sample size {a.n} exceeds the cap {WASSERSTEIN_SIZE_CAP}")
    if not (a.is_uniform and b.is_uniform):
        raise ValueError("samples must carry uniform weights")
    cost = cdist(a.points, b.points)
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum() / a.n)


def wasserstein1_resampled(a, b, m=256, rng=None):
    """Wasserstein-1 after multinomial resampling both inputs to size ``m``."""
    if m > WASSERSTEIN_SIZE_CAP:
        raise ValueError(f"subsample size {m} exceeds the cap {WASSERSTEIN_SIZE_CAP}")
    rng = rng if rng is not None else np.random.default_rng(0)
    if not isinstance(a, EmpiricalSample):
        a = EmpiricalSample(a)
    if not isinstance(b, EmpiricalSample):
        b = EmpiricalSample(b)
    a_u = a if (a.is_uniform and a.n == m) else a.resample(m, rng)
    b_u = b if (b.is_uniform and b.n == m) else b.resample(m, rng)
    return wasserstein1(a_u, b_u)


def weighted_quantiles(values, weights, probs):
    """Weighted order-statistic quantiles (first index crossing p)."""
    values = as_vector(values, "values")
    weights = check_weights(weights, "weights")
    if values.size != weights.size:
        raise ValueError("values and weights lengths disagree")
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    cum = np.cumsum(weights[order])
    cum /= cum[-1]
    probs = np.asarray(probs, dtype=float)
    idx = np.searchsorted(cum, probs, side="left")
    idx = np.minimum(idx, values.size - 1)
    return sorted_vals[idx]


POSTERIOR_QUANTILES = (0.025, 0.25, 0.5, 0.75, 0.975)


def posterior_summary(system):
    """Weighted mean and quantiles per parameter coordinate.

    Returns a dict with ``mean`` (d,) and ``quantiles`` (5, d) rows
    ordered as ``POSTERIOR_QUANTILES``.
    """
    thetas = np.atleast_2d(system.thetas)
    weights = check_weights(system.weights, "weights")
    mean = weights @ thetas
    quants = np.stack(
        [weighted_quantiles(thetas[:, j], weights, POSTERIOR_QUANTILES)
         for j in range(thetas.shape[1])],
        axis=1,
    )
    return {"mean": mean, "quantiles": quants, "probs": np.array(POSTERIOR_QUANTILES)}
