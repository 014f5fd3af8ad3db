"""Lattice model of cell motility and proliferation.

Cells live on a rectangular lattice with at most one cell per site.
Each step, every cell (in row-major snapshot order) attempts a move to a
uniformly chosen 4-neighbor with probability ``p_move`` (failing if the
target is occupied or off-lattice) and then attempts to place a daughter
in a uniformly chosen neighbor with probability ``p_prolif`` (same
failure rule).  Summaries are the per-step Hamming distances between
consecutive lattices plus the final cell count.

The inner per-cell loop is compiled with numba; all randomness is drawn
from the caller's generator before each step so results do not depend on
the compiled code path.
"""

import math

import numpy as np
from numba import njit

from ..rngs import data_rng
from .base import Model


@njit(cache=True)
def _apply_step(lattice, xs, ys, u_move, dir_move, u_prolif, dir_prolif,
                p_move, p_prolif):
    rows, cols = lattice.shape
    for i in range(xs.size):
        x = xs[i]
        y = ys[i]
        if u_move[i] < p_move:
            d = dir_move[i]
            nx = x + (1 if d == 2 else (-1 if d == 0 else 0))
            ny = y + (1 if d == 1 else (-1 if d == 3 else 0))
            if 0 <= nx < rows and 0 <= ny < cols and lattice[nx, ny] == 0:
                lattice[x, y] = 0
                lattice[nx, ny] = 1
                x = nx
                y = ny
        if u_prolif[i] < p_prolif:
            d = dir_prolif[i]
            nx = x + (1 if d == 2 else (-1 if d == 0 else 0))
            ny = y + (1 if d == 1 else (-1 if d == 3 else 0))
            if 0 <= nx < rows and 0 <= ny < cols and lattice[nx, ny] == 0:
                lattice[nx, ny] = 1


def cell_simulate(theta, rng, rows=27, cols=36, n_steps=144, n_initial=110,
                  initial_rows=13):
    """Run the lattice for ``n_steps``; returns (hamming, counts) arrays."""
    p_move, p_prolif = float(theta[0]), float(theta[1])
    lattice = np.zeros((rows, cols), dtype=np.uint8)
    sites = rng.choice(initial_rows * cols, size=n_initial, replace=False)
    lattice[sites // cols, sites % cols] = 1
    hamming = np.empty(n_steps, dtype=np.int64)
    counts = np.empty(n_steps + 1, dtype=np.int64)
    counts[0] = n_initial
    for t in range(n_steps):
        xs, ys = np.nonzero(lattice)
        k = xs.size
        u_move = rng.random(k)
        dir_move = rng.integers(0, 4, size=k)
        u_prolif = rng.random(k)
        dir_prolif = rng.integers(0, 4, size=k)
        prev = lattice.copy()
        _apply_step(lattice, xs, ys, u_move, dir_move, u_prolif, dir_prolif,
                    p_move, p_prolif)
        hamming[t] = int(np.abs(lattice.astype(np.int64) - prev).sum())
        counts[t + 1] = int(lattice.sum())
    return hamming, counts


class CellModel(Model):
    """Uniform(0, 1) priors on the motility and proliferation probabilities."""

    d_theta = 2
    wants_mad = True
    mad_default_sims = 10_000

    def __init__(self, rows=27, cols=36, n_steps=144, n_initial=110,
                 initial_rows=13, theta_true=(0.36, 0.001), data_seed=20_24):
        self.rows, self.cols = int(rows), int(cols)
        self.n_steps = int(n_steps)
        self.n_initial = int(n_initial)
        self.initial_rows = int(initial_rows)
        if self.initial_rows * self.cols < self.n_initial:
            raise ValueError("initial rectangle too small for the initial cells")
        self.d_s = self.n_steps + 1
        super().__init__()
        self.theta_true = np.asarray(theta_true, dtype=float)
        self._observed = self.summarize(
            self.simulate(self.theta_true, data_rng(data_seed))
        )

    def prior_sample(self, rng):
        return rng.uniform(0.0, 1.0, size=2)

    def prior_logpdf(self, theta):
        theta = np.asarray(theta, dtype=float)
        if np.all((theta >= 0.0) & (theta <= 1.0)):
            return 0.0
        return -math.inf

    def simulate(self, theta, rng):
        return cell_simulate(theta, rng, rows=self.rows, cols=self.cols,
                             n_steps=self.n_steps, n_initial=self.n_initial,
                             initial_rows=self.initial_rows)

    def summarize(self, data):
        hamming, counts = data
        return np.concatenate([hamming.astype(float), [float(counts[-1])]])

    def observed_summaries(self):
        return self._observed.copy()
