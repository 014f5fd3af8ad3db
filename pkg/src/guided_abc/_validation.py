"""Small input-validation helpers shared across the package."""

import numpy as np


def as_vector(x, name="x"):
    """Coerce input to a 1-D float array; reject anything else."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


def as_matrix(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {arr.shape}")
    return arr


def as_square_matrix(x, name="x"):
    arr = as_matrix(x, name)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr


def check_symmetric(m, name="matrix", rtol=1e-8):
    """Raise if ``m`` is not symmetric up to a relative tolerance."""
    m = as_square_matrix(m, name)
    scale = max(1.0, float(np.abs(m).max()))
    if not np.allclose(m, m.T, atol=rtol * scale, rtol=0.0):
        raise ValueError(f"{name} is not symmetric")
    return m


def check_weights(w, name="weights", tol=1e-10):
    """Validate normalized nonnegative weights summing to one."""
    w = as_vector(w, name)
    if np.any(w < 0):
        raise ValueError(f"{name} must be nonnegative")
    total = w.sum()
    if abs(total - 1.0) > tol:
        raise ValueError(f"{name} must sum to 1 (got {total!r})")
    return w


def check_choice(value, options, name="value"):
    if value not in options:
        raise ValueError(f"unknown {name} {value!r}; expected one of {sorted(options)}")
    return value
