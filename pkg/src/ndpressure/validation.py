"""Input validation helpers shared across the package."""

import numpy as np

__all__ = [
    "ensure_index",
    "ensure_index_array",
    "ensure_float_array",
    "ensure_positive_int",
    "ensure_positive_float",
    "ensure_schedule",
]


def ensure_index(i, size, name="point"):
    """Validate a single point index against a space of `size` points."""
    i = int(i)
    if not 0 <= i < size:
        raise ValueError(f"{name} index {i} outside valid range [0, {size})")
    return i


def ensure_index_array(indices, size, name="points"):
    """Return a sorted, deduplicated int64 index array, all entries in range."""
    arr = np.asarray(indices, dtype=np.int64).ravel()
    if arr.size and (arr.min() < 0 or arr.max() >= size):
        raise ValueError(f"{name} contains indices outside valid range [0, {size})")
    return np.unique(arr)


def ensure_float_array(values, size=None, name="values"):
    arr = np.asarray(values, dtype=np.float64).ravel()
    if size is not None and arr.size != size:
        raise ValueError(f"{name} has length {arr.size}, expected {size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def ensure_positive_int(value, name):
    v = int(value)
    if v < 1:
        raise ValueError(f"{name} must be a positive integer, got {value}")
    return v


def ensure_positive_float(value, name):
    v = float(value)
    if not v > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return v


def ensure_schedule(values, name, *, ascending, dtype=float):
    """Validate a nonempty strictly monotone schedule and return it as a list."""
    out = [dtype(v) for v in values]
    if not out:
        raise ValueError(f"{name} must be a nonempty schedule")
    diffs = [b - a for a, b in zip(out, out[1:])]
    if ascending and any(d <= 0 for d in diffs):
        raise ValueError(f"{name} must be strictly ascending")
    if not ascending and any(d >= 0 for d in diffs):
        raise ValueError(f"{name} must be strictly descending")
    return out
