"""Finite metric spaces and Bowen-metric geometry.

A space is a dense index set ``0..size-1`` with an exact symmetric distance.
The Bowen metric of a map sequence compares orbits over a finite horizon:

    d_n(x, y) = max over 0 <= i < n of d(f_1^i x, f_1^i y)

and its open/closed balls are the observation windows every cover and packing
functional is built from. Balls are always materialized as explicit point
sets; the helpers at the bottom produce packed membership matrices for whole
candidate families at once, which is what the cover engines consume.
"""

from dataclasses import dataclass, field

import numpy as np

from .validation import ensure_index, ensure_index_array, ensure_positive_float, ensure_positive_int

__all__ = [
    "MetricSpace",
    "PointSet",
    "BowenBall",
    "bowen_dist",
    "bowen_rows",
    "bowen_ball",
    "bowen_memberships",
    "unpack_members",
]

# Full distance matrices are materialized up to this size; larger spaces must
# provide a vectorized row function or accept the slow scalar fallback.
_MATRIX_CAP = 2048

# Exhaustive metric validation (all pairs / all triples) up to this size.
_EXHAUSTIVE_CAP = 64


class MetricSpace:
    """Finite point cloud with an exact distance oracle.

    Parameters
    ----------
    size : int
        Number of points; indices are 0..size-1.
    dist : callable, optional
        Scalar distance ``(i, j) -> float``. Required unless `matrix` or
        `rows` is given.
    matrix : ndarray, optional
        Dense (size, size) distance matrix.
    rows : callable, optional
        Vectorized provider ``(index_array) -> (len(index_array), size)``
        distance rows; preferred for large spaces.
    labels : sequence of str, optional
        Human-readable name per point.
    """

    def __init__(self, size, dist=None, *, matrix=None, rows=None, labels=None):
        self.size = ensure_positive_int(size, "size")
        if matrix is not None:
            matrix = np.asarray(matrix, dtype=np.float64)
            if matrix.shape != (self.size, self.size):
                raise ValueError(f"distance matrix shape {matrix.shape} != ({size}, {size})")
        elif dist is None and rows is None:
            raise ValueError("need one of dist, matrix or rows")
        self._matrix = matrix
        self._dist_fn = dist
        self._rows_fn = rows
        self._row_cache = {}
        if labels is not None:
            labels = list(labels)
            if len(labels) != self.size:
                raise ValueError(f"labels has length {len(labels)}, expected {size}")
        self.labels = labels
        if self._matrix is None and self._rows_fn is None and self.size <= _MATRIX_CAP:
            self._matrix = self._build_matrix()
        self._validate_metric()

    @classmethod
    def from_matrix(cls, matrix, labels=None):
        matrix = np.asarray(matrix, dtype=np.float64)
        return cls(matrix.shape[0], matrix=matrix, labels=labels)

    def _build_matrix(self):
        m = np.empty((self.size, self.size), dtype=np.float64)
        for i in range(self.size):
            for j in range(i, self.size):
                m[i, j] = m[j, i] = float(self._dist_fn(i, j))
        return m

    def dist(self, i, j):
        """Exact distance between two points."""
        i = ensure_index(i, self.size)
        j = ensure_index(j, self.size)
        if self._matrix is not None:
            return float(self._matrix[i, j])
        if self._rows_fn is not None:
            return float(self.rows(np.array([i]))[0, j])
        return float(self._dist_fn(i, j))

    def rows(self, indices):
        """Distance rows ``d(indices[k], .)`` as a (len(indices), size) array."""
        indices = np.asarray(indices, dtype=np.int64)
        if self._matrix is not None:
            return self._matrix[indices]
        if self._rows_fn is not None:
            return np.asarray(self._rows_fn(indices), dtype=np.float64)
        out = np.empty((indices.size, self.size), dtype=np.float64)
        for k, i in enumerate(indices):
            i = int(i)
            row = self._row_cache.get(i)
            if row is None:
                row = np.array([self._dist_fn(i, j) for j in range(self.size)], dtype=np.float64)
                self._row_cache[i] = row
            out[k] = row
        return out

    def all_points(self):
        return PointSet(np.arange(self.size, dtype=np.int64), self)

    def subset(self, indices):
        return PointSet(ensure_index_array(indices, self.size), self)

    def _validate_metric(self):
        # Exhaustive checks for small spaces, deterministic sample above.
        if self.size <= _EXHAUSTIVE_CAP:
            sample = np.arange(self.size)
        else:
            stride = max(1, self.size // _EXHAUSTIVE_CAP)
            sample = np.unique(np.concatenate([np.arange(32), np.arange(0, self.size, stride)]))
            sample = sample[sample < self.size]
        d = self.rows(sample)[:, sample]
        if np.any(d < 0):
            raise ValueError("metric violation: negative distance")
        if not np.allclose(np.diag(d), 0.0, atol=0.0):
            raise ValueError("metric violation: dist(x, x) != 0")
        if np.any(d != d.T):
            raise ValueError("metric violation: asymmetric distance")
        same = sample[:, None] == sample[None, :]
        if np.any((d == 0) & ~same):
            raise ValueError("metric violation: dist(x, y) = 0 for x != y")
        # Triangle inequality over the sampled triples, with a tiny float slack.
        slack = 1e-12 * max(1.0, float(d.max()))
        if np.any(d[:, :, None] > d[:, None, :] + d[None, :, :] + slack):
            raise ValueError("metric violation: triangle inequality fails")

    def __repr__(self):
        return f"MetricSpace(size={self.size})"


@dataclass(frozen=True, eq=False)
class PointSet:
    """Sorted, deduplicated set of point indices of a parent space."""

    indices: np.ndarray
    space: MetricSpace
    _mask_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        arr = ensure_index_array(self.indices, self.space.size)
        object.__setattr__(self, "indices", arr)

    def __len__(self):
        return int(self.indices.size)

    def __iter__(self):
        return iter(int(i) for i in self.indices)

    def __contains__(self, i):
        pos = np.searchsorted(self.indices, int(i))
        return pos < self.indices.size and self.indices[pos] == int(i)

    def __eq__(self, other):
        return (
            isinstance(other, PointSet)
            and self.space is other.space
            and self.indices.size == other.indices.size
            and bool(np.all(self.indices == other.indices))
        )

    @property
    def mask(self):
        m = self._mask_cache.get("mask")
        if m is None:
            m = np.zeros(self.space.size, dtype=bool)
            m[self.indices] = True
            self._mask_cache["mask"] = m
        return m

    def union(self, other):
        return PointSet(np.union1d(self.indices, other.indices), self.space)

    def intersection(self, other):
        return PointSet(np.intersect1d(self.indices, other.indices), self.space)

    def issubset(self, other):
        return bool(np.all(np.isin(self.indices, other.indices)))

    def __repr__(self):
        shown = ", ".join(str(int(i)) for i in self.indices[:8])
        more = "" if len(self) <= 8 else f", ... ({len(self)} total)"
        return f"PointSet([{shown}{more}])"


@dataclass(frozen=True, eq=False)
class BowenBall:
    """Materialized Bowen ball around `center` at horizon `n` and radius `eps`."""

    center: int
    n: int
    eps: float
    closed: bool
    members: PointSet

    def __post_init__(self):
        if self.center not in self.members:
            raise ValueError("Bowen ball must contain its own center")


def bowen_dist(space, maps, n, x, y):
    """Bowen distance d_n(x, y): the max distance along the first n orbit steps."""
    n = ensure_positive_int(n, "horizon n")
    x = ensure_index(x, space.size)
    y = ensure_index(y, space.size)
    best = 0.0
    xi, yi = x, y
    for i in range(n):
        if i > 0:
            t = maps.table(i)
            xi, yi = int(t[xi]), int(t[yi])
        best = max(best, space.dist(xi, yi))
    return best


def bowen_rows(space, maps, n, centers):
    """Bowen distance rows ``d_n(centers[k], .)`` as a dense float matrix."""
    n = ensure_positive_int(n, "horizon n")
    centers = np.asarray(centers, dtype=np.int64)
    acc = np.zeros((centers.size, space.size), dtype=np.float64)
    for i in range(n):
        orbit = maps.orbit_table(i)
        rows = space.rows(orbit[centers])
        np.maximum(acc, rows[:, orbit], out=acc)
    return acc


def bowen_ball(space, maps, n, eps, center, closed=False):
    """Materialize one open or closed Bowen ball by exhaustive scan."""
    eps = ensure_positive_float(eps, "eps")
    center = ensure_index(center, space.size)
    row = bowen_rows(space, maps, n, np.array([center]))[0]
    hit = row <= eps if closed else row < eps
    members = PointSet(np.nonzero(hit)[0], space)
    return BowenBall(center=center, n=int(n), eps=eps, closed=bool(closed), members=members)


def bowen_memberships(space, maps, n_values, eps, centers, closed=True, block=512):
    """Packed ball-membership matrices for a family of centers at several horizons.

    Returns ``{n: uint8 array of shape (len(centers), ceil(size/8))}`` where row
    k is the bit-packed membership of the ball around ``centers[k]``. The
    running maximum over orbit steps is shared across horizons, so asking for
    all of ``1..n_max`` costs the same as asking for ``n_max`` alone.
    """
    eps = ensure_positive_float(eps, "eps")
    n_values = sorted({ensure_positive_int(n, "horizon n") for n in n_values})
    centers = np.asarray(centers, dtype=np.int64)
    n_max = n_values[-1]
    out = {n: np.empty((centers.size, (space.size + 7) // 8), dtype=np.uint8) for n in n_values}
    want = set(n_values)
    for start in range(0, centers.size, block):
        chunk = centers[start : start + block]
        acc = np.zeros((chunk.size, space.size), dtype=np.float64)
        for i in range(n_max):
            orbit = maps.orbit_table(i)
            rows = space.rows(orbit[chunk])
            np.maximum(acc, rows[:, orbit], out=acc)
            n_here = i + 1
            if n_here in want:
                hit = acc <= eps if closed else acc < eps
                out[n_here][start : start + chunk.size] = np.packbits(hit, axis=1)
    return out


def unpack_members(packed_row, size):
    """Boolean membership vector from one packed row."""
    return np.unpackbits(packed_row, count=size).astype(bool)
