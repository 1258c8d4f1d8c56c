"""Map sequences, potentials, and the built-in example system families.

A nonautonomous system is a sequence of selfmaps applied in order; on a
finite space each map is an index table. The sequence is presented as a
generator function so genuinely time-dependent dynamics need not store
infinitely many maps; requested tables and running compositions are memoized
behind a lock and are read-only afterwards.
"""

import threading
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .space import MetricSpace
from .validation import ensure_float_array, ensure_index, ensure_positive_int

__all__ = [
    "MapSequence",
    "Potential",
    "System",
    "compose",
    "birkhoff_sum",
    "birkhoff_table",
    "builtin_system",
    "BUILTIN_FAMILIES",
]


class MapSequence:
    """The sequence of selfmaps, acting on point indices.

    Parameters
    ----------
    generator : callable
        ``j -> index table`` for time index j >= 1. Each table must send
        valid points to valid points; this is checked per requested map.
    size : int
        Number of points of the underlying space.
    preperiod, period : int, optional
        Declare ``generator(j) == generator(j + period)`` for all
        ``j > preperiod``; spot-checked on the first three periods.
    """

    def __init__(self, generator, size, *, preperiod=None, period=None, name=""):
        self._gen = generator
        self.size = ensure_positive_int(size, "size")
        self.name = name
        self.preperiod = preperiod
        self.period = period
        self._tables = {}
        self._orbit = [np.arange(self.size, dtype=np.int64)]
        self._lock = threading.Lock()
        if (preperiod is None) != (period is None):
            raise ValueError("preperiod and period must be given together")
        if period is not None:
            ensure_positive_int(period, "period")
            if preperiod < 0:
                raise ValueError("preperiod must be >= 0")
            self._check_periodicity()

    @classmethod
    def constant(cls, table, *, name=""):
        table = np.asarray(table, dtype=np.int64)
        return cls(lambda j: table, table.size, preperiod=0, period=1, name=name)

    @classmethod
    def cycle(cls, tables, *, preperiod=0, name=""):
        """Eventually periodic sequence cycling through `tables` after `preperiod`."""
        tables = [np.asarray(t, dtype=np.int64) for t in tables]
        period = len(tables)

        def gen(j):
            return tables[(j - 1 - preperiod) % period] if j > preperiod else tables[(j - 1) % period]

        return cls(gen, tables[0].size, preperiod=preperiod, period=period, name=name)

    def _check_periodicity(self):
        for j in range(self.preperiod + 1, self.preperiod + self.period + 1):
            base = self.table(j)
            for k in (1, 2):
                if not np.array_equal(base, self.table(j + k * self.period)):
                    raise ValueError(f"periodic descriptor violated at time index {j + k * self.period}")

    def table(self, j):
        """Index table of the single map applied at time j (1-based)."""
        j = ensure_positive_int(j, "time index")
        with self._lock:
            t = self._tables.get(j)
            if t is None:
                t = np.asarray(self._gen(j), dtype=np.int64)
                if t.shape != (self.size,):
                    raise ValueError(f"map at time {j} has shape {t.shape}, expected ({self.size},)")
                if t.size and (t.min() < 0 or t.max() >= self.size):
                    raise ValueError(f"map at time {j} sends points outside the space")
                t.setflags(write=False)
                self._tables[j] = t
            return t

    def orbit_table(self, i):
        """Running composition f_1^i as an index table (i >= 0)."""
        if i < 0:
            raise ValueError("orbit index must be >= 0")
        with self._lock:
            while len(self._orbit) <= i:
                k = len(self._orbit)
                nxt = self._tables_get_unlocked(k)[self._orbit[k - 1]]
                nxt.setflags(write=False)
                self._orbit.append(nxt)
            return self._orbit[i]

    def _tables_get_unlocked(self, j):
        t = self._tables.get(j)
        if t is None:
            t = np.asarray(self._gen(j), dtype=np.int64)
            if t.shape != (self.size,):
                raise ValueError(f"map at time {j} has shape {t.shape}, expected ({self.size},)")
            if t.size and (t.min() < 0 or t.max() >= self.size):
                raise ValueError(f"map at time {j} sends points outside the space")
            t.setflags(write=False)
            self._tables[j] = t
        return t

    def compose_table(self, i, j):
        """Composition of j maps starting at time i, as an index table; j=0 is identity."""
        i = ensure_positive_int(i, "start index i")
        if j < 0:
            raise ValueError("composition length j must be >= 0")
        out = np.arange(self.size, dtype=np.int64)
        for k in range(i, i + j):
            out = self.table(k)[out]
        return out

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return f"MapSequence(size={self.size}{tag})"


def compose(maps, i, j):
    """The composed map over times i..i+j-1 as a point-to-point callable."""
    table = maps.compose_table(i, j)
    return lambda x: int(table[ensure_index(x, maps.size)])


@dataclass(frozen=True)
class Potential:
    """Real-valued function on points with cached sup norm."""

    values: np.ndarray
    name: str = "potential"

    def __post_init__(self):
        arr = ensure_float_array(self.values, name="potential values")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @cached_property
    def sup_norm(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    @classmethod
    def constant(cls, c, size, name=None):
        return cls(np.full(size, float(c)), name=name or f"const({c})")

    @classmethod
    def zero(cls, size):
        return cls(np.zeros(size), name="zero")

    def __call__(self, x):
        return float(self.values[x])

    def shifted(self, c):
        return Potential(self.values + float(c), name=f"{self.name}+{c}")


def birkhoff_sum(potential, maps, n, x):
    """Sum of the potential along the first n orbit points, left to right."""
    n = ensure_positive_int(n, "horizon n")
    x = ensure_index(x, maps.size)
    total = 0.0
    xi = x
    for i in range(n):
        if i > 0:
            xi = int(maps.table(i)[xi])
        total += float(potential.values[xi])
    return total


def birkhoff_table(potential, maps, n_max):
    """Matrix of orbit sums: row n holds the n-step sum at every point (row 0 is zero)."""
    n_max = ensure_positive_int(n_max, "n_max")
    out = np.zeros((n_max + 1, maps.size), dtype=np.float64)
    pos = np.arange(maps.size, dtype=np.int64)
    for i in range(n_max):
        out[i + 1] = out[i] + potential.values[pos]
        if i + 1 < n_max:
            pos = maps.table(i + 1)[pos]
    return out


@dataclass(frozen=True)
class System:
    """A metric space, a map sequence, and a potential, bundled."""

    space: MetricSpace
    maps: MapSequence
    potential: Potential
    name: str = "system"
    meta: dict = field(default_factory=dict)

    def with_potential(self, potential):
        return System(self.space, self.maps, potential, name=self.name, meta=self.meta)


# ---------------------------------------------------------------------------
# Built-in families


def _discrete_space(size):
    m = np.ones((size, size)) - np.eye(size)
    return MetricSpace.from_matrix(m)


def _build_potential(size, spec, meta=None):
    if spec is None:
        return Potential.zero(size)
    if isinstance(spec, Potential):
        if spec.values.size != size:
            raise ValueError("potential length does not match the space")
        return spec
    if isinstance(spec, (int, float)):
        return Potential.constant(spec, size)
    if isinstance(spec, (list, tuple, np.ndarray)):
        return Potential(np.asarray(spec, dtype=float), name="tabulated")
    if isinstance(spec, dict):
        kind = spec.get("kind")
        if kind == "zero":
            return Potential.zero(size)
        if kind == "constant":
            return Potential.constant(spec["c"], size)
        if kind == "values":
            return Potential(np.asarray(spec["values"], dtype=float), name="tabulated")
        if kind == "first-symbol" and meta is not None and "words" in meta:
            per = np.asarray(spec["per_symbol"], dtype=float)
            return Potential(per[meta["words"][:, 0]], name="first-symbol")
        raise ValueError(f"unknown potential kind {kind!r}")
    raise ValueError(f"cannot build a potential from {spec!r}")


def _single_point(params):
    space = MetricSpace.from_matrix(np.zeros((1, 1)), labels=["p"])
    maps = MapSequence.constant(np.array([0]), name="identity")
    phi = _build_potential(1, params.get("potential", params.get("phi", 0.0)))
    return System(space, maps, phi, name="single-point", meta={"family": "single-point"})


def _two_point(params):
    d = float(params.get("distance", 1.0))
    space = MetricSpace.from_matrix(np.array([[0.0, d], [d, 0.0]]), labels=["a", "b"])
    mode = params.get("map", "identity")
    if mode == "identity":
        table = np.array([0, 1])
    elif mode == "collapse":
        table = np.array([1, 1])
    else:
        raise ValueError(f"two-point map must be 'identity' or 'collapse', got {mode!r}")
    maps = MapSequence.constant(table, name=mode)
    phi = _build_potential(2, params.get("potential"))
    return System(space, maps, phi, name=f"two-point({mode})", meta={"family": "two-point", "map": mode})


def _cyclic_shift(params):
    length = ensure_positive_int(params.get("length", 8), "length")
    alphabet = ensure_positive_int(params.get("alphabet", 2), "alphabet")
    size = alphabet**length
    if size > 1 << 20:
        raise ValueError(f"cyclic shift with {size} words is beyond desk scale")
    # Word w -> digits, most significant symbol first; index 0 is position 0.
    idx = np.arange(size)
    words = np.empty((size, length), dtype=np.int8)
    for pos in range(length):
        words[:, pos] = (idx // alphabet ** (length - 1 - pos)) % alphabet
    powers = 2.0 ** -np.arange(length)

    if alphabet == 2:
        # Binary words are their own indices (most significant symbol first),
        # so the first differing position is the highest set bit of the XOR.
        xor_dist = np.zeros(size, dtype=np.float64)
        v = np.arange(1, size)
        xor_dist[1:] = powers[length - 1 - np.floor(np.log2(v)).astype(np.int64)]

        def rows(indices):
            return xor_dist[np.asarray(indices)[:, None] ^ idx[None, :]]

    else:

        def rows(indices):
            diff = words[np.asarray(indices)][:, None, :] != words[None, :, :]
            first = np.argmax(diff, axis=2)
            any_diff = diff.any(axis=2)
            return np.where(any_diff, powers[first], 0.0)

    space = MetricSpace(size, rows=rows)
    # Cyclic left rotation keeps orbits inside the finite space; exact cylinder
    # combinatorics hold for horizons n <= length.
    msd = idx // alphabet ** (length - 1)
    shift_table = (idx % alphabet ** (length - 1)) * alphabet + msd
    maps = MapSequence.constant(shift_table, name="cyclic-shift")
    meta = {"family": "cyclic-shift", "length": length, "alphabet": alphabet, "words": words, "max_horizon": length}
    phi = _build_potential(size, params.get("potential"), meta)
    return System(space, maps, phi, name=f"cyclic-shift(L={length},a={alphabet})", meta=meta)


def _n_cycle(params):
    n = ensure_positive_int(params.get("n", 3), "n")
    space = _discrete_space(n)
    table = (np.arange(n) + 1) % n
    maps = MapSequence.constant(table, name=f"{n}-cycle")
    phi = _build_potential(n, params.get("potential"))
    return System(space, maps, phi, name=f"{n}-cycle", meta={"family": "n-cycle", "n": n})


def _circle_space(q):
    pts = np.arange(q) / q
    gap = np.abs(pts[:, None] - pts[None, :])
    return MetricSpace.from_matrix(np.minimum(gap, 1.0 - gap))


def _circle_grid(params):
    q = ensure_positive_int(params.get("q", 12), "q")
    dynamics = params.get("dynamics", {"kind": "rotation", "steps": 1})
    kind = dynamics.get("kind") if isinstance(dynamics, dict) else dynamics
    space = _circle_space(q)
    idx = np.arange(q)
    if kind == "rotation":
        steps = dynamics.get("steps", 1)
        if isinstance(steps, int):
            maps = MapSequence.constant((idx + steps) % q, name=f"rotation({steps}/{q})")
        else:
            tables = [(idx + int(s)) % q for s in steps]
            maps = MapSequence.cycle(tables, name="rotation-sequence")
    elif kind == "doubling-tripling":
        if q % 6 != 0:
            raise ValueError("circle-grid doubling-tripling requires q divisible by 6 (field: q)")
        doubling = (2 * idx) % q
        tripling = (3 * idx) % q
        maps = MapSequence.cycle([doubling, tripling], name="doubling-tripling")
    else:
        raise ValueError(f"unknown circle-grid dynamics {kind!r} (field: dynamics)")
    phi = _build_potential(q, params.get("potential"))
    return System(space, maps, phi, name=f"circle-grid(q={q},{kind})", meta={"family": "circle-grid", "q": q, "dynamics": kind})


def _switching(params):
    q = ensure_positive_int(params.get("q", 12), "q")
    odd = int(params.get("odd_step", 1))
    even = int(params.get("even_step", 2))
    space = _circle_space(q)
    idx = np.arange(q)
    maps = MapSequence.cycle([(idx + odd) % q, (idx + even) % q], name=f"switching({odd},{even})")
    phi = _build_potential(q, params.get("potential"))
    return System(space, maps, phi, name=f"switching(q={q})", meta={"family": "switching", "q": q})


def _uniform_limit(params):
    q = ensure_positive_int(params.get("q", 12), "q")
    step = int(params.get("step", 1))
    extra_until = int(params.get("extra_until", 4))
    space = _circle_space(q)
    idx = np.arange(q)
    limit = (idx + step) % q
    perturbed = (idx + step + 1) % q

    def gen(j):
        return perturbed if j <= extra_until else limit

    maps = MapSequence(gen, q, preperiod=extra_until, period=1, name="uniform-limit")
    phi = _build_potential(q, params.get("potential"))
    meta = {"family": "uniform-limit", "q": q, "limit_table": limit, "extra_until": extra_until}
    return System(space, maps, phi, name=f"uniform-limit(q={q})", meta=meta)


BUILTIN_FAMILIES = {
    "single-point": _single_point,
    "two-point": _two_point,
    "cyclic-shift": _cyclic_shift,
    "n-cycle": _n_cycle,
    "circle-grid": _circle_grid,
    "switching": _switching,
    "uniform-limit": _uniform_limit,
}


def builtin_system(spec):
    """Construct a built-in system family from a structured descriptor.

    `spec` is either a family name or a dict with a ``family`` key plus
    family-specific parameters; equal descriptors yield identical systems.
    """
    if isinstance(spec, str):
        spec = {"family": spec}
    if not isinstance(spec, dict) or "family" not in spec:
        raise ValueError("system descriptor must name a family (field: family)")
    family = spec["family"]
    builder = BUILTIN_FAMILIES.get(family)
    if builder is None:
        known = ", ".join(sorted(BUILTIN_FAMILIES))
        raise ValueError(f"unknown system family {family!r} (field: family); known: {known}")
    params = {k: v for k, v in spec.items() if k != "family"}
    return builder(params)
