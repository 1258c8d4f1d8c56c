"""Discrete Borel probability measures and the measure-theoretic pressure suite.

Covers mass transport and invariance defects, pointwise (Brin-Katok style)
local pressures, pressures of a measure over high-mass sets, the pressure
distribution principle, the Billingsley-type packing bounds, the variational
gap report, empirical measures and generic points, non-wandering surrogates,
and uniform-limit invariance transport.

Weak* neighborhoods are operationalized by a finite family of Lipschitz test
functions with a seminorm radius; each built-in system ships a separating
family of distance functions to anchor points.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cover import _family, fixed_cover_sum, separated_sup
from .pressure import pressure_estimate, tail_indices
from .space import PointSet
from .systems import birkhoff_table
from .validation import ensure_index, ensure_positive_float, ensure_positive_int, ensure_schedule

__all__ = [
    "DiscreteMeasure",
    "TestFunctionFamily",
    "LocalPressureProfile",
    "bernoulli_measure",
    "default_family",
    "pushforward",
    "invariance_defect",
    "ball_mass",
    "local_pressure",
    "measure_pressure_over_set",
    "sublevel_candidates",
    "measure_cp_pressure",
    "spanning_measure_pressure",
    "distribution_principle_check",
    "billingsley_bound",
    "variational_gap",
    "empirical_measure",
    "generic_points",
    "packing_bound_on_generic",
    "non_wandering_set",
    "uniform_limit_check",
]

_MASS_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteMeasure:
    """Nonnegative weights over points, normalized to total mass one."""

    weights: np.ndarray
    name: str = "measure"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).copy()
        if w.ndim != 1:
            raise ValueError("weights must be a flat array")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        total = float(w.sum())
        if total <= 0:
            raise ValueError("weights must have positive total mass")
        w /= total
        if abs(float(w.sum()) - 1.0) > _MASS_TOL:
            raise ValueError("normalization failed to reach total mass 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, size, name="uniform"):
        return cls(np.full(size, 1.0 / size), name=name)

    @classmethod
    def dirac(cls, size, point, name=None):
        w = np.zeros(size)
        w[ensure_index(point, size)] = 1.0
        return cls(w, name=name or f"dirac({point})")

    @property
    def size(self):
        return int(self.weights.size)

    def support(self):
        return np.nonzero(self.weights > 0)[0]

    def mass(self, points):
        if isinstance(points, PointSet):
            points = points.indices
        return float(self.weights[np.asarray(points, dtype=np.int64)].sum())

    def integrate(self, values):
        return float(np.dot(self.weights, np.asarray(values, dtype=np.float64)))


def bernoulli_measure(system, p, name=None):
    """Product measure on a cyclic-shift system: symbol 1 has probability p."""
    words = system.meta.get("words")
    if words is None:
        raise ValueError("bernoulli_measure needs a cyclic-shift system")
    p = float(p)
    if not 0 < p < 1:
        raise ValueError("p must lie strictly between 0 and 1")
    ones = (words == 1).sum(axis=1)
    length = words.shape[1]
    w = p**ones * (1 - p) ** (length - ones)
    return DiscreteMeasure(w, name=name or f"bernoulli({p})")


@dataclass(frozen=True)
class TestFunctionFamily:
    """Finite family of Lipschitz test functions with their constants."""

    __test__ = False  # not a pytest collection target

    values: np.ndarray  # (n_functions, size)
    lipschitz: np.ndarray
    name: str = "family"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] == 0:
            raise ValueError("family must contain at least one function")
        lip = np.asarray(self.lipschitz, dtype=np.float64).ravel()
        if lip.size != v.shape[0]:
            raise ValueError("one Lipschitz bound per function is required")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "lipschitz", lip)

    @property
    def max_lipschitz(self):
        return float(self.lipschitz.max())

    def seminorm(self, weights_a, weights_b):
        """max over the family of |integral under a - integral under b|."""
        return float(np.max(np.abs(self.values @ (weights_a - weights_b))))

    def validate(self, space):
        idx = np.arange(min(space.size, 64))
        d = space.rows(idx)[:, idx]
        for g, lip in zip(self.values, self.lipschitz):
            gap = np.abs(g[idx][:, None] - g[idx][None, :])
            if np.any(gap > lip * d + 1e-9):
                raise ValueError("declared Lipschitz bound is violated on the sampled pairs")


def default_family(system, max_anchors=64):
    """Separating family of distance functions to a deterministic anchor set."""
    space = system.space
    if space.size <= max_anchors:
        anchors = np.arange(space.size)
    else:
        anchors = np.unique(np.linspace(0, space.size - 1, max_anchors).astype(np.int64))
    values = space.rows(anchors)
    fam = TestFunctionFamily(values, np.ones(anchors.size), name=f"dist-anchors({anchors.size})")
    fam.validate(space)
    return fam


# ---------------------------------------------------------------------------
# Mass transport and invariance


def pushforward(mu, table):
    """Transport mass along one map: mass of B becomes mass of its preimage."""
    table = np.asarray(table, dtype=np.int64)
    w = np.zeros_like(mu.weights)
    np.add.at(w, table, mu.weights)
    return DiscreteMeasure(w, name=f"{mu.name}*")


def invariance_defect(mu, maps, horizon, family):
    """Worst family-integral change under any single map up to the horizon.

    Zero certifies invariance against the family: every tested integral is
    reproduced exactly by each pushforward.
    """
    horizon = ensure_positive_int(horizon, "horizon")
    base = family.values @ mu.weights
    worst = 0.0
    for k in range(1, horizon + 1):
        table = maps.table(k)
        composed = family.values[:, table] @ mu.weights  # integrals of g o f_k
        worst = max(worst, float(np.max(np.abs(composed - base))))
    return worst


def ball_mass(mu, ball):
    if ball.members.space.size != mu.size:
        raise ValueError("ball and measure live on different spaces")
    return mu.mass(ball.members)


# ---------------------------------------------------------------------------
# Local pressures


@dataclass
class LocalPressureProfile:
    """Per-point local pressure table over (radius, horizon) scales.

    Entries are (-log ball mass + orbit sum)/n; zero-mass balls are stored as
    +inf and flagged, never dropped. `upper`/`lower` are the tail max/min at
    the smallest radius.
    """

    points: np.ndarray
    eps_schedule: list
    n_schedule: list
    table: np.ndarray  # (n_points, n_eps, n_horizons)
    upper: np.ndarray
    lower: np.ndarray
    has_infinite: bool
    closed_balls: bool

    def _pos(self, point):
        pos = np.searchsorted(self.points, int(point))
        if pos >= self.points.size or self.points[pos] != int(point):
            raise KeyError(f"point {point} is not covered by this profile")
        return int(pos)

    def upper_at(self, point):
        return float(self.upper[self._pos(point)])

    def lower_at(self, point):
        return float(self.lower[self._pos(point)])

    def covers(self, points):
        return bool(np.all(np.isin(np.asarray(points, dtype=np.int64), self.points)))

    def csv_rows(self):
        rows = []
        for i, pt in enumerate(self.points):
            for j, eps in enumerate(self.eps_schedule):
                for k, n in enumerate(self.n_schedule):
                    rows.append((int(pt), float(eps), int(n), float(self.table[i, j, k])))
        return rows


def local_pressure(mu, system, sample_points=None, *, eps_schedule, n_schedule, closed=True):
    """Brin-Katok style local pressure profile of a measure.

    With a zero potential the entries are local entropies.
    """
    eps_schedule = ensure_schedule(eps_schedule, "eps_schedule", ascending=False)
    n_schedule = ensure_schedule(n_schedule, "n_schedule", ascending=True, dtype=int)
    space, maps, potential = system.space, system.maps, system.potential
    if sample_points is None:
        pts = mu.support()
    elif isinstance(sample_points, PointSet):
        pts = sample_points.indices
    else:
        pts = space.subset(sample_points).indices
    if pts.size == 0:
        raise ValueError("sample points must be nonempty")
    birkhoff = birkhoff_table(potential, maps, max(n_schedule))
    table = np.empty((pts.size, len(eps_schedule), len(n_schedule)), dtype=np.float64)
    for j, eps in enumerate(eps_schedule):
        fam = _family(space, maps, eps, n_schedule, closed=closed)
        for k, n in enumerate(n_schedule):
            masses = fam.members_bool(n)[pts] @ mu.weights
            with np.errstate(divide="ignore"):
                log_mass = np.log(masses)
            table[:, j, k] = (-log_mass + birkhoff[n][pts]) / n
    tail = tail_indices(n_schedule)
    smallest = table[:, -1, :]
    upper = smallest[:, tail].max(axis=1)
    lower = smallest[:, tail].min(axis=1)
    return LocalPressureProfile(
        points=pts,
        eps_schedule=eps_schedule,
        n_schedule=n_schedule,
        table=table,
        upper=upper,
        lower=lower,
        has_infinite=bool(np.isinf(table).any()),
        closed_balls=closed,
    )


def measure_pressure_over_set(mu, K, profile, side="upper"):
    """Integral of the per-point local pressure surrogate over K."""
    if side not in ("upper", "lower"):
        raise ValueError("side must be 'upper' or 'lower'")
    sel = K.indices[mu.weights[K.indices] > 0]
    if sel.size == 0:
        return 0.0
    if not profile.covers(sel):
        raise ValueError("profile does not cover the support points inside K")
    per_point = profile.upper if side == "upper" else profile.lower
    pos = np.searchsorted(profile.points, sel)
    vals = per_point[pos]
    if np.isinf(vals).any():
        warnings.warn("zero-mass ball produced an infinite local pressure; result is infinite")
        return math.inf
    return float(np.dot(mu.weights[sel], vals))


# ---------------------------------------------------------------------------
# Pressures of a measure over high-mass sets


def sublevel_candidates(mu, profile, delta, space):
    """Candidate high-mass sets: local-pressure sublevel prefixes plus full support.

    Points are sorted ascending by their upper local pressure and the
    smallest-mass prefix reaching mass >= 1 - delta is taken.
    """
    support = mu.support()
    if delta < 0 or delta >= 1:
        raise ValueError("delta must lie in [0, 1)")
    candidates = [PointSet(support, space)]
    if delta > 0:
        pos = np.searchsorted(profile.points, support)
        order = np.lexsort((support, profile.upper[pos]))
        ordered = support[order]
        masses = np.cumsum(mu.weights[ordered])
        cut = int(np.searchsorted(masses, 1.0 - delta - _MASS_TOL) + 1)
        if cut < ordered.size:
            candidates.append(PointSet(ordered[:cut], space))
    return candidates


def measure_cp_pressure(
    mu,
    system,
    kind,
    *,
    eps_schedule,
    n_min,
    n_max,
    delta_schedule=(0.0,),
    parts=1,
    tol=1e-4,
    exact="auto",
    budget=None,
    profile=None,
    details=None,
):
    """Pressure of a measure: infimum of a pressure kind over high-mass sets.

    For each delta of the (descending-to-final) schedule, the candidate sets
    are the local-pressure sublevel prefixes plus the full support; the
    returned value is the candidate minimum at the final delta. Capacity
    kinds computed this way only bound the delta-limit from above when
    restricted to full-mass sets, so both are reported when `details` is a
    dict to fill.
    """
    deltas = [float(d) for d in delta_schedule]
    if not deltas:
        raise ValueError("delta_schedule must be nonempty")
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("delta_schedule must be strictly descending")
    if any(d < 0 or d >= 1 for d in deltas):
        raise ValueError("delta entries must lie in [0, 1)")
    if profile is None:
        profile = local_pressure(mu, system, eps_schedule=eps_schedule, n_schedule=list(range(n_min, n_max + 1)))
    n_schedule = list(range(int(n_min), int(n_max) + 1))
    per_delta = []
    for delta in deltas:
        values = []
        for cand in sublevel_candidates(mu, profile, delta, system.space):
            est = pressure_estimate(
                kind,
                system,
                cand,
                eps_schedule=eps_schedule,
                n_schedule=n_schedule,
                n_min=n_min,
                n_max=n_max,
                parts=parts,
                tol=tol,
                exact=exact,
                budget=budget,
            )
            values.append((est.value, len(cand)))
        per_delta.append({"delta": delta, "value": min(v for v, _ in values), "candidates": values})
    if details is not None:
        details["per_delta"] = per_delta
        # Full-mass form (delta = 0) reported separately; never asserted equal
        # to the schedule form (for capacity kinds they can differ).
        details["full_mass_value"] = per_delta[-1]["candidates"][0][0]
    return float(per_delta[-1]["value"])


def spanning_measure_pressure(
    mu,
    system,
    *,
    eps_schedule,
    n_schedule,
    delta_schedule=(0.0,),
    exact="auto",
    budget=None,
    profile=None,
):
    """Spanning-infimum pressure of a measure over high-mass sets.

    Per (radius, horizon): the minimum over candidate sets of the normalized
    log weighted spanning cover; headline is the tail max at the smallest
    radius, taken at the final delta.
    """
    eps_schedule = ensure_schedule(eps_schedule, "eps_schedule", ascending=False)
    n_schedule = ensure_schedule(n_schedule, "n_schedule", ascending=True, dtype=int)
    if profile is None:
        profile = local_pressure(mu, system, eps_schedule=eps_schedule, n_schedule=n_schedule)
    final_delta = float(delta_schedule[-1])
    candidates = sublevel_candidates(mu, profile, final_delta, system.space)
    cells = np.empty((len(eps_schedule), len(n_schedule)))
    for j, eps in enumerate(eps_schedule):
        for k, n in enumerate(n_schedule):
            best = math.inf
            for cand in candidates:
                cs = fixed_cover_sum(system.space, system.maps, cand, system.potential, n, eps, exact=exact, budget=budget)
                best = min(best, cs.log_value / n)
            cells[j, k] = best
    tail = tail_indices(n_schedule)
    return float(cells[-1, tail].max())


# ---------------------------------------------------------------------------
# Distribution principle, Billingsley bounds, variational gap


@dataclass
class CheckReport:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "details": _plain(self.details)}


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj]
    return obj


def distribution_principle_check(
    mu_sequence,
    K,
    s,
    *,
    system,
    eps,
    big_k=1.0,
    n_schedule,
    n_min=None,
    n_max=None,
    tol=0.05,
    exact="auto",
    budget=None,
):
    """Mass-distribution criterion for a lower pressure bound.

    Hypotheses: every measure of the sequence charges K, and the tail-max
    ball mass is dominated by ``big_k * exp(-n s + orbit sum)`` for every
    ball meeting K. On success the conclusion is asserted against the
    variable-cover critical-value estimate: its value must be at least
    ``s - tol``. Failures are report outcomes, not errors.
    """
    if not mu_sequence:
        raise ValueError("mu_sequence must be nonempty")
    n_schedule = ensure_schedule(n_schedule, "n_schedule", ascending=True, dtype=int)
    eps = ensure_positive_float(eps, "eps")
    space, maps, potential = system.space, system.maps, system.potential
    details = {"s": float(s), "eps": eps, "big_k": float(big_k)}
    masses_on_k = [mu.mass(K) for mu in mu_sequence]
    details["sequence_masses_on_K"] = masses_on_k
    if any(m <= 0 for m in masses_on_k):
        k_bad = next(i for i, m in enumerate(masses_on_k) if m <= 0)
        details["violation"] = {"hypothesis": 1, "sequence_index": k_bad}
        return CheckReport("distribution-principle", False, details)
    tail_start = len(mu_sequence) // 2
    tail = mu_sequence[tail_start:]
    birkhoff = birkhoff_table(potential, maps, max(n_schedule))
    fam = _family(space, maps, eps, n_schedule, closed=True)
    for n in n_schedule:
        members = fam.members_bool(n)
        meets_k = members[:, K.indices].any(axis=1)
        tail_mass = np.max(np.stack([members @ mu.weights for mu in tail]), axis=0)
        bound = big_k * np.exp(-n * float(s) + birkhoff[n])
        bad = meets_k & (tail_mass > bound + 1e-15)
        if bad.any():
            x = int(np.nonzero(bad)[0][0])
            details["violation"] = {
                "hypothesis": 2,
                "witness_center": x,
                "witness_n": int(n),
                "ball_mass": float(tail_mass[x]),
                "bound": float(bound[x]),
            }
            return CheckReport("distribution-principle", False, details)
    limit = mu_sequence[-1]
    if limit.mass(K) <= 0:
        details["violation"] = {"hypothesis": "limit-measure-positivity"}
        return CheckReport("distribution-principle", False, details)
    n_min = n_min or n_schedule[0]
    n_max = n_max or n_schedule[-1]
    est = pressure_estimate(
        "pesin", system, K, eps_schedule=[eps], n_min=n_min, n_max=n_max, tol=min(tol, 1e-3), exact=exact, budget=budget
    )
    details["pressure_estimate"] = est.value
    passed = est.value >= float(s) - tol
    details["conclusion"] = f"estimate {est.value:.6f} >= s - tol = {float(s) - tol:.6f}: {passed}"
    return CheckReport("distribution-principle", passed, details)


def billingsley_bound(mu, K, s, profile, direction, *, system, n_min, n_max, parts=1, tol=0.05, exact="auto", budget=None):
    """Pointwise local-pressure bounds on K transfer to the packing estimate.

    direction 'upper_le': if the upper local pressure is <= s on all of K,
    the packing estimate must be <= s (+tol). direction 'lower_ge': if it is
    >= s on all of K and K carries mass, the packing estimate must be >= s
    (-tol).
    """
    if direction not in ("upper_le", "lower_ge"):
        raise ValueError("direction must be 'upper_le' or 'lower_ge'")
    if not profile.covers(K.indices):
        raise ValueError("profile does not cover K")
    pos = np.searchsorted(profile.points, K.indices)
    uppers = profile.upper[pos]
    details = {"s": float(s), "direction": direction}
    if direction == "upper_le":
        bad = uppers > float(s)
    else:
        bad = uppers < float(s)
        if mu.mass(K) <= 0:
            details["violation"] = {"hypothesis": "mass", "mass": mu.mass(K)}
            return CheckReport("billingsley", False, details)
    if bad.any():
        witnesses = [int(i) for i in K.indices[bad][:8]]
        details["violation"] = {"hypothesis": "pointwise", "witness_points": witnesses}
        return CheckReport("billingsley", False, details)
    est = pressure_estimate(
        "packing",
        system,
        K,
        eps_schedule=list(profile.eps_schedule),
        n_min=n_min,
        n_max=n_max,
        parts=parts,
        tol=min(tol, 1e-3),
        exact=exact,
        budget=budget,
    )
    details["packing_estimate"] = est.value
    if direction == "upper_le":
        passed = est.value <= float(s) + tol
    else:
        passed = est.value >= float(s) - tol
    return CheckReport("billingsley", passed, details)


def variational_gap(
    K,
    measure_family,
    *,
    system,
    eps_schedule,
    n_schedule,
    n_min,
    n_max,
    parts=1,
    tol=0.05,
    exact="auto",
    budget=None,
):
    """Variational report: packing estimate of K against measure-pressure suprema.

    Asserts the provable direction (suprema do not exceed the packing
    estimate, within tolerance); the reverse direction is reported as a
    signed gap only.
    """
    for mu in measure_family:
        if abs(mu.mass(K) - 1.0) > _MASS_TOL:
            raise ValueError(f"family member {mu.name} has mass {mu.mass(K)} on K; full mass is required")
    packing = pressure_estimate(
        "packing", system, K, eps_schedule=eps_schedule, n_min=n_min, n_max=n_max, parts=parts, tol=min(tol, 1e-3), exact=exact, budget=budget
    )
    precondition = packing.value >= system.potential.sup_norm
    rows = []
    for mu in measure_family:
        profile = local_pressure(mu, system, eps_schedule=eps_schedule, n_schedule=n_schedule)
        upper_integral = measure_pressure_over_set(mu, K, profile, side="upper")
        mu_packing = measure_cp_pressure(
            mu,
            system,
            "packing",
            eps_schedule=eps_schedule,
            n_min=n_min,
            n_max=n_max,
            parts=parts,
            tol=min(tol, 1e-3),
            exact=exact,
            budget=budget,
            profile=profile,
        )
        rows.append({"measure": mu.name, "upper_integral": upper_integral, "measure_packing": mu_packing})
    sup_upper = max(r["upper_integral"] for r in rows)
    sup_packing = max(r["measure_packing"] for r in rows)
    details = {
        "packing_estimate": packing.value,
        "precondition_packing_ge_supnorm": bool(precondition),
        "sup_upper_integral": sup_upper,
        "sup_measure_packing": sup_packing,
        "gap_upper": packing.value - sup_upper,
        "gap_measure_packing": packing.value - sup_packing,
        "per_measure": rows,
    }
    passed = sup_upper <= packing.value + tol and sup_packing <= packing.value + tol
    return CheckReport("variational", passed, details)


# ---------------------------------------------------------------------------
# Empirical measures, generic points, non-wandering sets, uniform limits


def empirical_measure(system, x, n):
    """Orbit-average measure over the first n orbit points."""
    n = ensure_positive_int(n, "horizon n")
    x = ensure_index(x, system.space.size)
    w = np.zeros(system.space.size)
    xi = x
    for i in range(n):
        if i > 0:
            xi = int(system.maps.table(i)[xi])
        w[xi] += 1.0
    return DiscreteMeasure(w, name=f"empirical({x},{n})")


def generic_points(mu, system, family, radius, m, n_max):
    """Points whose orbit averages stay radius-close to the measure in the family seminorm.

    Returns the stable set (close for every horizon in [m, n_max]) plus the
    per-horizon sets.
    """
    radius = ensure_positive_float(radius, "radius")
    m = ensure_positive_int(m, "m")
    n_max = ensure_positive_int(n_max, "n_max")
    if m > n_max:
        raise ValueError("m must be <= n_max")
    space, maps = system.space, system.maps
    targets = family.values @ mu.weights
    acc = np.zeros((family.values.shape[0], space.size))
    pos = np.arange(space.size, dtype=np.int64)
    per_n = {}
    stable = np.ones(space.size, dtype=bool)
    for i in range(n_max):
        acc += family.values[:, pos]
        n = i + 1
        if n + 1 <= n_max:
            pos = maps.table(n)[pos]
        gap = np.max(np.abs(acc / n - targets[:, None]), axis=0)
        inside = gap <= radius
        per_n[n] = PointSet(np.nonzero(inside)[0], space)
        if n >= m:
            stable &= inside
    return PointSet(np.nonzero(stable)[0], space), per_n


def packing_bound_on_generic(
    mu,
    system,
    family,
    radius,
    *,
    m,
    n_max,
    eps_schedule,
    parts=1,
    tol=0.05,
    exact="auto",
    budget=None,
):
    """Packing estimate on the generic-point surrogate against the level-set growth bound.

    Both sides share the deep tail of the horizon range [m, n_max]: the left
    packing window starts there (the underlying comparison is between
    deep-horizon packings and separated sets on the level sets), and the
    right side is the tail max of the normalized separated growth.
    """
    generic, per_n = generic_points(mu, system, family, radius, m, n_max)
    details = {"radius": float(radius), "m": int(m), "n_max": int(n_max), "generic_size": len(generic)}
    if len(generic) == 0:
        details["status"] = "vacuous"
        return CheckReport("generic-packing-bound", True, details)
    n_values = list(range(m, n_max + 1))
    tail = tail_indices(n_values)
    window_start = n_values[tail[0]]
    left = pressure_estimate(
        "packing",
        system,
        generic,
        eps_schedule=eps_schedule,
        n_min=window_start,
        n_max=n_max,
        parts=parts,
        tol=min(tol, 1e-3),
        exact=exact,
        budget=budget,
    )
    eps = eps_schedule[-1]
    rates = []
    for n in n_values:
        level = per_n[n]
        if len(level) == 0:
            rates.append(-math.inf)
            continue
        cs = separated_sup(system.space, system.maps, level, system.potential, n, eps, exact=exact, budget=budget)
        rates.append(cs.log_value / n)
    right = max(rates[t] for t in tail)
    details["left_packing"] = left.value
    details["right_level_growth"] = right
    details["packing_window"] = (window_start, int(n_max))
    passed = left.value <= right + tol
    return CheckReport("generic-packing-bound", passed, details)


def non_wandering_set(system, k_max, radius):
    """Surrogate non-wandering set: radius-ball neighborhoods that return to themselves.

    A point survives when some composition started at some time index maps
    its metric ball back across itself within the horizon.
    """
    k_max = ensure_positive_int(k_max, "k_max")
    radius = ensure_positive_float(radius, "radius")
    space, maps = system.space, system.maps
    keep = []
    for x in range(space.size):
        ball = np.nonzero(space.rows(np.array([x]))[0] < radius)[0]
        returned = False
        for start in range(1, k_max + 1):
            image = ball.copy()
            for k in range(1, k_max + 1):
                image = maps.table(start + k - 1)[image]
                if np.isin(image, ball).any():
                    returned = True
                    break
            if returned:
                break
        if returned:
            keep.append(x)
    return PointSet(np.array(keep, dtype=np.int64), space)


def uniform_limit_check(mu, system, limit_table, family, horizon):
    """Invariance transport to a uniform limit map.

    The defect under the limit map is bounded by the family Lipschitz
    constant times the worst tail distance plus the defect along the
    sequence itself.
    """
    horizon = ensure_positive_int(horizon, "horizon")
    limit_table = np.asarray(limit_table, dtype=np.int64)
    space, maps = system.space, system.maps
    arange = np.arange(space.size)
    tail_dists = []
    for j in range(1, horizon + 1):
        t = maps.table(j)
        d = space.rows(t)[arange, limit_table]
        tail_dists.append(float(d.max()))
    seq_defect = invariance_defect(mu, maps, horizon, family)
    base = family.values @ mu.weights
    limit_integrals = family.values[:, limit_table] @ mu.weights
    limit_defect = float(np.max(np.abs(limit_integrals - base)))
    bound = family.max_lipschitz * max(tail_dists) + seq_defect
    passed = limit_defect <= bound + 1e-12
    details = {
        "tail_distances": tail_dists,
        "sequence_defect": seq_defect,
        "limit_defect": limit_defect,
        "bound": bound,
    }
    return CheckReport("uniform-limit", passed, details)
