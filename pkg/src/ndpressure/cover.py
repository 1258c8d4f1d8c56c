"""Combinatorial engines for spanning, separated, cover, and packing sums.

Every functional here is an infimum or supremum over families of Bowen balls.
The engines commit to deterministic greedy selection (weighted set cover for
the infima, max-weight independent set for the suprema) and consult the exact
branch-and-bound oracle whenever the instance fits the budget, recording an
exactness flag on every result. Weights are carried in log scale; reported
sums are accumulated in ascending witness order.

Candidate balls for cover functionals are centered anywhere in the space;
packing candidates are centered inside the target set and must be pairwise
disjoint as subsets of the full space. Balls with identical member sets are
merged under the dominance rule of their mode (cheapest representative for
covers, heaviest for packings), which leaves the optimal value unchanged.
"""

from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from . import oracle as _oracle
from .oracle import Candidate, CapacityError, OracleBudget
from .space import PointSet, bowen_ball, bowen_memberships, bowen_rows
from .systems import birkhoff_table
from .validation import ensure_positive_float, ensure_positive_int

__all__ = [
    "CoverSum",
    "BallFamily",
    "spanning_set",
    "separated_set",
    "separated_sup",
    "fixed_cover_sum",
    "variable_cover_sum",
    "packing_sum",
    "refined_packing_sum",
    "open_cover_sum",
    "vitali_subfamily",
]

_LOCAL_MOVE_CAP = 64  # refined-packing local moves are searched only this far


@dataclass
class CoverSum:
    """Value of one cover/packing functional together with its witnesses.

    `witnesses` is the list of (center, n) pairs realizing the bound, sorted
    ascending; recomputing the weighted sum over them in that order reproduces
    `log_value`. `exact` records whether the value came from the exhaustive
    oracle or from the greedy engine.
    """

    value: float
    log_value: float
    witnesses: list
    mode: str
    exact: bool
    meta: dict = field(default_factory=dict)

    def recompute_log(self, log_weight_of):
        logs = [log_weight_of(center, n) for center, n in self.witnesses]
        return _log_sum(logs)


def _log_sum(log_weights):
    if len(log_weights) == 0:
        return float("-inf")
    m = max(log_weights)
    if m == float("-inf"):
        return m
    return m + float(np.log(sum(np.exp(np.asarray(log_weights, dtype=np.float64) - m))))


def _finish(log_value, witnesses, mode, exact, meta):
    value = float(np.exp(log_value)) if log_value != float("-inf") else 0.0
    return CoverSum(value=value, log_value=float(log_value), witnesses=sorted(witnesses), mode=mode, exact=exact, meta=meta)


# ---------------------------------------------------------------------------
# Ball families (shared, cached candidate geometry)


class BallFamily:
    """Closed (or open) Bowen balls around every center, for all horizons up to n_max.

    The horizon scan shares one running orbit maximum, so materializing every
    horizon 1..n_max costs the same as the deepest one alone.
    """

    def __init__(self, space, maps, eps, n_max, closed=True):
        self.space = space
        self.maps = maps
        self.eps = float(eps)
        self.closed = bool(closed)
        self.n_max = ensure_positive_int(n_max, "horizon")
        self.n_values = list(range(1, self.n_max + 1))
        self.centers = np.arange(space.size, dtype=np.int64)
        self._packed = bowen_memberships(space, maps, self.n_values, self.eps, self.centers, closed=self.closed)
        self._bool = {}
        self._groups = {}

    def members_bool(self, n):
        # Unpacked matrices are size**2 booleans; keep only a few around.
        got = self._bool.get(n)
        if got is None:
            got = np.unpackbits(self._packed[n], axis=1, count=self.space.size).astype(bool)
            self._bool[n] = got
            while len(self._bool) > 3:
                self._bool.pop(next(iter(self._bool)))
        return got

    def packed(self, n):
        return self._packed[n]


_FAMILY_CACHE = OrderedDict()
_FAMILY_CACHE_CAP = 8


def _family(space, maps, eps, n_values, closed=True):
    n_max = max(int(n) for n in n_values)
    key = (id(space), id(maps), float(eps), bool(closed))
    fam = _FAMILY_CACHE.get(key)
    if fam is None or fam.space is not space or fam.maps is not maps or fam.n_max < n_max:
        fam = BallFamily(space, maps, eps, n_max, closed=closed)
        _FAMILY_CACHE[key] = fam
        while len(_FAMILY_CACHE) > _FAMILY_CACHE_CAP:
            _FAMILY_CACHE.popitem(last=False)
    else:
        _FAMILY_CACHE.move_to_end(key)
    return fam


def prefetch_balls(space, maps, eps, n_values, closed=True):
    """Warm the shared ball-family cache up to the deepest requested horizon."""
    return _family(space, maps, eps, n_values, closed=closed)


_BIRKHOFF_CACHE = OrderedDict()


def _birkhoff(potential, maps, n_max):
    key = (id(potential), id(maps))
    entry = _BIRKHOFF_CACHE.get(key)
    if entry is None or entry[0] is not potential or entry[1] is not maps or entry[2].shape[0] <= n_max:
        table = birkhoff_table(potential, maps, max(n_max, 1))
        _BIRKHOFF_CACHE[key] = (potential, maps, table)
        while len(_BIRKHOFF_CACHE) > _FAMILY_CACHE_CAP:
            _BIRKHOFF_CACHE.popitem(last=False)
        return table
    return entry[2]


# ---------------------------------------------------------------------------
# Candidate groups (deduplicated balls)


def _group_candidates(family, n_values, center_filter_mask, restrict_mask):
    """Group (center, n) candidates by identical member sets.

    `center_filter_mask` restricts which centers may serve as candidates;
    `restrict_mask` intersects the member sets before comparison (pass the
    target-set mask for covers, None for packings). Returns a list of groups
    ``(members_bool, [(center, n), ...])`` ordered by canonical key.
    """
    merged = {}
    centers = np.nonzero(center_filter_mask)[0]
    for n in n_values:
        if restrict_mask is not None:
            packed = np.packbits(family.members_bool(n) & restrict_mask, axis=1)
        else:
            packed = family.packed(n)
        for center in centers:
            blob = packed[center].tobytes()
            merged.setdefault(blob, []).append((int(center), int(n)))
    out = []
    for blob, pairs in merged.items():
        row = np.unpackbits(np.frombuffer(blob, dtype=np.uint8), count=family.space.size).astype(bool)
        out.append((row, sorted(pairs)))
    out.sort(key=lambda g: g[1][0])
    return out


def _cached_groups(family, n_values, center_filter_mask, restrict_mask):
    key = (
        tuple(n_values),
        np.packbits(center_filter_mask).tobytes(),
        None if restrict_mask is None else np.packbits(restrict_mask).tobytes(),
    )
    got = family._groups.get(key)
    if got is None:
        got = _group_candidates(family, n_values, center_filter_mask, restrict_mask)
        family._groups[key] = got
    return got


def _reduce_groups(groups, birkhoff, s, pick_max):
    """Pick one representative (center, n) per group by dominance at parameter s."""
    reps = []
    for row, pairs in groups:
        best_key = None
        best_lw = None
        for center, n in pairs:
            lw = -s * n + birkhoff[n][center]
            better = best_lw is None or (lw > best_lw if pick_max else lw < best_lw)
            if better or (lw == best_lw and (center, n) < best_key):
                best_key, best_lw = (center, n), lw
        reps.append((row, best_key, best_lw))
    return reps


# ---------------------------------------------------------------------------
# Greedy engines


def _greedy_cover(reps, target_mask):
    """Deterministic greedy weighted set cover.

    Picks, each round, the ball minimizing weight per newly covered point
    (log-scale score ``log w - log(new points)``), lexicographic tie-break.
    """
    C = len(reps)
    members = np.stack([r[0] for r in reps]) if C else np.zeros((0, target_mask.size), dtype=bool)
    logw = np.array([r[2] for r in reps], dtype=np.float64)
    remaining = target_mask.copy()
    counts = (members & remaining).sum(axis=1).astype(np.float64)
    chosen = []
    while remaining.any():
        with np.errstate(divide="ignore"):
            scores = logw - np.log(counts)
        scores[counts == 0] = np.inf
        best = int(np.argmin(scores))
        ties = np.nonzero(scores == scores[best])[0]
        if ties.size > 1:
            best = int(min(ties, key=lambda i: reps[i][1]))
        if not np.isfinite(scores[best]):
            raise ValueError("candidates cannot cover the requested set")
        newly = members[best] & remaining
        remaining &= ~members[best]
        counts -= (members[:, newly]).sum(axis=1)
        chosen.append(best)
    return chosen


def _greedy_pack_pass(reps, indices):
    order = sorted(indices, key=lambda i: (-reps[i][2], reps[i][1]))
    used = None
    chosen = []
    for i in order:
        row = reps[i][0]
        if used is None:
            used = np.zeros_like(row)
        if not (row & used).any():
            chosen.append(i)
            used |= row
    return chosen


def _greedy_pack(reps):
    """Deterministic greedy max-weight disjoint family.

    Heaviest-first greedy over the mixed-horizon pool, plus one pass per
    single horizon (a shallow ball blocks every deeper ball it contains, so
    the pure-level families are searched explicitly); the best family wins,
    ties resolved toward the mixed pass then the shallower level.
    """
    passes = [_greedy_pack_pass(reps, range(len(reps)))]
    levels = sorted({key[1] for _, key, _ in reps})
    if len(levels) > 1:
        for n in levels:
            passes.append(_greedy_pack_pass(reps, [i for i in range(len(reps)) if reps[i][1][1] == n]))
    best = None
    best_log = None
    for chosen in passes:
        log_value = _log_sum(sorted(reps[i][2] for i in chosen))
        if best_log is None or log_value > best_log:
            best, best_log = chosen, log_value
    return best


def _mwis_candidates(conflict, keys, log_weights):
    """Encode a max-weight independent set instance as disjoint-members candidates.

    Each vertex owns a private bit plus one bit per incident edge; adjacent
    vertices share exactly their edge bit, so pairwise-disjoint member sets
    correspond exactly to independent sets.
    """
    m = len(keys)
    edges = [(a, b) for a in range(m) for b in range(a + 1, m) if conflict[a, b]]
    out = []
    for v in range(m):
        mask = 1 << v
        for e, (a, b) in enumerate(edges):
            if v in (a, b):
                mask |= 1 << (m + e)
        out.append(Candidate(members=mask, log_weight=float(log_weights[v]), key=keys[v]))
    return out


def _to_oracle_candidates(reps):
    out = []
    for row, key, lw in reps:
        mask = int.from_bytes(np.packbits(row).tobytes(), "big")
        out.append(Candidate(members=mask, log_weight=float(lw), key=key))
    return out


def _mask_to_int(mask):
    return int.from_bytes(np.packbits(mask).tobytes(), "big")


def _run_cover(reps, target_mask, mode, exact, budget, meta):
    budget = budget or OracleBudget()
    greedy_idx = _greedy_cover(reps, target_mask)
    greedy_witnesses = [reps[i][1] for i in greedy_idx]
    greedy_log = _log_sum([reps[i][2] for i in sorted(greedy_idx, key=lambda i: reps[i][1])])
    meta = dict(meta)
    meta["greedy_log_value"] = float(greedy_log)
    meta["n_candidates"] = len(reps)
    if exact == "greedy":
        return _finish(greedy_log, greedy_witnesses, mode, False, meta)
    n_points = int(target_mask.sum())
    within = len(reps) <= budget.max_candidates and n_points <= budget.max_points
    if exact == "auto" and not within:
        return _finish(greedy_log, greedy_witnesses, mode, False, meta)
    log_value, witnesses = _oracle.exact_cover_infimum(
        _to_oracle_candidates(reps), _mask_to_int(target_mask), budget, n_points=n_points
    )
    return _finish(log_value, witnesses, mode, True, meta)


def _run_pack(reps, mode, exact, budget, meta):
    budget = budget or OracleBudget()
    greedy_idx = _greedy_pack(reps)
    greedy_witnesses = [reps[i][1] for i in greedy_idx]
    greedy_log = _log_sum([reps[i][2] for i in sorted(greedy_idx, key=lambda i: reps[i][1])])
    meta = dict(meta)
    meta["greedy_log_value"] = float(greedy_log)
    meta["n_candidates"] = len(reps)
    if exact == "greedy":
        return _finish(greedy_log, greedy_witnesses, mode, False, meta)
    within = len(reps) <= budget.max_candidates
    if exact == "auto" and not within:
        return _finish(greedy_log, greedy_witnesses, mode, False, meta)
    log_value, witnesses = _oracle.exact_packing_supremum(_to_oracle_candidates(reps), budget)
    return _finish(log_value, witnesses, mode, True, meta)


def _require_subset(K):
    if not isinstance(K, PointSet) or len(K) == 0:
        raise ValueError("K must be a nonempty PointSet")
    return K


# ---------------------------------------------------------------------------
# Spanning and separated sets


@dataclass
class SetResult:
    points: PointSet
    cardinality: int
    exact: bool
    meta: dict = field(default_factory=dict)


def spanning_set(space, maps, K, n, eps, *, exact="auto", budget=None):
    """Greedy farthest-point spanning set for K; cardinality bounds r_n from above."""
    K = _require_subset(K)
    n = ensure_positive_int(n, "horizon n")
    eps = ensure_positive_float(eps, "eps")
    idx = K.indices
    selected = [int(idx[0])]
    dmin = bowen_rows(space, maps, n, np.array(selected))[0][idx]
    while dmin.max() > eps:
        far = int(np.argmax(dmin))
        ties = np.nonzero(dmin == dmin[far])[0]
        far = int(ties.min())
        nxt = int(idx[far])
        selected.append(nxt)
        dmin = np.minimum(dmin, bowen_rows(space, maps, n, np.array([nxt]))[0][idx])
    result = SetResult(points=PointSet(np.array(sorted(selected)), space), cardinality=len(selected), exact=False)
    if exact != "greedy":
        budget = budget or OracleBudget()
        try:
            fam = _family(space, maps, eps, [n], closed=True)
            groups = _group_candidates(fam, [n], K.mask, K.mask)
            reps = [(row, pairs[0], 0.0) for row, pairs in groups]
            if len(reps) <= budget.max_candidates and len(K) <= budget.max_points:
                log_min, witnesses = _oracle.exact_cover_infimum(
                    _to_oracle_candidates(reps), _mask_to_int(K.mask), budget, n_points=len(K)
                )
                minimum = len(witnesses)
                result.meta["oracle_minimum"] = minimum
                result.exact = minimum == result.cardinality
            elif exact == "oracle":
                raise CapacityError("spanning-set oracle confirmation exceeds the budget")
        except CapacityError:
            if exact == "oracle":
                raise
    return result


def separated_set(space, maps, K, n, eps, *, exact="auto", budget=None):
    """Greedy maximal separated set (lexicographic scan); cardinality bounds s_n from below."""
    K = _require_subset(K)
    n = ensure_positive_int(n, "horizon n")
    eps = ensure_positive_float(eps, "eps")
    idx = K.indices
    alive = np.ones(idx.size, dtype=bool)
    selected = []
    for pos in range(idx.size):
        if not alive[pos]:
            continue
        x = int(idx[pos])
        selected.append(x)
        row = bowen_rows(space, maps, n, np.array([x]))[0][idx]
        alive &= row > eps
    # Every maximal separated set must span at radius eps; re-verify.
    sel_rows = bowen_rows(space, maps, n, np.array(selected))[:, idx]
    if np.any(sel_rows.min(axis=0) > eps):
        raise AssertionError("maximal separated set failed to span; metric or scan order is broken")
    result = SetResult(points=PointSet(np.array(sorted(selected)), space), cardinality=len(selected), exact=False)
    if exact != "greedy":
        budget = budget or OracleBudget()
        if len(K) <= budget.max_candidates and len(K) <= budget.max_points:
            pair = bowen_rows(space, maps, n, idx)[:, idx]
            conflict = pair <= eps
            keys = [(int(i), n) for i in idx]
            cands = _mwis_candidates(conflict, keys, np.zeros(idx.size))
            _, witnesses = _oracle.exact_packing_supremum(cands, budget)
            result.meta["oracle_maximum"] = len(witnesses)
            result.exact = len(witnesses) == result.cardinality
        elif exact == "oracle":
            raise CapacityError("separated-set oracle confirmation exceeds the budget")
    return result


def separated_sup(space, maps, K, potential, n, eps, *, exact="auto", budget=None):
    """Separated-set supremum of orbit-sum weights (the P_n functional)."""
    K = _require_subset(K)
    n = ensure_positive_int(n, "horizon n")
    eps = ensure_positive_float(eps, "eps")
    birkhoff = _birkhoff(potential, maps, n)
    idx = K.indices
    weights = birkhoff[n][idx]
    order = sorted(range(idx.size), key=lambda a: (-weights[a], int(idx[a])))
    chosen_pos = []
    alive = np.ones(idx.size, dtype=bool)
    for a in order:
        if alive[a]:
            chosen_pos.append(a)
            row = bowen_rows(space, maps, n, np.array([int(idx[a])]))[0][idx]
            alive &= row > eps
    witnesses = sorted((int(idx[a]), n) for a in chosen_pos)
    greedy_log = _log_sum([birkhoff[n][c] for c, _ in witnesses])
    meta = {"greedy_log_value": float(greedy_log), "eps": eps, "n": n}
    if exact == "greedy":
        return _finish(greedy_log, witnesses, "separated", False, meta)
    budget = budget or OracleBudget()
    if len(K) <= budget.max_candidates and len(K) <= budget.max_points:
        pair = bowen_rows(space, maps, n, idx)[:, idx]
        conflict = pair <= eps
        keys = [(int(i), n) for i in idx]
        cands = _mwis_candidates(conflict, keys, weights)
        log_value, oracle_witnesses = _oracle.exact_packing_supremum(cands, budget)
        return _finish(log_value, oracle_witnesses, "separated", True, meta)
    if exact == "oracle":
        raise CapacityError("separated supremum oracle exceeds the budget")
    return _finish(greedy_log, witnesses, "separated", False, meta)


# ---------------------------------------------------------------------------
# Cover functionals


def fixed_cover_sum(space, maps, K, potential, N, eps, *, exact="auto", budget=None):
    """Minimal total orbit-sum weight of fixed-horizon balls covering K.

    Candidate centers range over the whole space. The s-discounted
    fixed-horizon functional is ``exp(-s N) * value``.
    """
    K = _require_subset(K)
    N = ensure_positive_int(N, "N")
    eps = ensure_positive_float(eps, "eps")
    fam = _family(space, maps, eps, [N], closed=True)
    birkhoff = _birkhoff(potential, maps, N)
    all_centers = np.ones(space.size, dtype=bool)
    groups = _cached_groups(fam, [N], all_centers, K.mask)
    groups = [(row, pairs) for row, pairs in groups if row.any()]
    reps = _reduce_groups(groups, birkhoff, 0.0, pick_max=False)
    return _run_cover(reps, K.mask.copy(), "fixed-length-cover", exact, budget, {"eps": eps, "N": N})


def variable_cover_sum(space, maps, K, potential, eps, s, N, Nmax, *, exact="auto", budget=None):
    """Minimal total weight exp(-s n + orbit sum) over mixed-horizon ball covers of K."""
    K = _require_subset(K)
    N = ensure_positive_int(N, "N")
    Nmax = ensure_positive_int(Nmax, "Nmax")
    if Nmax < N:
        raise ValueError(f"Nmax ({Nmax}) must be >= N ({N})")
    eps = ensure_positive_float(eps, "eps")
    n_values = list(range(N, Nmax + 1))
    fam = _family(space, maps, eps, n_values, closed=True)
    birkhoff = _birkhoff(potential, maps, Nmax)
    all_centers = np.ones(space.size, dtype=bool)
    groups = _cached_groups(fam, n_values, all_centers, K.mask)
    groups = [(row, pairs) for row, pairs in groups if row.any()]
    reps = _reduce_groups(groups, birkhoff, float(s), pick_max=False)
    meta = {"eps": eps, "window": (N, Nmax), "s": float(s)}
    return _run_cover(reps, K.mask.copy(), "variable-length-cover", exact, budget, meta)


def packing_sum(space, maps, K, potential, eps, s, N, Nmax, *, exact="auto", budget=None):
    """Maximal total weight of pairwise-disjoint closed balls centered in K."""
    K = _require_subset(K)
    N = ensure_positive_int(N, "N")
    Nmax = ensure_positive_int(Nmax, "Nmax")
    if Nmax < N:
        raise ValueError(f"Nmax ({Nmax}) must be >= N ({N})")
    eps = ensure_positive_float(eps, "eps")
    n_values = list(range(N, Nmax + 1))
    fam = _family(space, maps, eps, n_values, closed=True)
    birkhoff = _birkhoff(potential, maps, Nmax)
    groups = _cached_groups(fam, n_values, K.mask, None)
    reps = _reduce_groups(groups, birkhoff, float(s), pick_max=True)
    meta = {"eps": eps, "window": (N, Nmax), "s": float(s)}
    result = _run_pack(reps, "packing", exact, budget, meta)
    _assert_disjoint_witnesses(result, fam, K)
    return result


def _assert_disjoint_witnesses(result, fam, K):
    used = None
    for center, n in result.witnesses:
        if center not in K:
            raise AssertionError("packing witness center escaped the target set")
        row = fam.members_bool(n)[center]
        if used is None:
            used = np.zeros_like(row)
        if (row & used).any():
            raise AssertionError("packing witnesses are not pairwise disjoint")
        used |= row


def refined_packing_sum(space, maps, K, potential, eps, s, N, Nmax, parts=1, *, exact="auto", budget=None):
    """Packing supremum refined over a searched family of partitions of K.

    Partitions are seeded by farthest-point clustering in the base metric with
    at most `parts` pieces, followed by a bounded local-move pass on small
    sets; the trivial one-piece partition is always in the family, so the
    result never exceeds the plain packing sum.
    """
    K = _require_subset(K)
    parts = ensure_positive_int(parts, "parts")
    whole = packing_sum(space, maps, K, potential, eps, s, N, Nmax, exact=exact, budget=budget)
    best = whole
    best_partition = [K]
    for p in range(2, min(parts, len(K)) + 1):
        partition = _seed_partition(space, K, p)
        total, sums = _partition_value(space, maps, partition, potential, eps, s, N, Nmax, exact, budget)
        if len(K) <= _LOCAL_MOVE_CAP:
            partition, total, sums = _local_moves(
                space, maps, partition, total, sums, potential, eps, s, N, Nmax, exact, budget
            )
        if total < best.log_value:
            witnesses = sorted(w for cs in sums for w in cs.witnesses)
            best = CoverSum(
                value=float(np.exp(total)),
                log_value=float(total),
                witnesses=witnesses,
                mode="refined-packing",
                exact=all(cs.exact for cs in sums) and whole.exact,
                meta={"eps": eps, "window": (N, Nmax), "s": float(s), "parts": p},
            )
            best_partition = partition
    meta = dict(best.meta)
    meta.setdefault("parts", 1)
    meta["partition_sizes"] = [len(piece) for piece in best_partition]
    return CoverSum(best.value, best.log_value, best.witnesses, "refined-packing", best.exact, meta)


def _seed_partition(space, K, p):
    idx = K.indices
    seeds = [int(idx[0])]
    rows = space.rows(np.array(seeds))[:, idx]
    while len(seeds) < p:
        dmin = rows.min(axis=0)
        far = int(np.argmax(dmin))
        ties = np.nonzero(dmin == dmin[far])[0]
        far = int(ties.min())
        nxt = int(idx[far])
        if nxt in seeds:
            break
        seeds.append(nxt)
        rows = np.vstack([rows, space.rows(np.array([nxt]))[0][idx]])
    assign = np.argmin(rows, axis=0)  # ties go to the lowest seed index
    pieces = []
    for a in range(len(seeds)):
        members = idx[assign == a]
        if members.size:
            pieces.append(PointSet(members, space))
    return pieces


def _partition_value(space, maps, partition, potential, eps, s, N, Nmax, exact, budget):
    sums = [packing_sum(space, maps, piece, potential, eps, s, N, Nmax, exact=exact, budget=budget) for piece in partition]
    return _log_sum(sorted(cs.log_value for cs in sums)), sums


def _local_moves(space, maps, partition, total, sums, potential, eps, s, N, Nmax, exact, budget):
    for x in sorted(int(i) for piece in partition for i in piece.indices):
        src = next(k for k, piece in enumerate(partition) if x in piece)
        if len(partition[src]) == 1:
            continue
        for dst in range(len(partition)):
            if dst == src:
                continue
            trial = list(partition)
            trial[src] = PointSet(np.setdiff1d(partition[src].indices, [x]), space)
            trial[dst] = PointSet(np.union1d(partition[dst].indices, [x]), space)
            trial_total, trial_sums = _partition_value(space, maps, trial, potential, eps, s, N, Nmax, exact, budget)
            if trial_total < total:
                partition, total, sums = trial, trial_total, trial_sums
                break
    return partition, total, sums


# ---------------------------------------------------------------------------
# Open-cover functional and the Vitali subfamily


def open_cover_sum(space, maps, K, potential, n, cover_u, *, exact="auto", budget=None):
    """Weighted cover functional over the n-step join of an open cover.

    The join intersects preimages of the cover elements along the orbit; each
    join element is weighted by the infimum of exp(orbit sum) over the element
    restricted to K.
    """
    K = _require_subset(K)
    n = ensure_positive_int(n, "horizon n")
    union = np.zeros(space.size, dtype=bool)
    elements = []
    for u in cover_u:
        mask = u.mask.copy()
        union |= mask
        elements.append(mask)
    if not union.all():
        raise ValueError("cover_u does not cover the space")
    join = elements
    for j in range(1, n):
        orbit = maps.orbit_table(j)
        preimages = [np.isin(orbit, u.indices) for u in cover_u]
        nxt = []
        seen = set()
        for e in join:
            for pre in preimages:
                cell = e & pre
                if cell.any():
                    blob = np.packbits(cell).tobytes()
                    if blob not in seen:
                        seen.add(blob)
                        nxt.append(cell)
        join = nxt
    birkhoff = _birkhoff(potential, maps, n)
    reps = []
    cells = []
    for cell in join:
        restricted = cell & K.mask
        if restricted.any():
            cells.append((np.packbits(cell).tobytes(), restricted))
    cells.sort(key=lambda t: t[0])
    for rank, (_, restricted) in enumerate(cells):
        logw = float(birkhoff[n][restricted].min())
        reps.append((restricted, (rank, n), logw))
    return _run_cover(reps, K.mask.copy(), "open-cover", exact, budget, {"n": n, "join_size": len(reps)})


def vitali_subfamily(balls, maps):
    """Greedy disjoint subfamily whose 5x-enlarged balls absorb the input union.

    Balls are taken by decreasing radius (coarser horizon first among equal
    radii); the absorption postcondition is re-verified on materialized
    enlargements and a failure is reported as a broken-metric error.
    """
    if not balls:
        raise ValueError("vitali_subfamily needs a nonempty ball list")
    space = balls[0].members.space
    order = sorted(range(len(balls)), key=lambda i: (-balls[i].eps, balls[i].n, balls[i].center))
    used = np.zeros(space.size, dtype=bool)
    selected = []
    for i in order:
        mask = balls[i].members.mask
        if not (mask & used).any():
            selected.append(balls[i])
            used |= mask
    covered = np.zeros(space.size, dtype=bool)
    for b in selected:
        enlarged = bowen_ball(space, maps, b.n, 5.0 * b.eps, b.center, closed=b.closed)
        covered |= enlarged.members.mask
    original = np.zeros(space.size, dtype=bool)
    for b in balls:
        original |= b.members.mask
    if np.any(original & ~covered):
        raise AssertionError("Vitali absorption failed: enlarged balls miss the input union (broken triangle inequality?)")
    for a in range(len(selected)):
        for b in range(a + 1, len(selected)):
            if (selected[a].members.mask & selected[b].members.mask).any():
                raise AssertionError("Vitali subfamily is not pairwise disjoint")
    return selected
