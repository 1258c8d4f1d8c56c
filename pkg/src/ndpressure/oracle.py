"""Exhaustive ground-truth solvers for small cover and packing instances.

Both solvers run branch-and-bound over candidate subsets and either return
the exact optimum or raise `CapacityError` when a budget cap would be
exceeded; there is no silent fallback to an approximation. Candidates are
canonically sorted on entry, so values and witnesses are independent of the
order in which candidates are supplied.

Weights are handled in log scale throughout; bounds are formed on linear
weights shifted by the maximum exponent, so no exponential overflows.
"""

import hashlib
import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "OracleBudget",
    "CapacityError",
    "Candidate",
    "exact_cover_infimum",
    "exact_packing_supremum",
    "fixture_record",
    "write_fixtures",
]


@dataclass(frozen=True)
class OracleBudget:
    max_points: int = 12
    max_candidates: int = 60
    max_subsets: int = 2**24

    def check_instance(self, n_points, n_candidates):
        if n_points > self.max_points:
            raise CapacityError(f"instance has {n_points} points, budget allows {self.max_points}")
        if n_candidates > self.max_candidates:
            raise CapacityError(f"instance has {n_candidates} candidates, budget allows {self.max_candidates}")


class CapacityError(RuntimeError):
    """An enumeration budget would be exceeded; the oracle refuses to guess."""


@dataclass(frozen=True)
class Candidate:
    """One candidate ball: a member bitmask plus its log weight and identity key."""

    members: int  # bitmask over point indices
    log_weight: float
    key: tuple  # (center, n); lexicographic tie-break identity

    @property
    def count(self):
        return self.members.bit_count()


class _NodeCounter:
    __slots__ = ("left",)

    def __init__(self, cap):
        self.left = cap

    def tick(self):
        self.left -= 1
        if self.left < 0:
            raise CapacityError("subset enumeration cap exceeded")


def _log_sum(log_weights):
    """Stable sum of exp(log w) in the given (fixed) order, returned as a log."""
    if not log_weights:
        return float("-inf")
    m = max(log_weights)
    if m == float("-inf"):
        return m
    return m + float(np.log(sum(np.exp(np.asarray(log_weights) - m))))


def _greedy_cover_incumbent(cands, universe):
    chosen = []
    covered = 0
    while covered & universe != universe:
        best = None
        best_score = None
        for c in cands:
            new = (c.members & universe) & ~covered
            k = new.bit_count()
            if k == 0:
                continue
            score = c.log_weight - float(np.log(k))
            if best_score is None or score < best_score or (score == best_score and c.key < best.key):
                best, best_score = c, score
        if best is None:
            return None
        chosen.append(best)
        covered |= best.members
    return chosen


def exact_cover_infimum(candidates, universe_mask, budget=None, n_points=None):
    """Exact minimum total weight of a sub-collection covering `universe_mask`.

    Branch-and-bound: branch on the uncovered point with the fewest covering
    candidates; admissible bound adds, for the single hardest uncovered point,
    the cheapest ball covering it. Returns ``(log_value, witnesses)``.
    """
    budget = budget or OracleBudget()
    cands = sorted(candidates, key=lambda c: c.key)
    pts = universe_mask.bit_count() if n_points is None else n_points
    budget.check_instance(pts, len(cands))
    if universe_mask == 0:
        return float("-inf"), []

    cover_all = 0
    for c in cands:
        cover_all |= c.members
    if cover_all & universe_mask != universe_mask:
        raise ValueError("candidates cannot cover the requested set")

    counter = _NodeCounter(budget.max_subsets)
    # Linear-scale weights shifted by the max exponent keep bounds overflow-free.
    shift = max(c.log_weight for c in cands)
    lin = {c.key: float(np.exp(c.log_weight - shift)) for c in cands}

    incumbent = _greedy_cover_incumbent(cands, universe_mask)
    best_value = sum(lin[c.key] for c in incumbent)
    best_set = sorted(c.key for c in incumbent)
    by_point = {}

    def covering(point_bit):
        got = by_point.get(point_bit)
        if got is None:
            got = [c for c in cands if c.members & point_bit]
            by_point[point_bit] = got
        return got

    def cheapest_bound(uncovered):
        bound = 0.0
        rest = uncovered
        while rest:
            bit = rest & -rest
            rest &= rest - 1
            opts = covering(bit)
            if not opts:
                return float("inf")
            bound = max(bound, min(lin[c.key] for c in opts))
        return bound

    def recurse(covered, value, chosen_keys):
        nonlocal best_value, best_set
        counter.tick()
        uncovered = universe_mask & ~covered
        if not uncovered:
            keys = sorted(chosen_keys)
            if value < best_value or (value == best_value and keys < best_set):
                best_value, best_set = value, keys
            return
        if value + cheapest_bound(uncovered) > best_value:
            return
        # Branch on the uncovered point with fewest options, exploring options
        # in canonical key order.
        pick_opts = None
        rest = uncovered
        while rest:
            bit = rest & -rest
            rest &= rest - 1
            opts = [c for c in covering(bit) if c.key not in chosen_keys]
            if pick_opts is None or len(opts) < len(pick_opts):
                pick_opts = opts
            if len(opts) <= 1:
                break
        for c in pick_opts:
            recurse(covered | c.members, value + lin[c.key], chosen_keys + [c.key])

    recurse(0, 0.0, [])
    # Recompute in ascending-key witness order for the fixed summation contract.
    key_to_lw = {c.key: c.log_weight for c in cands}
    log_value = _log_sum([key_to_lw[k] for k in best_set])
    return log_value, list(best_set)


def exact_packing_supremum(candidates, budget=None):
    """Exact maximum total weight of a pairwise-disjoint sub-collection.

    Max-weight independent set on the ball-conflict graph, by include/exclude
    branch-and-bound seeded with the descending-weight greedy incumbent.
    Returns ``(log_value, witnesses)``.
    """
    budget = budget or OracleBudget()
    cands = sorted(candidates, key=lambda c: c.key)
    budget.check_instance(0, len(cands))
    if not cands:
        return float("-inf"), []

    counter = _NodeCounter(budget.max_subsets)
    shift = max(c.log_weight for c in cands)
    lin = [float(np.exp(c.log_weight - shift)) for c in cands]

    # Greedy incumbent: heaviest-first, lexicographic tie-break.
    order = sorted(range(len(cands)), key=lambda i: (-cands[i].log_weight, cands[i].key))
    taken_mask = 0
    greedy_idx = []
    for i in order:
        if not (cands[i].members & taken_mask):
            greedy_idx.append(i)
            taken_mask |= cands[i].members
    best_value = sum(lin[i] for i in greedy_idx)
    best_set = sorted(cands[i].key for i in greedy_idx)

    suffix = [0.0] * (len(cands) + 1)
    for i in range(len(cands) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + lin[i]

    def recurse(i, used_mask, value, chosen):
        nonlocal best_value, best_set
        counter.tick()
        keys = sorted(chosen)
        if value > best_value or (value == best_value and keys < best_set):
            best_value, best_set = value, keys
        if i == len(cands) or value + suffix[i] < best_value:
            return
        c = cands[i]
        if not (c.members & used_mask):
            recurse(i + 1, used_mask | c.members, value + lin[i], chosen + [c.key])
        recurse(i + 1, used_mask, value, chosen)

    recurse(0, 0, 0.0, [])
    by_key = {c.key: c.log_weight for c in cands}
    log_value = _log_sum([by_key[k] for k in best_set])
    return log_value, best_set


def fixture_record(kind, candidates, universe_mask, log_value, witnesses):
    """Provenance record (instance hash, value, witnesses) for a committed fixture."""
    canon = {
        "kind": kind,
        "universe": universe_mask,
        "candidates": sorted((c.key, c.members, round(c.log_weight, 15)) for c in candidates),
    }
    blob = json.dumps(canon, sort_keys=True, default=list).encode()
    return {
        "kind": kind,
        "instance": hashlib.sha256(blob).hexdigest()[:16],
        "log_value": log_value,
        "witnesses": [list(w) for w in witnesses],
    }


def write_fixtures(path, records):
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
