import json
import math
import random

import pytest

from ndpressure.oracle import (
    Candidate,
    CapacityError,
    OracleBudget,
    exact_cover_infimum,
    exact_packing_supremum,
    fixture_record,
    write_fixtures,
)

from _brute import cover_min_weight, packing_max_weight


def _mask(bits):
    out = 0
    for b in bits:
        out |= 1 << b
    return out


def _random_instance(seed, n_points=6, n_cands=10):
    rs = random.Random(seed)
    cands = []
    members = []
    weights = []
    for i in range(n_cands):
        size = rs.randint(1, n_points)
        bits = frozenset(rs.sample(range(n_points), size))
        lw = rs.uniform(-1.5, 1.5)
        cands.append(Candidate(members=_mask(bits), log_weight=lw, key=(i, 1)))
        members.append(bits)
        weights.append(math.exp(lw))
    # guarantee coverage
    for p in range(n_points):
        if not any(p in m for m in members):
            cands.append(Candidate(members=_mask({p}), log_weight=0.0, key=(n_cands + p, 1)))
            members.append(frozenset({p}))
            weights.append(1.0)
    return cands, members, weights, set(range(n_points))


@pytest.mark.parametrize("seed", range(8))
def test_exact_cover_matches_brute(seed):
    cands, members, weights, universe = _random_instance(seed)
    log_value, witnesses = exact_cover_infimum(cands, _mask(universe))
    brute, _ = cover_min_weight(members, weights, universe)
    assert math.exp(log_value) == pytest.approx(brute, rel=1e-9)
    # witnesses realize the value
    chosen = [c for c in cands if c.key in set(witnesses)]
    assert math.exp(log_value) == pytest.approx(sum(math.exp(c.log_weight) for c in chosen), rel=1e-9)
    covered = 0
    for c in chosen:
        covered |= c.members
    assert covered & _mask(universe) == _mask(universe)


@pytest.mark.parametrize("seed", range(8))
def test_exact_packing_matches_brute(seed):
    cands, members, weights, _ = _random_instance(seed)
    log_value, witnesses = exact_packing_supremum(cands)
    brute, _ = packing_max_weight(members, weights)
    assert math.exp(log_value) == pytest.approx(brute, rel=1e-9)
    chosen = [c for c in cands if c.key in set(witnesses)]
    used = 0
    for c in chosen:
        assert not (c.members & used)
        used |= c.members


def test_cover_two_simple_cases():
    a = Candidate(members=_mask({0, 1}), log_weight=0.0, key=(0, 1))
    b = Candidate(members=_mask({1, 2}), log_weight=0.0, key=(1, 1))
    c = Candidate(members=_mask({0, 1, 2}), log_weight=1.0, key=(2, 1))
    log_value, witnesses = exact_cover_infimum([a, b, c], _mask({0, 1, 2}))
    assert math.exp(log_value) == pytest.approx(2.0)
    assert witnesses == [(0, 1), (1, 1)]


def test_packing_two_disjoint_and_two_overlapping():
    a = Candidate(members=_mask({0}), log_weight=math.log(2.0), key=(0, 1))
    b = Candidate(members=_mask({1}), log_weight=math.log(3.0), key=(1, 1))
    log_value, _ = exact_packing_supremum([a, b])
    assert math.exp(log_value) == pytest.approx(5.0)
    c = Candidate(members=_mask({0, 1}), log_weight=math.log(4.0), key=(2, 1))
    log_value, witnesses = exact_packing_supremum([a, c])
    assert math.exp(log_value) == pytest.approx(4.0)
    assert witnesses == [(2, 1)]


def test_packing_four_ball_two_point_fixture(two_point):
    # closed balls at both horizons around each point: best is one per point
    from ndpressure.space import bowen_ball

    cands = []
    for n in (1, 2):
        for x in (0, 1):
            ball = bowen_ball(two_point.space, two_point.maps, n, 0.5, x, closed=True)
            cands.append(Candidate(members=_mask(set(ball.members)), log_weight=0.0, key=(x, n)))
    log_value, _ = exact_packing_supremum(cands)
    assert math.exp(log_value) == pytest.approx(2.0)


def test_permutation_invariance():
    cands, _, _, universe = _random_instance(123)
    base_cover = exact_cover_infimum(cands, _mask(universe))
    base_pack = exact_packing_supremum(cands)
    rng = random.Random(9)
    for _ in range(5):
        shuffled = list(cands)
        rng.shuffle(shuffled)
        assert exact_cover_infimum(shuffled, _mask(universe)) == base_cover
        assert exact_packing_supremum(shuffled) == base_pack


def test_budget_candidate_cap():
    cands, _, _, universe = _random_instance(5, n_points=4, n_cands=12)
    with pytest.raises(CapacityError):
        exact_cover_infimum(cands, _mask(universe), OracleBudget(max_candidates=3))


def test_budget_points_cap():
    cands, _, _, universe = _random_instance(5, n_points=8, n_cands=6)
    with pytest.raises(CapacityError):
        exact_cover_infimum(cands, _mask(universe), OracleBudget(max_points=4))


def test_budget_subset_cap_aborts_cleanly():
    cands, _, _, universe = _random_instance(2, n_points=8, n_cands=14)
    with pytest.raises(CapacityError):
        exact_cover_infimum(cands, _mask(universe), OracleBudget(max_points=64, max_candidates=64, max_subsets=3))


def test_uncoverable_universe_is_an_error():
    a = Candidate(members=_mask({0}), log_weight=0.0, key=(0, 1))
    with pytest.raises(ValueError, match="cannot cover"):
        exact_cover_infimum([a], _mask({0, 1}))


def test_fixture_records_round_trip(tmp_path):
    cands, _, _, universe = _random_instance(77)
    log_value, witnesses = exact_cover_infimum(cands, _mask(universe))
    rec = fixture_record("cover", cands, _mask(universe), log_value, witnesses)
    assert set(rec) == {"kind", "instance", "log_value", "witnesses"}
    path = tmp_path / "fixtures.jsonl"
    write_fixtures(path, [rec])
    loaded = [json.loads(line) for line in path.read_text().splitlines()]
    assert loaded == [json.loads(json.dumps(rec))]
    # identical instances hash identically; a perturbed instance does not
    rec2 = fixture_record("cover", list(reversed(cands)), _mask(universe), log_value, witnesses)
    assert rec2["instance"] == rec["instance"]
    bumped = [Candidate(c.members, c.log_weight + 0.5, c.key) for c in cands]
    assert fixture_record("cover", bumped, _mask(universe), log_value, witnesses)["instance"] != rec["instance"]
