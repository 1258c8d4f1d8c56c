import math

import numpy as np
import pytest

from ndpressure.cover import (
    fixed_cover_sum,
    open_cover_sum,
    packing_sum,
    refined_packing_sum,
    separated_set,
    spanning_set,
    variable_cover_sum,
    vitali_subfamily,
)
from ndpressure.space import MetricSpace, bowen_ball, bowen_rows
from ndpressure.systems import MapSequence, Potential, System

from _brute import cover_min_weight, euclidean_cloud, packing_max_weight, separated_max, spanning_min


def _random_system(seed, size):
    gap = euclidean_cloud(seed, size)
    space = MetricSpace.from_matrix(gap)
    rs = np.random.RandomState(seed)
    maps = MapSequence.cycle([rs.randint(0, size, size), rs.randint(0, size, size)])
    phi = Potential(rs.uniform(-0.5, 0.5, size))
    return System(space, maps, phi)


def _ball_family(system, K, eps, n_values, centers_in_k_only):
    """Materialize (center, n) candidate balls with their weights, for brute checks."""
    out = []
    centers = K.indices if centers_in_k_only else np.arange(system.space.size)
    for n in n_values:
        rows = bowen_rows(system.space, system.maps, n, centers)
        for k, c in enumerate(centers):
            members = frozenset(int(i) for i in np.nonzero(rows[k] <= eps)[0])
            out.append((int(c), n, members))
    return out


# ---------------------------------------------------------------------------
# Spanning and separated sets


def test_spanning_two_point_radius_two(two_point):
    K = two_point.space.all_points()
    got = spanning_set(two_point.space, two_point.maps, K, 3, 2.0)
    assert got.cardinality == 1 and got.exact


def test_spanning_two_point_small_radius(two_point):
    K = two_point.space.all_points()
    got = spanning_set(two_point.space, two_point.maps, K, 3, 0.5)
    assert got.cardinality == 2 and got.exact
    assert got.meta["oracle_minimum"] == 2


def test_spanning_shift_prefix_classes(shift8):
    from ndpressure.oracle import OracleBudget

    K = shift8.space.all_points()
    budget = OracleBudget(max_points=256, max_candidates=64)
    got = spanning_set(shift8.space, shift8.maps, K, 4, 0.5, budget=budget)
    assert got.cardinality == 16
    assert got.exact and got.meta["oracle_minimum"] == 16


def test_separated_single_point(single_point):
    got = separated_set(single_point.space, single_point.maps, single_point.space.all_points(), 3, 0.7)
    assert got.cardinality == 1


def test_separated_two_point(two_point):
    got = separated_set(two_point.space, two_point.maps, two_point.space.all_points(), 2, 0.5)
    assert got.cardinality == 2 and got.exact


def test_separated_shift_prefixes(shift8):
    got = separated_set(shift8.space, shift8.maps, shift8.space.all_points(), 4, 0.5, exact="greedy")
    assert got.cardinality == 16


@pytest.mark.parametrize("seed", [3, 11, 42])
def test_separated_matches_brute_maximum(seed):
    system = _random_system(seed, 7)
    K = system.space.all_points()
    rows = bowen_rows(system.space, system.maps, 2, np.arange(7))
    eps = float(np.median(rows[rows > 0]))  # generic radius
    brute = separated_max(rows, range(7), eps)
    got = separated_set(system.space, system.maps, K, 2, eps)
    assert got.meta["oracle_maximum"] == brute
    assert got.cardinality <= brute


@pytest.mark.parametrize("seed", [5, 19])
def test_spanning_upper_bounds_brute_minimum(seed):
    system = _random_system(seed, 7)
    K = system.space.all_points()
    rows = bowen_rows(system.space, system.maps, 2, np.arange(7))
    eps = float(np.median(rows[rows > 0]))
    brute = spanning_min(rows, range(7), eps)
    got = spanning_set(system.space, system.maps, K, 2, eps)
    assert got.cardinality >= brute
    assert got.meta["oracle_minimum"] == brute


def test_sandwich_inequality_random_instances():
    # separated at doubled radius <= minimal spanning <= separated at radius
    for seed in (2, 8, 21):
        system = _random_system(seed, 7)
        K = system.space.all_points()
        rows = bowen_rows(system.space, system.maps, 2, np.arange(7))
        eps = float(np.quantile(rows[rows > 0], 0.3))
        s_2eps = separated_max(rows, range(7), 2 * eps)
        r_eps = spanning_min(rows, range(7), eps)
        s_eps = separated_max(rows, range(7), eps)
        assert s_2eps <= r_eps <= s_eps


# ---------------------------------------------------------------------------
# Fixed-length cover functional


def test_fixed_cover_single_point(single_point):
    cs = fixed_cover_sum(single_point.space, single_point.maps, single_point.space.all_points(), single_point.potential, 10, 0.5)
    assert cs.value == pytest.approx(math.exp(3.0), rel=1e-12)
    assert len(cs.witnesses) == 1 and cs.exact


def test_fixed_cover_two_point(two_point):
    cs = fixed_cover_sum(two_point.space, two_point.maps, two_point.space.all_points(), two_point.potential, 5, 0.5)
    assert cs.value == pytest.approx(2.0, rel=1e-12)


def test_fixed_cover_line4(line4):
    cs = fixed_cover_sum(line4.space, line4.maps, line4.space.all_points(), line4.potential, 1, 1.1)
    assert cs.value == pytest.approx(2.0, rel=1e-12)
    assert cs.exact


def test_fixed_cover_monotone_in_eps(shift8):
    K = shift8.space.all_points()
    values = [
        fixed_cover_sum(shift8.space, shift8.maps, K, shift8.potential, 3, eps, exact="greedy").value
        for eps in (0.2, 0.5, 1.5)
    ]
    assert values[0] >= values[1] >= values[2]


@pytest.mark.parametrize("seed", [1, 7, 23])
def test_fixed_cover_matches_brute(seed):
    system = _random_system(seed, 6)
    K = system.space.all_points()
    rows = bowen_rows(system.space, system.maps, 2, np.arange(6))
    eps = float(np.quantile(rows[rows > 0], 0.4))
    cs = fixed_cover_sum(system.space, system.maps, K, system.potential, 2, eps)
    balls = _ball_family(system, K, eps, [2], centers_in_k_only=False)
    from ndpressure.systems import birkhoff_table

    table = birkhoff_table(system.potential, system.maps, 2)
    weights = [math.exp(table[2][c]) for c, _, _ in balls]
    brute, _ = cover_min_weight([m for _, _, m in balls], weights, set(range(6)))
    assert cs.exact
    assert cs.value == pytest.approx(brute, rel=1e-9)


# ---------------------------------------------------------------------------
# Variable-length cover functional


def test_variable_cover_balanced_weights(single_point):
    cs = variable_cover_sum(single_point.space, single_point.maps, single_point.space.all_points(), single_point.potential, 0.5, 0.3, 5, 10)
    assert cs.value == pytest.approx(1.0, rel=1e-12)


def test_variable_cover_prefers_deepest_when_discounted(single_point):
    cs = variable_cover_sum(single_point.space, single_point.maps, single_point.space.all_points(), single_point.potential, 0.5, 0.5, 10, 20)
    assert cs.value == pytest.approx(math.exp(-4.0), rel=1e-12)
    assert cs.witnesses == [(0, 20)]


def test_variable_cover_two_point_zero_potential(two_point):
    cs = variable_cover_sum(two_point.space, two_point.maps, two_point.space.all_points(), Potential.zero(2), 0.5, 0.0, 1, 3)
    assert cs.value == pytest.approx(2.0, rel=1e-12)
    # brute enumeration over the six candidate singleton balls agrees
    balls = _ball_family(two_point, two_point.space.all_points(), 0.5, [1, 2, 3], centers_in_k_only=False)
    brute, _ = cover_min_weight([m for _, _, m in balls], [1.0] * len(balls), {0, 1})
    assert brute == pytest.approx(2.0)


def test_variable_cover_rejects_bad_window(two_point):
    with pytest.raises(ValueError, match="Nmax"):
        variable_cover_sum(two_point.space, two_point.maps, two_point.space.all_points(), two_point.potential, 0.5, 0.0, 4, 2)


@pytest.mark.parametrize("seed,s", [(4, 0.0), (13, 0.35), (29, -0.2)])
def test_variable_cover_matches_brute(seed, s):
    system = _random_system(seed, 6)
    K = system.space.all_points()
    rows = bowen_rows(system.space, system.maps, 1, np.arange(6))
    eps = float(np.quantile(rows[rows > 0], 0.45))
    cs = variable_cover_sum(system.space, system.maps, K, system.potential, eps, s, 1, 3)
    balls = _ball_family(system, K, eps, [1, 2, 3], centers_in_k_only=False)
    from ndpressure.systems import birkhoff_table

    table = birkhoff_table(system.potential, system.maps, 3)
    weights = [math.exp(-s * n + table[n][c]) for c, n, _ in balls]
    brute, _ = cover_min_weight([m for _, _, m in balls], weights, set(range(6)))
    assert cs.exact
    assert cs.value == pytest.approx(brute, rel=1e-9)


# ---------------------------------------------------------------------------
# Packing functionals


def test_packing_two_point_unit_weights(two_point):
    cs = packing_sum(two_point.space, two_point.maps, two_point.space.all_points(), Potential.zero(2), 0.5, 0.0, 1, 1)
    assert cs.value == pytest.approx(2.0, rel=1e-12)


def test_packing_single_point_balanced(single_point):
    cs = packing_sum(single_point.space, single_point.maps, single_point.space.all_points(), single_point.potential, 0.5, 0.3, 2, 6)
    assert cs.value == pytest.approx(1.0, rel=1e-12)


def test_packing_shift_level3_is_eight(shift8):
    # disjoint prefix-class balls at horizon 3: the exhaustive optimum is 2^3
    K = shift8.space.all_points()
    cs = packing_sum(shift8.space, shift8.maps, K, Potential.zero(256), 0.5, 0.0, 3, 3, exact="greedy")
    assert cs.value == pytest.approx(8.0, rel=1e-12)
    balls = _ball_family(shift8, K, 0.5, [3], centers_in_k_only=True)
    # deduplicate identical cylinders before brute enumeration stays feasible
    distinct = {}
    for c, n, members in balls:
        distinct.setdefault(members, (c, n))
    brute, _ = packing_max_weight(list(distinct), [1.0] * len(distinct))
    assert brute == pytest.approx(8.0)


@pytest.mark.parametrize("seed,s", [(6, 0.1), (17, 0.4)])
def test_packing_matches_brute(seed, s):
    system = _random_system(seed, 6)
    K = system.space.all_points()
    rows = bowen_rows(system.space, system.maps, 1, np.arange(6))
    eps = float(np.quantile(rows[rows > 0], 0.35))
    cs = packing_sum(system.space, system.maps, K, system.potential, eps, s, 1, 3)
    balls = _ball_family(system, K, eps, [1, 2, 3], centers_in_k_only=True)
    from ndpressure.systems import birkhoff_table

    table = birkhoff_table(system.potential, system.maps, 3)
    weights = [math.exp(-s * n + table[n][c]) for c, n, _ in balls]
    brute, _ = packing_max_weight([m for _, _, m in balls], weights)
    assert cs.exact
    assert cs.value == pytest.approx(brute, rel=1e-9)


def test_packing_at_least_best_single_ball(two_point):
    # even with strongly discounted weights, one ball is always packed
    cs = packing_sum(two_point.space, two_point.maps, two_point.space.all_points(), Potential.zero(2), 0.5, 5.0, 2, 3)
    assert cs.value >= math.exp(-5.0 * 3) - 1e-15


def test_refined_packing_single_part_equals_packing(shift8):
    K = shift8.space.all_points()
    plain = packing_sum(shift8.space, shift8.maps, K, shift8.potential, 0.5, 0.2, 2, 4, exact="greedy")
    refined = refined_packing_sum(shift8.space, shift8.maps, K, shift8.potential, 0.5, 0.2, 2, 4, parts=1, exact="greedy")
    assert refined.value == plain.value


def test_refined_packing_two_point_split(two_point):
    cs = refined_packing_sum(two_point.space, two_point.maps, two_point.space.all_points(), Potential.zero(2), 0.5, 0.0, 1, 1, parts=2)
    assert cs.value == pytest.approx(2.0, rel=1e-12)


def test_refined_packing_never_exceeds_plain(line4):
    for parts in (1, 2, 3):
        plain = packing_sum(line4.space, line4.maps, line4.space.all_points(), line4.potential, 1.1, 0.3, 1, 2)
        refined = refined_packing_sum(line4.space, line4.maps, line4.space.all_points(), line4.potential, 1.1, 0.3, 1, 2, parts=parts)
        assert refined.log_value <= plain.log_value + 1e-12


# ---------------------------------------------------------------------------
# Open-cover functional


def test_open_cover_two_point_singletons(two_point):
    cover = [two_point.space.subset([0]), two_point.space.subset([1])]
    cs = open_cover_sum(two_point.space, two_point.maps, two_point.space.all_points(), Potential.zero(2), 2, cover)
    assert cs.value == pytest.approx(2.0, rel=1e-12)


def test_open_cover_single_point(single_point):
    cover = [single_point.space.subset([0])]
    cs = open_cover_sum(single_point.space, single_point.maps, single_point.space.all_points(), single_point.potential, 10, cover)
    assert cs.value == pytest.approx(math.exp(3.0), rel=1e-12)


def test_open_cover_three_cycle_singletons(three_cycle):
    cover = [three_cycle.space.subset([i]) for i in range(3)]
    cs = open_cover_sum(three_cycle.space, three_cycle.maps, three_cycle.space.all_points(), Potential.zero(3), 3, cover)
    assert cs.value == pytest.approx(3.0, rel=1e-12)


def test_open_cover_rejects_non_cover(two_point):
    with pytest.raises(ValueError, match="cover"):
        open_cover_sum(two_point.space, two_point.maps, two_point.space.all_points(), two_point.potential, 1, [two_point.space.subset([0])])


# ---------------------------------------------------------------------------
# Vitali subfamily


def _line_system(points):
    m = np.abs(np.asarray(points, float)[:, None] - np.asarray(points, float)[None, :])
    space = MetricSpace.from_matrix(m)
    maps = MapSequence.constant(np.arange(len(points)))
    return space, maps


def test_vitali_single_ball(two_point):
    ball = bowen_ball(two_point.space, two_point.maps, 1, 0.5, 0, closed=True)
    assert vitali_subfamily([ball], two_point.maps) == [ball]


def test_vitali_line_cloud():
    space, maps = _line_system([0.0, 0.5, 3.0])
    balls = [bowen_ball(space, maps, 1, 1.0, c, closed=True) for c in range(3)]
    picked = vitali_subfamily(balls, maps)
    assert [b.center for b in picked] == [0, 2]
    covered = set()
    for b in picked:
        covered |= set(bowen_ball(space, maps, 1, 5.0, b.center, closed=True).members)
    union_in = set()
    for b in balls:
        union_in |= set(b.members)
    assert union_in <= covered


def test_vitali_disjoint_balls_all_selected():
    space, maps = _line_system([0.0, 10.0])
    balls = [bowen_ball(space, maps, 1, 1.0, c, closed=True) for c in range(2)]
    assert len(vitali_subfamily(balls, maps)) == 2


def test_vitali_outputs_pairwise_disjoint():
    space, maps = _line_system([0.0, 0.4, 0.9, 1.5, 3.2, 3.5])
    balls = [bowen_ball(space, maps, 1, r, c, closed=True) for c, r in [(0, 0.5), (1, 0.45), (2, 0.7), (4, 0.4), (5, 0.6)]]
    picked = vitali_subfamily(balls, maps)
    for i in range(len(picked)):
        for j in range(i + 1, len(picked)):
            assert not (picked[i].members.mask & picked[j].members.mask).any()


# ---------------------------------------------------------------------------
# CoverSum invariants


def test_witnesses_reproduce_value(shift8):
    from ndpressure.systems import birkhoff_table

    K = shift8.space.all_points()
    cs = variable_cover_sum(shift8.space, shift8.maps, K, shift8.potential, 0.5, 0.1, 2, 4, exact="greedy")
    table = birkhoff_table(shift8.potential, shift8.maps, 4)
    recomputed = cs.recompute_log(lambda c, n: -0.1 * n + table[n][c])
    assert recomputed == pytest.approx(cs.log_value, abs=1e-12)


def test_cover_witnesses_cover_k(shift8):
    K = shift8.space.subset(range(0, 256, 3))
    cs = variable_cover_sum(shift8.space, shift8.maps, K, shift8.potential, 0.5, 0.1, 2, 3, exact="greedy")
    covered = np.zeros(256, dtype=bool)
    for c, n in cs.witnesses:
        covered |= bowen_ball(shift8.space, shift8.maps, n, 0.5, c, closed=True).members.mask
    assert covered[K.indices].all()


def test_greedy_regression_bounds():
    # classical greedy guarantees, asserted as regression floors
    for seed in (3, 9, 31):
        system = _random_system(seed, 8)
        K = system.space.all_points()
        rows = bowen_rows(system.space, system.maps, 1, np.arange(8))
        eps = float(np.quantile(rows[rows > 0], 0.4))
        greedy = variable_cover_sum(system.space, system.maps, K, system.potential, eps, 0.2, 1, 3, exact="greedy")
        exact = variable_cover_sum(system.space, system.maps, K, system.potential, eps, 0.2, 1, 3, exact="oracle")
        assert exact.log_value <= greedy.log_value + 1e-12
        assert greedy.log_value <= exact.log_value + math.log(math.log(8) + 1.0) + 1e-12
        pg = packing_sum(system.space, system.maps, K, system.potential, eps, 0.2, 1, 3, exact="greedy")
        pe = packing_sum(system.space, system.maps, K, system.potential, eps, 0.2, 1, 3, exact="oracle")
        assert pg.log_value <= pe.log_value + 1e-12
        assert pg.log_value >= pe.log_value - math.log(pe.meta["n_candidates"] + 1.0)
