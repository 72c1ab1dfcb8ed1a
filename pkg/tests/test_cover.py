"""Covering/packing solvers against an independent exhaustive oracle."""

import itertools
import random
from fractions import Fraction as Q

import pytest

from genlab.metric import (
    AbsMetric,
    EuclideanMetric,
    UncoverableTarget,
    basis_point,
    coverage_masks,
    covering_number_exact,
    covering_number_greedy,
        packing_greedy,
    real,
)
from genlab.game import CoverTracker


def brute_min_cover(metric, targets, radius, candidates=None):
    """Oracle: smallest candidate subset whose closed balls cover the
    targets, by exhaustive subset enumeration in increasing size."""
    targets = list(dict.fromkeys(targets))
    if not targets:
        return 0
    cands = list(dict.fromkeys(candidates)) if candidates is not None else targets
    masks = coverage_masks(metric, targets, radius, cands)
    full = (1 << len(targets)) - 1
    for size in range(1, len(cands) + 1):
        for combo in itertools.combinations(range(len(cands)), size):
            u = 0
            for i in combo:
                u |= masks[i]
            if u == full:
                return size
    raise UncoverableTarget(targets[0])


def random_plane_points(rng, n):
    pts = set()
    while len(pts) < n:
        coords = []
        for idx in (1, 2):
            v = Q(rng.randint(-12, 12), rng.choice([1, 2, 3]))
            if v:
                coords.append((idx, v))
        pts.add(tuple(coords))
    from genlab.metric import Coord, SparseVec

    return [SparseVec(tuple((i, Coord(v)) for i, v in p)) for p in pts]


def test_exact_cover_frozen_examples():
    m = AbsMetric()
    # values computed by brute_min_cover and frozen
    assert brute_min_cover(m, [real(0), real(3), real(6)], 1) == 3
    assert covering_number_exact(m, [real(0), real(3), real(6)], 1) == 3
    assert covering_number_exact(m, [], 1) == 0
    line = [real(k) for k in range(5)]  # spacing 1, radius 1
    assert brute_min_cover(m, line, 1) == 2
    assert covering_number_exact(m, line, 1) == 2


def test_greedy_examples():
    m = AbsMetric()
    assert covering_number_greedy(m, [real(0), real(3), real(6)], 1) == 3
    assert covering_number_greedy(m, [real(0)], 1, candidates=[real(0), real(1)]) == 1
    line = [real(k) for k in range(5)]
    assert covering_number_greedy(m, line, 1) >= covering_number_exact(m, line, 1)


def test_packing_examples():
    m = AbsMetric()
    assert packing_greedy(m, [real(0), real(3), real(6)], 1) == 3
    assert packing_greedy(m, [real(0), real(1)], 1) == 1
    # wide basis points: pairwise distance 2*sqrt(2)*r > 2r
    e = EuclideanMetric()
    us = [basis_point(k, Q(2)) for k in range(1, 6)]
    assert packing_greedy(e, us, 1) == 5


def test_uncoverable_target():
    m = AbsMetric()
    with pytest.raises(UncoverableTarget):
        covering_number_exact(m, [real(0), real(10)], 1, candidates=[real(0)])
    with pytest.raises(UncoverableTarget):
        covering_number_greedy(m, [real(0), real(10)], 1, candidates=[real(0)])


def test_chain_and_oracle_on_random_plane_sets():
    rng = random.Random(5)
    m = EuclideanMetric()
    for _ in range(40):
        pts = random_plane_points(rng, rng.randint(1, 9))
        radius = Q(rng.randint(1, 8), rng.choice([1, 2]))
        exact = covering_number_exact(m, pts, radius)
        greedy = covering_number_greedy(m, pts, radius)
        pack = packing_greedy(m, pts, radius)
        assert pack <= exact <= greedy
        assert exact == brute_min_cover(m, pts, radius)


def test_radius_and_target_monotonicity():
    rng = random.Random(7)
    m = AbsMetric()
    for _ in range(40):
        pool = [real(Q(rng.randint(-20, 20), rng.choice([1, 2]))) for _ in range(10)]
        small, large = Q(1, 2), Q(2)
        a = covering_number_exact(m, pool, small, candidates=pool)
        b = covering_number_exact(m, pool, large, candidates=pool)
        assert a >= b
        subset = pool[: rng.randint(0, len(pool))]
        assert covering_number_exact(m, subset, small, candidates=pool) <= a


def test_cover_tracker_matches_direct_solver():
    rng = random.Random(9)
    for metric, gen in [
        (AbsMetric(), lambda: real(Q(rng.randint(-15, 15), rng.choice([1, 2])))),
        (EuclideanMetric(), lambda: random_plane_points(rng, 1)[0]),
    ]:
        for _ in range(6):
            radius = Q(rng.randint(1, 4), 2)
            tracker = CoverTracker(metric, radius)
            prefix = []
            for _ in range(14):
                p = gen()
                prefix.append(p)
                got = tracker.add(p)
                want = covering_number_exact(metric, prefix, radius)
                assert got == want
