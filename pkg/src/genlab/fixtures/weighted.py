"""Weighted-metric fixture: one point family a(m,k) = (sqrt2/2^m) e_k per
scale m, with supports picking an infinite index set at every scale
(indices are encoded 2^n(2k+1), so each selected k brings its whole
halving tower of even multiples).

Two metrics on the same points: the plain l2 metric, under which only
shallow-scale towers stay separated and the closure dimension collapses,
and the weighted metric (even coordinates damped to weight 1/4), under
which all even-index points of one scale sit at distance exactly 1/2^m
from one another, collapsing the towers into a single closed ball.

The universe is enumerated on a scale/index diagonal: the per-index
canonical order is ill-founded here, since every index carries points
of all scales accumulating at the origin.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from ..numbers import Q, as_fraction
from ..metric import (
    Coord,
    CoverResult,
    EuclideanMetric,
    FiniteCover,
    InfiniteCover,
    Metric,
    Point,
    SeparationWitness,
    SparseVec,
    UnknownCover,
    WeightedL2Metric,
    basis_point,
    in_set_ball,
)
from ..hypotheses import (
    AffinePowerFamily,
    FiniteSupport,
    Hypothesis,
    HypothesisClass,
    IndexAll,
    IndexExplicit,
    IndexPowers,
    IndexSet,
    Support,
    index_union,
    merge_point_streams,
)
from ..players import (
    Abstain,
    Emit,
    Generator,
    Move,
    BUDGET_EXHAUSTED,
    SubsequenceTrapAdversary,
)
from . import FixtureBundle, RegimeRow


def prime_above(x: int) -> int:
    c = max(x + 1, 3) | 1
    while True:
        if all(c % d for d in range(3, int(c**0.5) + 1, 2)) and c % 2:
            return c
        c += 2


def scale_coord(m: int) -> Coord:
    """Coordinate value sqrt(2)/2^m, stored as (2^(1-m)) * sqrt(2)/2."""
    return Coord(Q(2, 2**m), True)


def apoint(m: int, k: int) -> Point:
    return basis_point(k, Q(2, 2**m), half=True)


def classify(p: Point) -> Optional[tuple[int, int]]:
    """(scale m, index k) for universe points; indices need odd part >= 3."""
    if not isinstance(p, SparseVec) or len(p.coords) != 1:
        return None
    idx, c = p.coords[0]
    if not c.half or c.scale <= 0 or c.scale > 1:
        return None
    num, den = c.scale.numerator, c.scale.denominator
    if num != 1 or den & (den - 1):
        if not (num == 1 and den > 0):
            # scale must be 2^(1-m) = 1/2^(m-1)
            return None
        return None
    m = den.bit_length()  # den = 2^(m-1)
    v = idx
    while v % 2 == 0:
        v //= 2
    if v < 3:
        return None
    return (m, idx)


def tower_key(idx: int) -> int:
    """The k with idx = 2^n (2k+1)."""
    v = idx
    while v % 2 == 0:
        v //= 2
    return (v - 1) // 2


@dataclass(frozen=True)
class ScaledTowerSupport(Support):
    """Union over scales m of the towers selected by I_m."""

    default_set: IndexSet
    overrides: tuple[tuple[int, IndexSet], ...] = ()
    enum_scales: int = 6

    def index_set(self, m: int) -> IndexSet:
        for mm, s in self.overrides:
            if mm == m:
                return s
        return self.default_set

    def contains(self, p: Point) -> bool:
        c = classify(p)
        if c is None:
            return False
        m, idx = c
        return self.index_set(m).contains(tower_key(idx))

    def stream(self) -> Iterator[Point]:
        return diagonal_stream(
            lambda m, idx: self.index_set(m).contains(tower_key(idx)),
            self.enum_scales,
        )


def diagonal_stream(member, max_scale: int) -> Iterator[Point]:
    """Scale/index diagonal enumeration: block D lists the points with
    m <= min(D, max_scale) and index D, scanned index-major so every
    point appears exactly once."""

    def walk():
        for D in itertools.count(3):
            idx = D
            v = idx
            while v % 2 == 0:
                v //= 2
            if v < 3:
                continue
            for m in range(1, min(D, max_scale) + 1):
                if member(m, idx):
                    yield apoint(m, idx)

    return walk()


@dataclass(frozen=True)
class ScaledClosure(Support):
    """Closure of a sample: the sample plus the full halving tower of
    every forced (scale, tower) pair."""

    finite: frozenset[Point]
    forced: frozenset[tuple[int, int]]  # (m, k)

    def contains(self, p: Point) -> bool:
        if p in self.finite:
            return True
        c = classify(p)
        if c is None:
            return False
        m, idx = c
        return (m, tower_key(idx)) in self.forced

    def stream(self) -> Iterator[Point]:
        parts = [iter(FiniteSupport.of(self.finite).stream())]
        for m, k in sorted(self.forced):
            parts.append(
                AffinePowerFamily(
                    Q(2, 2**m), True, base=2, mult=2 * k + 1, shift=0, n0=0
                ).stream()
            )
        return merge_point_streams(parts)

    def cover_number(self, metric: Metric, radius) -> CoverResult:
        if not isinstance(metric, EuclideanMetric) or not (self.forced or self.finite):
            return super().cover_number(metric, radius)
        d = as_fraction(radius)
        scales = {m for m, _ in self.forced}
        for p in self.finite:
            c = classify(p)
            if c is not None:
                scales.add(c[0])
        if not scales:
            return FiniteCover(0)
        m_min, m_max = min(scales), max(scales)
        # one ball centered on a deepest-scale point covers everything
        if Q(2, 4**m_max) + Q(2, 4**m_min) <= d * d:
            return FiniteCover(1)
        for m, k in sorted(self.forced):
            pairwise = Q(2, 2**m)  # within one tower, all pairs
            if pairwise > 2 * d:
                fam = AffinePowerFamily(Q(2, 2**m), True, base=2, mult=2 * k + 1,
                                        shift=0, n0=0)
                return InfiniteCover(
                    SeparationWitness(
                        family=f"halving tower m={m} k={k}",
                        sample=tuple(fam.enumerate_points(12)),
                        separation=pairwise,
                        radius=d,
                    )
                )
        return UnknownCover(len(self.finite) > 0, 64)


class ScaledTowersClass(HypothesisClass):
    def __init__(self, name: str = "weighted_metric"):
        self.name = name
        self._memo: dict = {}

    def _parts(self, sample: Sequence[Point]):
        forced, bad = set(), []
        for p in sample:
            c = classify(p)
            if c is None:
                bad.append(p)
            else:
                m, idx = c
                forced.add((m, tower_key(idx)))
        return forced, bad

    def version_space_nonempty(self, sample: Sequence[Point]) -> bool:
        return not self._parts(sample)[1]

    def closure(self, sample: Sequence[Point]) -> Optional[Support]:
        key = frozenset(sample)
        if key in self._memo:
            return self._memo[key]
        forced, bad = self._parts(sample)
        result = (
            None if bad else ScaledClosure(frozenset(sample), frozenset(forced))
        )
        if len(self._memo) > 64:
            self._memo.clear()
        self._memo[key] = result
        return result

    def erm(self, sample) -> int:
        positives = [x for x, y in sample if y == 1]
        negatives = [x for x, y in sample if y == 0]
        placeable = [p for p in positives if classify(p) is not None]
        closure = self.closure(tuple(placeable))
        bad = len(positives) - len(placeable)
        return bad + sum(1 for q in negatives if closure.contains(q))

    def enumerate_points(self, n: int) -> list[Point]:
        out = []
        for p in diagonal_stream(lambda m, idx: True, max_scale=6):
            out.append(p)
            if len(out) >= n:
                break
        return out

    def uus_witnesses(self, metric: Metric, r: Fraction):
        # odd-index scale-1 points sit pairwise at distance 1 under both
        # metrics; a witness exists only below r = 1/2
        if 1 > 2 * r:
            fam = [apoint(1, 2 * k + 1) for k in range(1, 13)]
            return (
                (
                    "scale-1 odd towers",
                    SeparationWitness(
                        family="a(1, odd) pairwise 1",
                        sample=tuple(fam),
                        separation=Q(1),
                        radius=r,
                    ),
                ),
            )
        return ()

    def exclusion_witness(self, sample, p) -> Optional[Hypothesis]:
        closure = self.closure(tuple(sample))
        if closure is None or closure.contains(p):
            return None
        forced, _ = self._parts(sample)
        mentioned = {k for _, k in forced}
        c = classify(p)
        if c is not None:
            mentioned.add(tower_key(c[1]))
        tail = prime_above(max(mentioned | {2}))
        per_scale: dict[int, set[int]] = {}
        for m, k in forced:
            per_scale.setdefault(m, set()).add(k)
        overrides = tuple(
            (m, index_union(IndexExplicit(frozenset(ks)), IndexPowers(tail)))
            for m, ks in sorted(per_scale.items())
        )
        h = Hypothesis(
            f"avoid[{tail}]", ScaledTowerSupport(IndexPowers(tail), overrides)
        )
        return h if not h.support.contains(p) else None


def make_hypothesis(default_set: IndexSet, overrides=(), tag: str = "") -> Hypothesis:
    name = tag or f"h[{default_set.describe()}]"
    return Hypothesis(name, ScaledTowerSupport(default_set, tuple(overrides)))


def tau_level(tau: Fraction) -> int:
    """The m with 1/2^m <= tau < 1/2^(m-1)."""
    m = 1
    while Q(1, 2**m) > tau:
        m += 1
    return m


class HalvingTowerGenerator(Generator):
    """Engage on the first revealed point at scale <= the tau-level; emit
    its forced halving tower outside the tau-balls."""

    def __init__(self, metric: Metric, tau, budget: int = 256):
        self.metric = metric
        self.tau = as_fraction(tau)
        self.level = tau_level(self.tau)
        self.budget = budget
        self.name = "halving_tower"

    def move(self, seen: Sequence[Point]) -> Move:
        hit = None
        for p in seen:
            c = classify(p)
            if c is not None and c[0] <= self.level:
                hit = c
                break
        if hit is None:
            return Abstain("pre-engagement")
        m, idx = hit
        for n in range(1, self.budget):
            cand = apoint(m, idx * 2**n)
            if not in_set_ball(self.metric, seen, self.tau, cand):
                return Emit(cand)
        return Abstain(BUDGET_EXHAUSTED)


class NaiveTowerGenerator(Generator):
    """Variant that only avoids exact repeats of reveals; exposes the
    novelty failure under the weighted metric directly."""

    def __init__(self, tau, budget: int = 256):
        self.level = tau_level(as_fraction(tau))
        self.budget = budget
        self.name = "naive_tower"

    def move(self, seen: Sequence[Point]) -> Move:
        hit = None
        for p in seen:
            c = classify(p)
            if c is not None and c[0] <= self.level:
                hit = c
                break
        if hit is None:
            return Abstain("pre-engagement")
        m, idx = hit
        seen_set = set(seen)
        for n in range(1, self.budget):
            cand = apoint(m, idx * 2**n)
            if cand not in seen_set:
                return Emit(cand)
        return Abstain(BUDGET_EXHAUSTED)


def trap(metric: Metric, tau, horizon: int) -> SubsequenceTrapAdversary:
    """Base sequence a(1,3), a(1,6), a(1,5), a(1,7), ...: one even point,
    then fresh odd towers, dodged per the inductive rule."""

    def base(i: int) -> Point:
        if i == 0:
            return apoint(1, 3)
        if i == 1:
            return apoint(1, 6)
        return apoint(1, 2 * i + 1)

    def builder(picks) -> Hypothesis:
        ks = {1}
        for p in picks:
            c = classify(p)
            if c is not None and c[0] == 1:
                ks.add(tower_key(c[1]))
        tail = prime_above(max(ks) + 10_000)
        scale1 = index_union(IndexExplicit(frozenset(ks)), IndexPowers(tail))
        return Hypothesis(
            "trap_commit", ScaledTowerSupport(IndexAll(1), overrides=((1, scale1),))
        )

    return SubsequenceTrapAdversary(base, prefix_m=2, metric=metric,
                                    eps_prime=tau, builder=builder,
                                    base_budget=10 * horizon + 16)


# ---------------------------------------------------------------------------


def build(tau=Q(3, 5)) -> FixtureBundle:
    cls = ScaledTowersClass()
    rho = EuclideanMetric()
    rho_w = WeightedL2Metric(even=Q(1, 4), odd=Q(1))
    return FixtureBundle(
        name="weighted_metric",
        cls=cls,
        metric=rho,
        params={"tau": as_fraction(tau)},
        notes="universe enumerated on a scale diagonal; games at tau >= 1/2 "
        "run with uus_override (the scale-1 separation is exactly 1)",
        alt_metrics={"weighted": rho_w},
    )


def run_regimes(horizon: int = 200, sink=None) -> list[RegimeRow]:
    from ..game import (
        Deferred,
        EventuallyCorrect,
        FailsWithinHorizon,
        GameConfig,
        Upfront,
        judge_limit,
        run_game,
    )
    from ..hypotheses import DimLowerBound, FiniteDim, closure_dimension_bruteforce
    from ..metric import Ordering, dist_cmp
    from ..players import ErmSearchGenerator

    bundle = build()
    cls: ScaledTowersClass = bundle.cls
    rho, rho_w = bundle.metric, bundle.alt_metrics["weighted"]
    tau = bundle.params["tau"]
    rows: list[RegimeRow] = []

    # exact weighted distances: even-index same-scale pairs at 1/2^m
    ok = all(
        dist_cmp(rho_w, apoint(m, 6), apoint(m, 12), Q(1, 2**m)) is Ordering.EQUAL
        and dist_cmp(rho_w, apoint(m, 6), apoint(m, 20), Q(1, 2**m)) is Ordering.EQUAL
        for m in (1, 2, 3)
    )
    rows.append(RegimeRow("weighted_metric", "rho'(a(m,even), a(m,even')) = 1/2^m",
                          "dist_cmp Equal for m=1..3", ok))

    # plain-metric dimension on a truncation stays <= 2 at tau
    ground = [
        apoint(m, k)
        for m in (1, 2, 3)
        for k in (3, 5, 6, 7, 9, 10, 11, 12)
    ]
    dim = closure_dimension_bruteforce(cls, rho, tau, tau, ground, max_len=3)
    val = dim.d if isinstance(dim, (FiniteDim, DimLowerBound)) else None
    rows.append(RegimeRow("weighted_metric", "plain-metric dimension <= 2 at tau",
                          "d <= 2", val is not None and val <= 2, f"d={val}"))

    # weighted-metric trap defeats the search generator and both bundled
    # tower generators
    cfg = GameConfig(eps=tau, eps_prime=tau, r=tau, horizon=horizon, uus_override=True)
    ok = True
    details = []
    gens = [
        ErmSearchGenerator(cls, rho_w, tau, cls.enumerate_points),
        HalvingTowerGenerator(rho_w, tau),
        NaiveTowerGenerator(tau),
    ]
    for gen in gens:
        tr = run_game(cfg, cls, rho_w, trap(rho_w, tau, horizon), gen, Deferred())
        if sink is not None:
            sink.append(tr)
        v = judge_limit(tr)
        details.append(f"{gen.name}: {type(v).__name__}")
        if isinstance(v, EventuallyCorrect):
            ok = False
        if gen.name == "naive_tower" and not isinstance(v, FailsWithinHorizon):
            ok = False
    rows.append(RegimeRow("weighted_metric", "weighted trap defeats all generators",
                          "not eventually_correct (naive: fails)", ok, "; ".join(details)))

    # plain-metric side: obligated play succeeds (transcripts feed the
    # metric-transfer replay)
    from ..players import EnumerationAdversary

    cfg_rho = GameConfig(eps=tau, eps_prime=tau, r=tau, horizon=80, uus_override=True)
    h = make_hypothesis(IndexPowers(3), tag="pow3")
    ok = True
    details = []
    for seed in (0, 1):
        adv = EnumerationAdversary(h, horizon=cfg_rho.horizon, seed=seed)
        gen = HalvingTowerGenerator(rho, tau)
        tr = run_game(cfg_rho, cls, rho, adv, gen, Upfront(h))
        if sink is not None:
            sink.append(tr)
        v = judge_limit(tr)
        if not isinstance(v, EventuallyCorrect):
            ok = False
            details.append(f"seed {seed}: {v}")
    rows.append(RegimeRow("weighted_metric", "plain metric obligated play",
                          "eventually_correct", ok, "; ".join(details)))
    return rows


# ---------------------------------------------------------------------------
# CLI surface


def cli_generator(bundle: FixtureBundle, metric, config, params):
    if params.get("name") == "naive":
        return NaiveTowerGenerator(config.eps_prime, budget=config.enum_budget)
    return HalvingTowerGenerator(metric, config.eps_prime, budget=config.enum_budget)


def cli_adversary(bundle: FixtureBundle, metric, kind, config, seed, params):
    from ..game import Deferred

    return trap(metric, config.eps_prime, config.horizon), Deferred()


def cli_member_pool(bundle: FixtureBundle):
    from ..hypotheses import IndexPowers

    return [make_hypothesis(IndexPowers(3), tag="pow3"),
            make_hypothesis(IndexPowers(2), tag="pow2")]
