"""l2 fixture with four point families per coordinate, all but the wide
u-points carrying the sqrt(2)/2 factor: two adversary scales (a1 at
eps1, a2 at eps2, the latter limited to finitely many indices per
member), and generator points g at eps'.  Revealing any u- or g-point
forces the geometric tower g_{k^n} into the closure; the a-points are
pure disturbance.

The four game regimes over the adversary scale gamma split at eps2
(uniform), eps1 (non-uniform only), below eps1 (limit only), and at
gamma' = eps' the generator has no legal move once a g-point is on the
table.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from ..numbers import Q, as_fraction
from ..metric import (
    Coord,
    EuclideanMetric,
    GenlabError,
    Metric,
    Point,
    SeparationWitness,
    SparseVec,
    basis_point,
    in_set_ball,
)
from ..hypotheses import (
    AffinePowerFamily,
    BasisFamily,
    FiniteSupport,
    Hypothesis,
    HypothesisClass,
    IndexAll,
    IndexEvens,
    IndexExplicit,
    IndexPowers,
    IndexSet,
    Support,
    index_union,
    merge_point_streams,
    rational_separation,
)
from ..players import (
    Abstain,
    Emit,
    EnumerationAdversary,
    Generator,
    Move,
    BUDGET_EXHAUSTED,
    ScriptedAdversary,
)
from . import FixtureBundle, RegimeRow, no_valid_move_scan
from .l2_case1 import power_bases
from .prime_reals import odd_primes


@dataclass(frozen=True)
class Scales2:
    r: Fraction
    eps1: Fraction
    eps2: Fraction
    eps_prime: Fraction

    def __post_init__(self):
        scales = {self.eps1, self.eps2, self.eps_prime, 2 * self.r}
        if len(scales) != 4 or not self.eps1 <= self.eps2:
            raise GenlabError("need eps1 <= eps2 and pairwise distinct scales")

    def u(self, k: int) -> Point:
        return basis_point(k, 2 * self.r)

    def a1(self, k: int) -> Point:
        return basis_point(k, self.eps1, half=True)

    def a2(self, k: int) -> Point:
        return basis_point(k, self.eps2, half=True)

    def g(self, k: int) -> Point:
        return basis_point(k, self.eps_prime, half=True)

    def classify(self, p: Point):
        if not isinstance(p, SparseVec) or len(p.coords) != 1:
            return None
        idx, c = p.coords[0]
        if c == Coord(2 * self.r, False) and idx >= 2:
            return ("u", idx)
        if c == Coord(self.eps1, True):
            return ("a1", idx)
        if c == Coord(self.eps2, True):
            return ("a2", idx)
        if c == Coord(self.eps_prime, True) and idx >= 2:
            return ("g", idx)
        return None


@dataclass(frozen=True)
class TowerSupport2(Support):
    """O_{I1} union D_{I2,J}: g-towers and u-points over I1, disturbance
    points a1 over I2 and a2 over the finite J."""

    scales: Scales2
    tower_set: IndexSet      # I1, bases >= 2
    a1_set: IndexSet         # I2
    a2_set: frozenset[int]   # J, finite

    def contains(self, p: Point) -> bool:
        c = self.scales.classify(p)
        if c is None:
            return False
        kind, idx = c
        if kind == "u":
            return self.tower_set.contains(idx)
        if kind == "a1":
            return self.a1_set.contains(idx)
        if kind == "a2":
            return idx in self.a2_set
        return any(self.tower_set.contains(b) for b in power_bases(idx))

    def stream(self) -> Iterator[Point]:
        s = self.scales

        def walk():
            for idx in itertools.count(1):
                here = [
                    p
                    for p in (s.a1(idx), s.g(idx), s.a2(idx), s.u(idx))
                    if self.contains(p)
                ]
                yield from here

        return walk()


@dataclass(frozen=True)
class TowerClosure2(Support):
    """Forced points of a sample.

    Every revealed tower index K forces its own tower {g_{K^n}} (any
    base representation of K generates it).  A wide point u_j is forced
    only when some constraint pins j into the index set outright: a
    revealed u_j, or a revealed g_j whose only base representation is j
    itself.  Representation-ambiguous reveals (g at a perfect-power
    index) force no wide point.
    """

    scales: Scales2
    finite: frozenset[Point]
    bases: frozenset[int]     # all revealed tower indices
    pinned: frozenset[int]    # indices forced into the tower set

    def contains(self, p: Point) -> bool:
        if p in self.finite:
            return True
        c = self.scales.classify(p)
        if c is None:
            return False
        kind, idx = c
        if kind == "g":
            return any(b in self.bases for b in power_bases(idx))
        if kind == "u":
            return idx in self.pinned
        return False

    def stream(self) -> Iterator[Point]:
        parts = [iter(FiniteSupport.of(self.finite).stream())]
        for b in sorted(self.bases):
            parts.append(
                AffinePowerFamily(self.scales.eps_prime, True, base=b).stream()
            )
        pinned_extra = [
            self.scales.u(j) for j in sorted(self.pinned)
            if self.scales.u(j) not in self.finite
        ]
        if pinned_extra:
            parts.append(iter(pinned_extra))
        return merge_point_streams(parts)


class TwoScaleClass(HypothesisClass):
    def __init__(self, scales: Scales2, name: str = "l2_case2"):
        self.scales = scales
        self.name = name
        self._memo: dict = {}

    def _parts(self, sample: Sequence[Point]):
        bases, pinned, a1s, a2s, bad = set(), set(), set(), set(), []
        for p in sample:
            c = self.scales.classify(p)
            if c is None:
                bad.append(p)
            elif c[0] == "u":
                bases.add(c[1])
                pinned.add(c[1])  # a u-reveal pins its index directly
            elif c[0] == "g":
                bases.add(c[1])
                if power_bases(c[1]) == [c[1]]:
                    pinned.add(c[1])  # unique representation pins it too
            elif c[0] == "a1":
                a1s.add(c[1])
            else:
                a2s.add(c[1])
        return bases, pinned, a1s, a2s, bad

    def version_space_nonempty(self, sample: Sequence[Point]) -> bool:
        return not self._parts(sample)[4]

    def closure(self, sample: Sequence[Point]) -> Optional[Support]:
        key = frozenset(sample)
        if key in self._memo:
            return self._memo[key]
        bases, pinned, _, _, bad = self._parts(sample)
        result = (
            None
            if bad
            else TowerClosure2(self.scales, frozenset(sample), frozenset(bases),
                               frozenset(pinned))
        )
        if len(self._memo) > 64:
            self._memo.clear()
        self._memo[key] = result
        return result

    def erm(self, sample) -> int:
        positives = [x for x, y in sample if y == 1]
        negatives = [x for x, y in sample if y == 0]
        placeable = tuple(p for p in positives if self.scales.classify(p) is not None)
        closure = self.closure(placeable)
        bad = len(positives) - len(placeable)
        return bad + sum(1 for q in negatives if closure.contains(q))

    def enumerate_points(self, n: int) -> list[Point]:
        full = TowerSupport2(
            self.scales, IndexAll(2), IndexAll(1), frozenset(range(1, 9))
        )
        out = []
        for p in full.stream():
            out.append(p)
            if len(out) >= n:
                break
        return out

    def uus_witnesses(self, metric: Metric, r: Fraction):
        fam = BasisFamily(2 * self.scales.r, False, IndexAll(2))
        sep = rational_separation(fam.sq_pairwise(), r)
        if sep is None:
            return ()
        w = SeparationWitness(
            family="wide points 2r*e_k (every member keeps infinitely many)",
            sample=tuple(fam.enumerate_points(12)),
            separation=sep,
            radius=r,
        )
        return (("u-family", w),)

    def exclusion_witness(self, sample, p) -> Optional[Hypothesis]:
        closure = self.closure(sample)
        if closure is None or closure.contains(p):
            return None
        bases, pinned, a1s, a2s, _ = self._parts(sample)
        c = self.scales.classify(p)

        def rep_ok(r: int) -> bool:
            if c is None:
                return True
            kind, idx = c
            if kind == "u":
                return r != idx
            if kind == "g":
                return not any(b == r for b in power_bases(idx))
            return True

        chosen = set()
        for k in bases:
            reps = [r for r in power_bases(k) if rep_ok(r)]
            if not reps:
                return None  # p is forced after all
            chosen.add(reps[-1])  # prefer the index itself when allowed
        mentioned = bases | chosen | a1s | a2s | {2}
        if c is not None:
            mentioned.add(c[1])
        tail = next(q for q in odd_primes(40) if q > max(mentioned) + 1)
        h = make_hypothesis(
            self.scales,
            tower_set=index_union(IndexExplicit(frozenset(chosen)), IndexPowers(tail)),
            a1_set=index_union(IndexExplicit(frozenset(a1s)), IndexPowers(tail)),
            a2=frozenset(a2s),
        )
        return h if not h.support.contains(p) else None


def make_hypothesis(scales: Scales2, tower_set: IndexSet, a1_set: IndexSet,
                    a2: frozenset[int], tag: str = "") -> Hypothesis:
    name = tag or (
        f"h[{tower_set.describe()}|{a1_set.describe()}|J={sorted(a2)}]"
    )
    return Hypothesis(name, TowerSupport2(scales, tower_set, a1_set, a2))


class PowerHopGenerator(Generator):
    """Engage on the first revealed u- or g-point; afterwards emit its
    forced tower g_{K^n} outside the eps'-balls."""

    def __init__(self, scales: Scales2, metric: Metric, eps_prime, budget: int = 256):
        self.scales = scales
        self.metric = metric
        self.eps_prime = as_fraction(eps_prime)
        self.budget = budget
        self.name = "power_hop"

    def move(self, seen: Sequence[Point]) -> Move:
        base = None
        for p in seen:
            c = self.scales.classify(p)
            if c is not None and c[0] in ("u", "g"):
                base = c[1]
                break
        if base is None:
            return Abstain("pre-engagement")
        for n in range(1, self.budget):
            cand = self.scales.g(base**n)
            if not in_set_ball(self.metric, seen, self.eps_prime, cand):
                return Emit(cand)
        return Abstain(BUDGET_EXHAUSTED)


# ---------------------------------------------------------------------------


def build(r=Q(1), eps1=Q(3, 10), eps2=Q(6, 10), eps_prime=Q(1, 2)) -> FixtureBundle:
    scales = Scales2(as_fraction(r), as_fraction(eps1), as_fraction(eps2),
                     as_fraction(eps_prime))
    return FixtureBundle(
        name="l2_case2",
        cls=TwoScaleClass(scales),
        metric=EuclideanMetric(),
        params={
            "r": scales.r,
            "eps1": scales.eps1,
            "eps2": scales.eps2,
            "eps_prime": scales.eps_prime,
        },
        notes="tower bases start at 2; a2-index sets are finite per member",
    )


def member_pool(scales: Scales2) -> list[Hypothesis]:
    return [
        make_hypothesis(scales, IndexPowers(2), IndexAll(1), frozenset(), tag="p2"),
        make_hypothesis(scales, IndexPowers(3), IndexEvens(2), frozenset({1, 2}), tag="p3"),
        make_hypothesis(scales, IndexEvens(2), IndexAll(1), frozenset({4}), tag="evens"),
        make_hypothesis(
            scales,
            index_union(IndexPowers(2), IndexPowers(5)),
            IndexAll(1),
            frozenset({1, 3, 5}),
            tag="p25",
        ),
    ]


def crafted_prefix_adversary(scales: Scales2, n_prefix: int, horizon: int):
    """Reveal a2_1..a2_{n_prefix}, then walk the committed member's tower
    pairs g_{7^n}, u_{7^n}."""
    h = make_hypothesis(
        scales, IndexPowers(7), IndexAll(1), frozenset(range(1, n_prefix + 1)),
        tag=f"crafted_J{n_prefix}",
    )
    schedule = [scales.a2(k) for k in range(1, n_prefix + 1)]
    n = 1
    while len(schedule) < horizon:
        schedule.append(scales.g(7**n))
        schedule.append(scales.u(7**n))
        n += 1
    return ScriptedAdversary(schedule[:horizon], h), h


def disturbance_only_adversary(scales: Scales2, n_a2: int, horizon: int):
    """Reveal the a2-prefix then a1-points forever; never shows the tower."""
    h = make_hypothesis(
        scales, IndexPowers(7), IndexAll(1), frozenset(range(1, n_a2 + 1)),
        tag=f"disturb_J{n_a2}",
    )
    schedule = [scales.a2(k) for k in range(1, n_a2 + 1)]
    k = 1
    while len(schedule) < horizon:
        schedule.append(scales.a1(k))
        k += 1
    return ScriptedAdversary(schedule[:horizon], h), h


def run_regimes(n_seeds: int = 20, scan_budget: int = 500, sink=None) -> list[RegimeRow]:
    from ..game import (
        EventuallyCorrect,
        FailsWithinHorizon,
        GameConfig,
        Upfront,
        judge_limit,
        judge_nonuniform,
        judge_uniform,
        run_game,
    )
    from ..metric import Ordering, dist_cmp

    bundle = build()
    cls: TwoScaleClass = bundle.cls
    scales, metric = cls.scales, bundle.metric
    rows: list[RegimeRow] = []
    r = scales.r

    # (a) gamma >= eps2: uniformly generatable with d* = 2
    cfg_a = GameConfig(eps=Q(7, 10), eps_prime=Q(2, 5), r=r, horizon=40)
    pool = member_pool(scales)
    ok = True
    details = []
    for seed in range(n_seeds):
        h = pool[seed % len(pool)]
        adv = EnumerationAdversary(h, horizon=cfg_a.horizon, seed=seed)
        gen = PowerHopGenerator(scales, metric, cfg_a.eps_prime)
        tr = run_game(cfg_a, cls, metric, adv, gen, Upfront(h))
        if sink is not None:
            sink.append(tr)
        v = judge_uniform(tr, 2)
        if not isinstance(v, EventuallyCorrect):
            ok = False
            details.append(f"seed {seed}: {v}")
    rows.append(RegimeRow("l2_case2", "(a) gamma=7/10: uniform d*=2",
                          "eventually_correct x20", ok, "; ".join(details)))

    # (b) gamma in [eps1, eps2): the a2-prefix defeats the uniform reading
    # of the same transcript that the per-member threshold accepts
    cfg_b = GameConfig(eps=Q(2, 5), eps_prime=Q(2, 5), r=r, horizon=40)
    adv, h = crafted_prefix_adversary(scales, 5, cfg_b.horizon)
    gen = PowerHopGenerator(scales, metric, cfg_b.eps_prime)
    tr = run_game(cfg_b, cls, metric, adv, gen, Upfront(h))
    if sink is not None:
        sink.append(tr)
    vu = judge_uniform(tr, 2)
    vn = judge_nonuniform(tr, 5 + 2)
    ok = isinstance(vu, FailsWithinHorizon) and isinstance(vn, EventuallyCorrect)
    rows.append(RegimeRow("l2_case2", "(b) gamma=2/5: uniform fails, nonuniform d_h=|J|+2 passes",
                          "fails + eventually_correct", ok,
                          f"uniform={type(vu).__name__}, nonuniform={type(vn).__name__}"))

    # (c) gamma < eps1: obligated play succeeds in the limit, but every
    # fixed threshold d <= 6 is forced into an error
    cfg_c = GameConfig(eps=Q(1, 5), eps_prime=Q(2, 5), r=r, horizon=80)
    ok = True
    details = []
    for seed in range(6):
        h = pool[seed % len(pool)]
        adv = EnumerationAdversary(h, horizon=cfg_c.horizon, seed=seed)
        gen = PowerHopGenerator(scales, metric, cfg_c.eps_prime)
        tr = run_game(cfg_c, cls, metric, adv, gen, Upfront(h))
        if sink is not None:
            sink.append(tr)
        v = judge_limit(tr)
        if not isinstance(v, EventuallyCorrect):
            ok = False
            details.append(f"seed {seed}: {v}")
    adv, h = disturbance_only_adversary(scales, 6, 20)
    cfg_c2 = GameConfig(eps=Q(1, 5), eps_prime=Q(2, 5), r=r, horizon=20)
    gen = PowerHopGenerator(scales, metric, cfg_c2.eps_prime)
    tr = run_game(cfg_c2, cls, metric, adv, gen, Upfront(h))
    if sink is not None:
        sink.append(tr)
    for d in range(1, 7):
        v = judge_uniform(tr, d)
        if not isinstance(v, FailsWithinHorizon):
            ok = False
            details.append(f"d={d}: {v}")
    rows.append(RegimeRow("l2_case2", "(c) gamma=1/5: limit yes, every d<=6 forced",
                          "eventually_correct + fails for d=1..6", ok, "; ".join(details)))

    # (d) gamma' = eps': no legal move once the generator points are on
    # the table.  A representation-ambiguous g-reveal forces no wide
    # point; alternatively revealing the g/u pair pins and blocks both.
    found_a = no_valid_move_scan(cls, metric, [scales.g(4)], scales.eps_prime,
                                 scan_budget)
    found_b = no_valid_move_scan(cls, metric, [scales.g(2), scales.u(2)],
                                 scales.eps_prime, scan_budget)
    boundary = all(
        dist_cmp(metric, scales.g(4), scales.g(j), scales.eps_prime)
        is not Ordering.GREATER
        for j in (3, 2, 8, 16)
    )
    rows.append(RegimeRow("l2_case2", "(d) gamma'=1/2 boundary: g revealed",
                          "no valid move in budget",
                          found_a is None and found_b is None and boundary,
                          f"scan_a={found_a} scan_b={found_b}"))
    return rows


# ---------------------------------------------------------------------------
# CLI surface


def cli_generator(bundle: FixtureBundle, metric, config, params):
    cls: TwoScaleClass = bundle.cls
    return PowerHopGenerator(cls.scales, metric, config.eps_prime,
                             budget=config.enum_budget)


def cli_adversary(bundle: FixtureBundle, metric, kind, config, seed, params):
    from ..game import Upfront

    cls: TwoScaleClass = bundle.cls
    n_prefix = int(params.get("prefix", 5))
    adv, h = crafted_prefix_adversary(cls.scales, n_prefix, config.horizon)
    return adv, Upfront(h)


def cli_member_pool(bundle: FixtureBundle):
    return member_pool(bundle.cls.scales)
