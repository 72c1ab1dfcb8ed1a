"""l2 fixture with an origin anchor and three point families per
coordinate: wide r-UUS points u_k = 2r*e_k, adversary points a_{2k} on
even coordinates at scale eps, and generator points g_j on odd
coordinates at scale eps'.  A support picks an infinite index set for
each family; revealing an a-point forces the whole geometric tower
g_{2k^n+1} into the closure, which is the only renewable source of
novel emissions.

Index sets for the a/g tower run over bases k >= 2: base 1 would make
the forced tower a single point.  Exponents run from 1.
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
    Metric,
    ORIGIN,
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
    IndexUnion,
    Support,
        index_union,
    rational_separation,
)
from ..players import (
    Abstain,
    Emit,
    EnumerationAdversary,
    Generator,
    Move,
    BUDGET_EXHAUSTED,
    StagedTrapAdversary,
    pick_worst_commitment,
)
from . import FixtureBundle, RegimeRow, no_valid_move_scan
from .prime_reals import odd_primes, is_power_of


def integer_root(v: int, n: int) -> Optional[int]:
    """k with k**n == v, if one exists (k >= 2).  Integer Newton from an
    upper seed, exact at any size."""
    if v < 2:
        return None
    if n == 1:
        return v
    k = 1 << -(-v.bit_length() // n)  # 2^ceil(bits/n) >= floor(v^(1/n))
    while True:
        t = ((n - 1) * k + v // k ** (n - 1)) // n
        if t >= k:
            break
        k = t
    return k if k >= 2 and k**n == v else None


def power_bases(v: int) -> list[int]:
    """All k >= 2 with k**n == v for some n >= 1 (includes k = v)."""
    out = []
    n = 1
    while 2**n <= v:
        k = integer_root(v, n)
        if k is not None:
            out.append(k)
        n += 1
    return sorted(set(out))


@dataclass(frozen=True)
class Scales:
    r: Fraction
    eps: Fraction
    eps_prime: Fraction

    def u(self, k: int) -> Point:
        return basis_point(k, 2 * self.r)

    def a(self, k: int) -> Point:
        """Adversary point with tower base k (lives on coordinate 2k)."""
        return basis_point(2 * k, self.eps)

    def g(self, j: int) -> Point:
        """Generator point on odd coordinate j."""
        return basis_point(j, self.eps_prime)

    def classify(self, p: Point):
        """('zero'|'u'|'a'|'g', key) or None for points outside the universe."""
        if p == ORIGIN:
            return ("zero", 0)
        if not isinstance(p, SparseVec) or len(p.coords) != 1:
            return None
        idx, c = p.coords[0]
        if c == Coord(2 * self.r, False):
            return ("u", idx)
        if idx % 2 == 0 and c == Coord(self.eps, False) and idx >= 4:
            return ("a", idx // 2)
        if idx % 2 == 1 and c == Coord(self.eps_prime, False) and idx >= 3:
            return ("g", idx)
        return None


@dataclass(frozen=True)
class AnchoredSupport(Support):
    """{0} union u-, a- and g-families over the three index sets."""

    scales: Scales
    u_set: IndexSet   # u_k for k in u_set
    a_set: IndexSet   # a-points and their towers, bases k in a_set (k >= 2)
    d_set: IndexSet   # extra g-points g_{2k+1} for k in d_set

    def contains(self, p: Point) -> bool:
        c = self.scales.classify(p)
        if c is None:
            return False
        kind, key = c
        if kind == "zero":
            return True
        if kind == "u":
            return self.u_set.contains(key)
        if kind == "a":
            return self.a_set.contains(key)
        m = (key - 1) // 2
        if self.d_set.contains(m):
            return True
        return any(self.a_set.contains(b) for b in power_bases(m))

    def stream(self) -> Iterator[Point]:
        s = self.scales

        def walk():
            yield ORIGIN
            for idx in itertools.count(1):
                here = []
                if idx % 2 == 0 and idx >= 4 and self.a_set.contains(idx // 2):
                    here.append(s.a(idx // 2))
                if idx % 2 == 1 and idx >= 3:
                    g = s.g(idx)
                    if self.contains(g):
                        here.append(g)
                if self.u_set.contains(idx):
                    here.append(s.u(idx))
                here.sort(key=lambda q: q.coords[0][1].value())
                yield from here

        return walk()


@dataclass(frozen=True)
class AnchoredClosure(Support):
    """Closure of a sample: the anchor, the sample itself, and the full
    g-tower of every revealed a-point."""

    scales: Scales
    finite: frozenset[Point]
    bases: frozenset[int]

    def contains(self, p: Point) -> bool:
        if p in self.finite:
            return True
        c = self.scales.classify(p)
        if c is None:
            return False
        kind, key = c
        if kind == "zero":
            return True
        if kind == "g":
            m = (key - 1) // 2
            return any(b in self.bases for b in power_bases(m))
        if kind == "a":
            return key in self.bases
        return False

    def stream(self) -> Iterator[Point]:
        from ..hypotheses import merge_point_streams

        parts = [iter(FiniteSupport.of(self.finite | {ORIGIN}).stream())]
        for b in sorted(self.bases):
            parts.append(
                AffinePowerFamily(
                    self.scales.eps_prime, False, base=b, mult=2, shift=1
                ).stream()
            )
        return merge_point_streams(parts)


class AnchoredTowersClass(HypothesisClass):
    """Intensional class over all (infinite) index-set triples."""

    def __init__(self, scales: Scales, name: str = "l2_case1"):
        self.scales = scales
        self.name = name
        self._memo: dict = {}

    def _parts(self, sample: Sequence[Point]):
        """(u-keys, a-bases, g-indices, unplaceable)."""
        us, bases, gs, bad = set(), set(), set(), []
        for p in sample:
            c = self.scales.classify(p)
            if c is None:
                bad.append(p)
                continue
            kind, key = c
            if kind == "u":
                us.add(key)
            elif kind == "a":
                bases.add(key)
            elif kind == "g":
                gs.add(key)
        return us, bases, gs, bad

    def version_space_nonempty(self, sample: Sequence[Point]) -> bool:
        return not self._parts(sample)[3]

    def closure(self, sample: Sequence[Point]) -> Optional[Support]:
        key = frozenset(sample)
        if key in self._memo:
            return self._memo[key]
        us, bases, gs, bad = self._parts(sample)
        if bad:
            result = None
        else:
            finite = frozenset(sample) | {ORIGIN}
            result = AnchoredClosure(self.scales, finite, frozenset(bases))
        if len(self._memo) > 64:
            self._memo.clear()
        self._memo[key] = result
        return result

    def erm(self, sample) -> int:
        positives = [x for x, y in sample if y == 1]
        negatives = [x for x, y in sample if y == 0]
        us, bases, gs, bad = self._parts(positives)
        errs = len([p for p in positives if self.scales.classify(p) is None])
        placeable = [p for p in positives if self.scales.classify(p) is not None]
        closure = AnchoredClosure(
            self.scales, frozenset(placeable) | {ORIGIN}, frozenset(bases)
        )
        errs += sum(1 for q in negatives if closure.contains(q))
        return errs

    def enumerate_points(self, n: int) -> list[Point]:
        full = AnchoredSupport(
            self.scales, IndexAll(1), IndexAll(2), IndexAll(1)
        )
        out = []
        for p in full.stream():
            out.append(p)
            if len(out) >= n:
                break
        return out

    def uus_witnesses(self, metric: Metric, r: Fraction):
        fam = BasisFamily(2 * self.scales.r, False, IndexAll(1))
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
        us, bases, gs, bad = self._parts(sample)
        mentioned = set(us) | set(bases) | {(j - 1) // 2 for j in gs}
        c = self.scales.classify(p)
        if c is not None:
            mentioned.add(c[1])
        tail = next(q for q in odd_primes(40) if q > max(mentioned | {2}) + 1)
        h = make_hypothesis(
            self.scales,
            u_set=index_union(IndexExplicit(frozenset(us)), IndexPowers(tail)),
            a_set=index_union(IndexExplicit(frozenset(bases)), IndexPowers(tail)),
            d_set=index_union(
                IndexExplicit(frozenset((j - 1) // 2 for j in gs)), IndexPowers(tail)
            ),
        )
        return h if not h.support.contains(p) else None


def make_hypothesis(scales: Scales, u_set: IndexSet, a_set: IndexSet,
                    d_set: IndexSet, tag: str = "") -> Hypothesis:
    name = tag or f"h[{u_set.describe()}|{a_set.describe()}|{d_set.describe()}]"
    return Hypothesis(name, AnchoredSupport(scales, u_set, a_set, d_set))


class TowerHopGenerator(Generator):
    """Engage on the first revealed a-point; afterwards emit its forced
    g-tower outside the eps'-balls."""

    def __init__(self, scales: Scales, metric: Metric, eps_prime, budget: int = 256):
        self.scales = scales
        self.metric = metric
        self.eps_prime = as_fraction(eps_prime)
        self.budget = budget
        self.name = "tower_hop"

    def move(self, seen: Sequence[Point]) -> Move:
        base = None
        for p in seen:
            c = self.scales.classify(p)
            if c is not None and c[0] == "a":
                base = c[1]
                break
        if base is None:
            return Abstain("pre-engagement")
        for n in range(1, self.budget):
            cand = self.scales.g(2 * base**n + 1)
            if not in_set_ball(self.metric, seen, self.eps_prime, cand):
                return Emit(cand)
        return Abstain(BUDGET_EXHAUSTED)


def staged_trap(scales: Scales, metric: Metric, eps_prime,
                per_stage_budget: int = 10_000) -> StagedTrapAdversary:
    """Stage trap revealing only the anchor, u-points and g-points: the
    opener walks a power-of-2 u/g pattern, the stage-m row the same
    pattern over the m-th odd prime; the protected sets are whole
    u/a/g-copies on prime-power bases."""
    primes = odd_primes(64)

    def pattern(base: int, j: int) -> Point:
        if j % 2 == 1:
            return scales.u(base ** ((j + 1) // 2))
        return scales.g(2 * base ** (j // 2) + 1)

    def opener(m: int) -> Point:
        return pattern(2, m)

    def row(m: int, j: int) -> Point:
        return pattern(primes[min(m - 1, len(primes) - 1)], j)

    def protected(m: int, pt: Point) -> bool:
        q = primes[min(m - 1, len(primes) - 1)]
        c = scales.classify(pt)
        if c is None:
            return False
        kind, key = c
        if kind == "u":
            return is_power_of(key, q)
        if kind == "a":
            return is_power_of(key, q)
        if kind == "g":
            m2 = (key - 1) // 2
            return m2 >= q and is_power_of(m2, q)
        return False

    def builder(trap: StagedTrapAdversary, reveals, moves) -> Hypothesis:
        us, gs = set(), set()
        for p in reveals:
            c = scales.classify(p)
            if c and c[0] == "u":
                us.add(c[1])
            elif c and c[0] == "g":
                gs.add((c[1] - 1) // 2)
        candidates = []
        for q in [2] + [primes[m - 1] for m in range(1, min(trap.stage, len(primes)) + 1)]:
            candidates.append(
                make_hypothesis(
                    scales,
                    u_set=index_union(IndexPowers(q), IndexExplicit(frozenset(us))),
                    a_set=IndexPowers(q),
                    d_set=index_union(IndexPowers(q), IndexExplicit(frozenset(gs))),
                    tag=f"protect:{q}",
                )
            )
        return pick_worst_commitment(candidates, metric, as_fraction(eps_prime),
                                     reveals, moves)

    return StagedTrapAdversary([ORIGIN], opener, row, protected, builder,
                               per_stage_budget=per_stage_budget)


# ---------------------------------------------------------------------------


def build(r=Q(1), eps=Q(1, 2), eps_prime=Q(1, 2)) -> FixtureBundle:
    scales = Scales(as_fraction(r), as_fraction(eps), as_fraction(eps_prime))
    return FixtureBundle(
        name="l2_case1",
        cls=AnchoredTowersClass(scales),
        metric=EuclideanMetric(),
        params={"r": scales.r, "eps": scales.eps, "eps_prime": scales.eps_prime},
        notes="a/g tower bases start at 2 (base 1 collapses the tower)",
    )


def member_pool(scales: Scales) -> list[Hypothesis]:
    return [
        make_hypothesis(scales, IndexAll(1), IndexEvens(2), IndexAll(1), tag="dense"),
        make_hypothesis(scales, IndexEvens(2), IndexPowers(2), IndexPowers(3), tag="pow2"),
        make_hypothesis(scales, IndexAll(1), IndexPowers(3), IndexEvens(2), tag="pow3"),
        make_hypothesis(scales, IndexEvens(2), IndexUnion((IndexPowers(2), IndexPowers(5))),
                        IndexAll(1), tag="pow25"),
    ]


def run_regimes(horizon: int = 80, n_seeds: int = 20, scan_budget: int = 500, sink=None) -> list[RegimeRow]:
    from ..game import (
        Deferred,
        EventuallyCorrect,
        GameConfig,
        Upfront,
        judge_limit,
        run_game,
    )
    from ..metric import Ordering, dist_cmp
    from ..players import LimitGenerator

    bundle = build()
    cls: AnchoredTowersClass = bundle.cls
    scales, metric = cls.scales, bundle.metric
    rows: list[RegimeRow] = []
    r = scales.r

    # (gamma, gamma') = (2/5, 2/5): obligated adversaries, fixture generator
    cfg = GameConfig(eps=Q(2, 5), eps_prime=Q(2, 5), r=r, horizon=horizon)
    pool = member_pool(scales)
    ok = True
    details = []
    for seed in range(n_seeds):
        h = pool[seed % len(pool)]
        adv = EnumerationAdversary(h, horizon=horizon, seed=seed)
        gen = TowerHopGenerator(scales, metric, cfg.eps_prime)
        tr = run_game(cfg, cls, metric, adv, gen, Upfront(h))
        if sink is not None:
            sink.append(tr)
        v = judge_limit(tr)
        if not isinstance(v, EventuallyCorrect):
            ok = False
            details.append(f"seed {seed}: {v}")
    rows.append(RegimeRow("l2_case1", "gamma=2/5 gamma'=2/5 obligated",
                          "eventually_correct x20", ok, "; ".join(details)))

    # (1/2, 2/5): staged trap defeats the fixture and generic limit generators
    cfg2 = GameConfig(eps=Q(1, 2), eps_prime=Q(2, 5), r=r, horizon=horizon)
    ok = True
    details = []
    for gen in (
        TowerHopGenerator(scales, metric, cfg2.eps_prime),
        LimitGenerator([cls], metric, cfg2.eps, cfg2.eps_prime, c=1),
    ):
        adv = staged_trap(scales, metric, cfg2.eps_prime)
        tr = run_game(cfg2, cls, metric, adv, gen, Deferred())
        if sink is not None:
            sink.append(tr)
        v = judge_limit(tr)
        details.append(f"{gen.name}: {type(v).__name__}")
        if isinstance(v, EventuallyCorrect):
            ok = False
    rows.append(RegimeRow("l2_case1", "gamma=1/2 gamma'=2/5 staged trap",
                          "not eventually_correct", ok, "; ".join(details)))

    # (2/5, 1/2): after the anchor is revealed there is no legal move
    gp = Q(1, 2)
    found = no_valid_move_scan(cls, metric, [ORIGIN], gp, scan_budget)
    balls_ok = all(
        dist_cmp(metric, ORIGIN, scales.g(j), gp) is not Ordering.GREATER
        for j in (3, 5, 9, 17)
    )
    rows.append(RegimeRow("l2_case1", "gamma=2/5 gamma'=1/2 anchor revealed",
                          "no valid move in budget", found is None and balls_ok,
                          f"scan={found}"))
    return rows


# ---------------------------------------------------------------------------
# CLI surface


def cli_generator(bundle: FixtureBundle, metric, config, params):
    cls: AnchoredTowersClass = bundle.cls
    return TowerHopGenerator(cls.scales, metric, config.eps_prime,
                             budget=config.enum_budget)


def cli_adversary(bundle: FixtureBundle, metric, kind, config, seed, params):
    from ..game import Deferred

    cls: AnchoredTowersClass = bundle.cls
    return staged_trap(cls.scales, metric, config.eps_prime), Deferred()


def cli_member_pool(bundle: FixtureBundle):
    return member_pool(bundle.cls.scales)
