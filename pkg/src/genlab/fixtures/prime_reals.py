"""Real-line fixture: supports are an odd-prime power tower {p^n, p^n - 1}
together with an arbitrary set of positive even integers.

At generator scale 1 the tower's even neighbors sit exactly on the
closed 1-ball boundary of the odd powers, which is what makes the
regime flip between adversary scales below 1 and at 1.  Bundled
players: the tower-chasing generator (with its verbatim fallback of
replaying the first reveal), the generic union-of-ladders limit
generator over a prime pool, obligated enumeration adversaries, and a
staged trap whose stage-m row walks p_m^j - 1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from ..numbers import Q, as_fraction
from ..metric import (
    AbsMetric,
    CoverResult,
        InfiniteCover,
    Metric,
    Point,
    Real,
    SeparationWitness,
        real,
)
from ..hypotheses import (
    FiniteSupport,
    Hypothesis,
    HypothesisClass,
    Support,
    UnsupportedSample,
    merge_point_streams,
)
from ..players import (
    Abstain,
        Emit,
    EnumerationAdversary,
    Generator,
    Move,
    PRE_THRESHOLD,
    BUDGET_EXHAUSTED,
    StagedTrapAdversary,
    pick_worst_commitment,
)
from . import FixtureBundle, RegimeRow


def odd_primes(n: int) -> list[int]:
    """First n odd primes: 3, 5, 7, ..."""
    out = []
    cand = 3
    while len(out) < n:
        if all(cand % p for p in out) and all(cand % d for d in (2,)):
            if all(cand % d for d in range(3, int(cand**0.5) + 1, 2)):
                out.append(cand)
        cand += 2
    return out


def as_positive_int(p: Point) -> Optional[int]:
    if isinstance(p, Real) and p.value.denominator == 1 and p.value > 0:
        return int(p.value)
    return None


def odd_prime_power_base(v: int) -> Optional[int]:
    """The odd prime p with v = p^n (n >= 1), if any."""
    if v < 3 or v % 2 == 0:
        return None
    for p in itertools.count(3, 2):
        if p * p > v:
            break
        if v % p == 0:
            while v % p == 0:
                v //= p
            return p if v == 1 else None
    # v itself is an odd prime (or 1, excluded above)
    return v


def is_power_of(v: int, p: int) -> bool:
    if v < p:
        return False
    while v % p == 0:
        v //= p
    return v == 1


@dataclass(frozen=True)
class PrimePowerSupport(Support):
    """{p^n, p^n - 1 : n >= 1} plus an explicit set of positive evens."""

    p: int
    extras: frozenset[Fraction] = frozenset()

    def contains(self, pt: Point) -> bool:
        if isinstance(pt, Real) and pt.value in self.extras:
            return True
        v = as_positive_int(pt)
        if v is None:
            return False
        return is_power_of(v, self.p) or is_power_of(v + 1, self.p)

    def _tower(self) -> Iterator[Point]:
        n = 1
        while True:
            yield real(self.p**n - 1)
            yield real(self.p**n)
            n += 1

    def stream(self) -> Iterator[Point]:
        extras = iter([real(v) for v in sorted(self.extras)])
        return merge_point_streams([self._tower(), extras])

    def cover_number(self, metric: Metric, radius) -> CoverResult:
        if not isinstance(metric, AbsMetric):
            return super().cover_number(metric, radius)
        r = as_fraction(radius)
        # sparsify the power tower until consecutive gaps clear the diameter
        s = 1
        while self.p ** (2 * s) - self.p**s <= 2 * r:
            s += 1
        sep = Q(self.p ** (2 * s) - self.p**s)
        sample = tuple(real(self.p ** (s * k)) for k in range(1, 13))
        return InfiniteCover(
            SeparationWitness(
                family=f"powers of {self.p} (stride {s})",
                sample=sample,
                separation=sep,
                radius=r,
            )
        )


class PrimeFamilyClass(HypothesisClass):
    """All supports (one tower from the prime pool) + (any evens)."""

    def __init__(self, primes: Sequence[int], name: str = "prime_reals"):
        self.primes = tuple(primes)
        self.name = name
        self._closure_memo: dict[tuple, Optional[Support]] = {}

    # -- classification helpers

    def _split(self, sample: Sequence[Point]):
        """(odd tower values, even values, unplaceable points)."""
        odds, evens, bad = [], [], []
        for pt in sample:
            v = as_positive_int(pt)
            if v is None:
                bad.append(pt)
            elif v % 2 == 0:
                evens.append(Q(v))
            else:
                odds.append(v)
        return odds, evens, bad

    def _consistent_primes(self, sample: Sequence[Point]) -> list[int]:
        odds, _, bad = self._split(sample)
        if bad:
            return []
        out = []
        for p in self.primes:
            if all(is_power_of(v, p) for v in odds):
                out.append(p)
        return out

    def version_space_nonempty(self, sample: Sequence[Point]) -> bool:
        return bool(self._consistent_primes(sample))

    def closure(self, sample: Sequence[Point]) -> Optional[Support]:
        key = tuple(sorted(set(sample), key=lambda p: str(p)))
        if key in self._closure_memo:
            return self._closure_memo[key]
        primes = self._consistent_primes(sample)
        _, evens, _ = self._split(sample)
        if not primes:
            result: Optional[Support] = None
        elif len(primes) == 1:
            result = PrimePowerSupport(primes[0], frozenset(evens))
        else:
            # no tower is forced; only the revealed evens are common
            result = FiniteSupport.of([real(v) for v in evens])
        if len(self._closure_memo) > 64:
            self._closure_memo.clear()
        self._closure_memo[key] = result
        return result

    def erm(self, sample) -> int:
        best = None
        for p in self.primes:
            errs = 0
            extras = {
                Q(as_positive_int(x))
                for x, y in sample
                if y == 1 and (v := as_positive_int(x)) is not None and v % 2 == 0
            }
            supp = PrimePowerSupport(p, frozenset(extras))
            for x, y in sample:
                if int(supp.contains(x)) != y:
                    errs += 1
            best = errs if best is None else min(best, errs)
            if best == 0:
                return 0
        if best is None:
            raise UnsupportedSample("empty prime pool")
        return best

    def enumerate_points(self, n: int) -> list[Point]:
        evens = (real(2 * k) for k in itertools.count(1))
        towers = [PrimePowerSupport(p)._tower() for p in self.primes]
        out = []
        for pt in merge_point_streams(list(towers) + [evens]):
            out.append(pt)
            if len(out) >= n:
                break
        return out

    def uus_witnesses(self, metric: Metric, r: Fraction):
        # every member's support includes one of the pool towers
        ws = []
        for p in self.primes:
            res = PrimePowerSupport(p).cover_number(metric, r)
            if not isinstance(res, InfiniteCover):
                return ()
            ws.append((f"tower:{p}", res.witness))
        return tuple(ws)

    def exclusion_witness(self, sample, pt) -> Optional[Hypothesis]:
        _, evens, _ = self._split(sample)
        for p in self._consistent_primes(sample):
            h = make_hypothesis(p, evens)
            if not h.support.contains(pt):
                return h
        return None

    def members(self):
        return None


def make_hypothesis(p: int, extras: Sequence = ()) -> Hypothesis:
    ex = frozenset(as_fraction(v) for v in extras)
    tag = "" if not ex else "+" + ",".join(str(v) for v in sorted(ex))
    return Hypothesis(f"tower:{p}{tag}", PrimePowerSupport(p, ex))


class PrimeSingleClass(HypothesisClass):
    """The sub-family with a fixed tower prime (a ladder level for the
    union generator)."""

    def __init__(self, p: int):
        self.p = p
        self.name = f"tower:{p}"
        self._inner = PrimeFamilyClass((p,), name=self.name)

    def version_space_nonempty(self, sample):
        return self._inner.version_space_nonempty(sample)

    def closure(self, sample):
        return self._inner.closure(sample)

    def erm(self, sample):
        return self._inner.erm(sample)

    def enumerate_points(self, n):
        return self._inner.enumerate_points(n)


class TowerGenerator(Generator):
    """Replay the first reveal until some revealed point is an odd prime
    power; afterwards emit powers of that prime outside the eps'-balls."""

    def __init__(self, metric: Metric, eps_prime, budget: int = 512):
        self.metric = metric
        self.eps_prime = as_fraction(eps_prime)
        self.budget = budget
        self.name = "tower_chaser"
        self._mirror_len = 0
        self._values: list[Fraction] = []  # sorted reveal values
        self._engaged: Optional[int] = None

    def _sync(self, seen: Sequence[Point]) -> None:
        import bisect

        if len(seen) < self._mirror_len:
            self._mirror_len = 0
            self._values = []
            self._engaged = None
        for pt in seen[self._mirror_len:]:
            if isinstance(pt, Real):
                bisect.insort(self._values, pt.value)
            if self._engaged is None:
                v = as_positive_int(pt)
                if v is not None and v % 2 == 1:
                    self._engaged = odd_prime_power_base(v)
        self._mirror_len = len(seen)

    def _novel(self, value: Fraction) -> bool:
        import bisect

        i = bisect.bisect_left(self._values, value - self.eps_prime)
        return not (i < len(self._values) and self._values[i] <= value + self.eps_prime)

    def move(self, seen: Sequence[Point]) -> Move:
        if not seen:
            return Abstain(PRE_THRESHOLD)
        self._sync(seen)
        if self._engaged is None:
            return Emit(seen[0])
        p = self._engaged
        for n in range(1, self.budget):
            if self._novel(Q(p**n)):
                return Emit(real(p**n))
        return Abstain(BUDGET_EXHAUSTED)


def staged_trap(cls: PrimeFamilyClass, metric: Metric, eps_prime,
                per_stage_budget: int = 10_000) -> StagedTrapAdversary:
    """Stage trap from the even neighbors: the opener walks 3^m - 1 and
    the stage-m row walks p_m^j - 1 for the next pool prime p_m.  Every
    reveal is even, so each pool tower stays consistent; the commitment
    is whichever consistent tower scores worst for the generator."""
    primes = cls.primes

    def opener(m: int) -> Point:
        return real(3**m - 1)

    def row(m: int, j: int) -> Point:
        p = primes[min(m, len(primes) - 1)]
        return real(p**j - 1)

    def protected(m: int, pt: Point) -> bool:
        v = as_positive_int(pt)
        if v is None:
            return False
        p = primes[min(m, len(primes) - 1)]
        return is_power_of(v, p) or is_power_of(v + 1, p)

    def builder(trap: StagedTrapAdversary, reveals, moves) -> Hypothesis:
        evens = [Q(v) for pt in reveals if (v := as_positive_int(pt)) is not None and v % 2 == 0]
        candidates = [make_hypothesis(p, evens) for p in primes]
        return pick_worst_commitment(candidates, metric, as_fraction(eps_prime), reveals, moves)

    return StagedTrapAdversary([], opener, row, protected, builder,
                               per_stage_budget=per_stage_budget)


# ---------------------------------------------------------------------------
# bundle and regimes


def build(n_primes: int = 5) -> FixtureBundle:
    primes = odd_primes(n_primes)
    cls = PrimeFamilyClass(primes)
    return FixtureBundle(
        name="prime_reals",
        cls=cls,
        metric=AbsMetric(),
        params={"primes": primes},
        notes="tower indices use exponents n >= 1; the generator's "
        "pre-engagement fallback replays the first reveal",
    )


def limit_generator(bundle: FixtureBundle, eps, eps_prime) -> Generator:
    from ..players import LimitGenerator

    classes = [PrimeSingleClass(p) for p in bundle.cls.primes]
    # every per-prime closure has an infinite eps'-cover, so the union
    # threshold is c+1 = 1
    return LimitGenerator(classes, bundle.metric, eps, eps_prime, c=0)


def run_regimes(horizon: int = 400, seeds: Sequence[int] = (0, 1), sink=None) -> list[RegimeRow]:
    from ..game import (
        EventuallyCorrect,
        FailsWithinHorizon,
        GameConfig,
        Upfront,
        Deferred,
        judge_limit,
        run_game,
    )

    bundle = build()
    cls, metric = bundle.cls, bundle.metric
    rows: list[RegimeRow] = []

    # regime (1/2, 1): generation in the limit succeeds for the bundled
    # generator and for the generic union generator
    cfg = GameConfig(eps=Q(1, 2), eps_prime=Q(1), r=Q(1), horizon=horizon)
    hyps = [make_hypothesis(5), make_hypothesis(3, [Q(2), Q(4), Q(20)])]
    ok = True
    detail = []
    for h in hyps:
        for seed in seeds:
            adv = EnumerationAdversary(h, horizon=horizon, seed=seed)
            for gen in (TowerGenerator(metric, cfg.eps_prime),
                        limit_generator(bundle, cfg.eps, cfg.eps_prime)):
                tr = run_game(cfg, cls, metric, adv, gen, Upfront(h))
                if sink is not None:
                    sink.append(tr)
                v = judge_limit(tr)
                if not isinstance(v, EventuallyCorrect):
                    ok = False
                    detail.append(f"{h.id}/{gen.name}/seed{seed}: {v}")
    rows.append(RegimeRow("prime_reals", "eps=1/2 eps'=1 limit-generatable",
                          "eventually_correct", ok, "; ".join(detail)))

    # regime (1, 1): the staged trap defeats both generators with errors
    # persisting past round 150
    cfg1 = GameConfig(eps=Q(1), eps_prime=Q(1), r=Q(1), horizon=horizon)
    ok = True
    detail = []
    for gen_factory in (
        lambda: TowerGenerator(metric, cfg1.eps_prime),
        lambda: limit_generator(bundle, cfg1.eps, cfg1.eps_prime),
    ):
        gen = gen_factory()
        adv = staged_trap(cls, metric, cfg1.eps_prime)
        tr = run_game(cfg1, cls, metric, adv, gen, Deferred())
        if sink is not None:
            sink.append(tr)
        v = judge_limit(tr)
        errs = tr.error_rounds()
        late = max(errs) if errs else 0
        if not isinstance(v, FailsWithinHorizon) or late <= 150:
            ok = False
            detail.append(f"{gen.name}: {v}, last error {late}")
    rows.append(RegimeRow("prime_reals", "eps=1 eps'=1 staged trap wins",
                          "fails_within_horizon, errors past 150", ok, "; ".join(detail)))
    return rows


# ---------------------------------------------------------------------------
# CLI surface


def cli_generator(bundle: FixtureBundle, metric, config, params):
    if params.get("name") == "limit":
        return limit_generator(bundle, config.eps, config.eps_prime)
    return TowerGenerator(metric, config.eps_prime, budget=config.enum_budget)


def cli_adversary(bundle: FixtureBundle, metric, kind, config, seed, params):
    from ..game import Deferred

    return staged_trap(bundle.cls, metric, config.eps_prime), Deferred()


def cli_member_pool(bundle: FixtureBundle):
    pool = [make_hypothesis(p) for p in bundle.cls.primes]
    pool.append(make_hypothesis(bundle.cls.primes[0], [Q(2), Q(4), Q(20)]))
    return pool
