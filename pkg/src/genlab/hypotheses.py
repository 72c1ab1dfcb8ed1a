"""Supports, hypothesis classes, version spaces, closure and ERM oracles,
uniformly-unbounded-support checks, and closure-dimension computation.

A Support is a capability record: exact membership, a deterministic
canonical enumeration, and a covering-number capability that answers
Finite(n), Infinite(witnessed by a separation family), or
UnknownAtBudget.  Infinite covering numbers are never "computed"; they
are certified or left unknown.

Classes come in two flavors.  Explicit classes hold a concrete member
list and answer every oracle question by brute force.  Intensional
classes (used by the bundled fixtures, whose member families are
uncountable) answer consistency, closure and ERM questions analytically
and can produce exclusion witnesses so tests can certify their answers
against explicit instantiations.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

from .numbers import Q, Root2, as_fraction
from .metric import (
    AbsMetric,
    CoverResult,
    FiniteCover,
    GenlabError,
    InfiniteCover,
    Metric,
    ParseError,
    Point,
    Real,
    SeparationWitness,
    UnknownCover,
    basis_point,
    cover_is_finite,
    covering_number_exact,
    format_fraction,
    packing_greedy,
    parse_metric,
    parse_point,
    point_sort_key,
    sort_points,
    verify_witness,
)


class BotClosure(GenlabError):
    """Closure requested for a sample with an empty version space."""


class UndecidableIntersection(GenlabError):
    """A cover number needed by the dimension formula is unknown at budget."""


class UnsupportedSample(GenlabError):
    """An intensional oracle was queried outside its capability range."""


BOT = object()  # sentinel returned by closure_contains on empty version space


# ---------------------------------------------------------------------------
# rational separation helper


def rational_separation(sq_pairwise: Root2, radius: Fraction) -> Optional[Fraction]:
    """A rational s with s > 2*radius and s^2 <= sq_pairwise, if one exists.

    Used to attach witnesses to families whose pairwise distance may be
    irrational (sqrt(2) multiples): any rational between the ball
    diameter and the true separation certifies the packing argument.
    """
    four_r2 = Root2(4 * radius * radius)
    if (sq_pairwise - four_r2).sign() <= 0:
        return None
    if radius > 0:
        n = 1
        while True:
            s = 2 * radius * (1 + Q(1, n))
            if (Root2(s * s) - sq_pairwise).sign() <= 0:
                return s
            n *= 2
    s = Q(1)
    while (Root2(s * s) - sq_pairwise).sign() > 0:
        s /= 2
    return s


# ---------------------------------------------------------------------------
# index sets (parameterized predicates over positive integers)


@dataclass(frozen=True)
class IndexAll:
    lo: int = 1

    def contains(self, k: int) -> bool:
        return k >= self.lo

    def iterate(self) -> Iterator[int]:
        return itertools.count(self.lo)

    infinite = True

    def describe(self) -> str:
        return f"all>={self.lo}"


@dataclass(frozen=True)
class IndexEvens:
    lo: int = 2

    def contains(self, k: int) -> bool:
        return k >= self.lo and k % 2 == 0

    def iterate(self) -> Iterator[int]:
        start = self.lo if self.lo % 2 == 0 else self.lo + 1
        return itertools.count(start, 2)

    infinite = True

    def describe(self) -> str:
        return f"evens>={self.lo}"


@dataclass(frozen=True)
class IndexOdds:
    lo: int = 1

    def contains(self, k: int) -> bool:
        return k >= self.lo and k % 2 == 1

    def iterate(self) -> Iterator[int]:
        start = self.lo if self.lo % 2 == 1 else self.lo + 1
        return itertools.count(start, 2)

    infinite = True

    def describe(self) -> str:
        return f"odds>={self.lo}"


@dataclass(frozen=True)
class IndexPowers:
    base: int

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("power index sets need base >= 2")

    def contains(self, k: int) -> bool:
        if k < self.base:
            return False
        while k % self.base == 0:
            k //= self.base
        return k == 1

    def iterate(self) -> Iterator[int]:
        v = self.base
        while True:
            yield v
            v *= self.base

    infinite = True

    def describe(self) -> str:
        return f"powers:{self.base}"


@dataclass(frozen=True)
class IndexExplicit:
    members: frozenset[int]

    def contains(self, k: int) -> bool:
        return k in self.members

    def iterate(self) -> Iterator[int]:
        return iter(sorted(self.members))

    infinite = False

    def describe(self) -> str:
        return "explicit:" + ";".join(str(k) for k in sorted(self.members))


@dataclass(frozen=True)
class IndexUnion:
    parts: tuple

    def contains(self, k: int) -> bool:
        return any(p.contains(k) for p in self.parts)

    def iterate(self) -> Iterator[int]:
        return _merge_int_streams([p.iterate() for p in self.parts])

    @property
    def infinite(self) -> bool:
        return any(p.infinite for p in self.parts)

    def describe(self) -> str:
        return "union(" + ",".join(p.describe() for p in self.parts) + ")"


IndexSet = IndexAll | IndexEvens | IndexOdds | IndexPowers | IndexExplicit | IndexUnion


def index_union(*parts: IndexSet) -> IndexSet:
    return IndexUnion(tuple(parts)) if len(parts) != 1 else parts[0]


def _merge_int_streams(streams: list[Iterator[int]]) -> Iterator[int]:
    heap = []
    for i, s in enumerate(streams):
        v = next(s, None)
        if v is not None:
            heapq.heappush(heap, (v, i, s))
    last = None
    while heap:
        v, i, s = heapq.heappop(heap)
        if v != last:
            yield v
            last = v
        nxt = next(s, None)
        if nxt is not None:
            heapq.heappush(heap, (nxt, i, s))


def merge_point_streams(streams: Sequence[Iterator[Point]]) -> Iterator[Point]:
    """Duplicate-free merge of canonically ordered point streams."""
    heap = []
    for i, s in enumerate(streams):
        p = next(s, None)
        if p is not None:
            heapq.heappush(heap, (point_sort_key(p), i, p, s))
    last = None
    while heap:
        _, i, p, s = heapq.heappop(heap)
        if p != last:
            yield p
            last = p
        nxt = next(s, None)
        if nxt is not None:
            heapq.heappush(heap, (point_sort_key(nxt), i, nxt, s))


def take(stream: Iterator[Point], n: int) -> list[Point]:
    return list(itertools.islice(stream, n))


# ---------------------------------------------------------------------------
# supports


class Support:
    """Capability record for a hypothesis support."""

    def contains(self, p: Point) -> bool:
        raise NotImplementedError

    def stream(self) -> Iterator[Point]:
        """Canonical ordering, duplicate-free."""
        raise NotImplementedError

    def enumerate_points(self, n: int) -> list[Point]:
        return take(self.stream(), n)

    def cover_number(self, metric: Metric, radius) -> CoverResult:
        """Default: certify nothing; report a packing lower bound."""
        r = as_fraction(radius)
        budget = 64
        trunc = self.enumerate_points(budget)
        return UnknownCover(packing_greedy(metric, trunc, r), budget)

    def finite_points(self) -> Optional[list[Point]]:
        """The full point list when the support is finite, else None."""
        return None


@dataclass(frozen=True)
class FiniteSupport(Support):
    points: tuple[Point, ...]

    @staticmethod
    def of(points: Iterable[Point]) -> "FiniteSupport":
        return FiniteSupport(tuple(sort_points(set(points))))

    def contains(self, p: Point) -> bool:
        return p in self.points

    def stream(self) -> Iterator[Point]:
        return iter(self.points)

    def cover_number(self, metric: Metric, radius) -> CoverResult:
        return FiniteCover(covering_number_exact(metric, self.points, radius))

    def finite_points(self) -> Optional[list[Point]]:
        return list(self.points)


@dataclass(frozen=True)
class LatticeSupport(Support):
    """Two-sided arithmetic progression {offset + step*k : k in Z} over Real
    points.  step > 0."""

    offset: Fraction
    step: Fraction

    @staticmethod
    def of(offset, step) -> "LatticeSupport":
        o, s = as_fraction(offset), as_fraction(step)
        if s <= 0:
            raise ValueError("lattice step must be positive")
        return LatticeSupport(o % s, s)

    def contains(self, p: Point) -> bool:
        return isinstance(p, Real) and (p.value - self.offset) % self.step == 0

    def stream(self) -> Iterator[Point]:
        # by |value|, nonnegative first: scan k outward from the value
        # closest to zero
        import math

        center = math.floor(-self.offset / self.step)
        lo, hi = center, center + 1
        while True:
            a = self.offset + self.step * lo
            b = self.offset + self.step * hi
            ka = (abs(a), 0 if a >= 0 else 1)
            kb = (abs(b), 0 if b >= 0 else 1)
            if ka <= kb:
                yield Real(a)
                lo -= 1
            else:
                yield Real(b)
                hi += 1

    def cover_number(self, metric: Metric, radius) -> CoverResult:
        if not isinstance(metric, AbsMetric):
            return super().cover_number(metric, radius)
        r = as_fraction(radius)
        # Sparsify until the sub-progression outruns the ball diameter.
        m = 1
        while m * self.step <= 2 * r:
            m *= 2
        sep = m * self.step
        sample = tuple(
            Real(self.offset + self.step * m * k) for k in range(-6, 7)
        )
        return InfiniteCover(
            SeparationWitness(
                family=f"lattice offset={format_fraction(self.offset)} "
                f"step={format_fraction(self.step)} sparsified x{m}",
                sample=sample,
                separation=sep,
                radius=r,
            )
        )

    def intersect(self, other: "LatticeSupport") -> Optional["LatticeSupport"]:
        """CRT intersection of two rational lattices; None if empty."""
        from math import gcd, lcm

        den = (
            self.step.denominator
            * other.step.denominator
            * self.offset.denominator
            * other.offset.denominator
        )
        s1, o1 = int(self.step * den), int(self.offset * den)
        s2, o2 = int(other.step * den), int(other.offset * den)
        g = gcd(s1, s2)
        if (o2 - o1) % g != 0:
            return None
        l = lcm(s1, s2)
        # solve x = o1 mod s1, x = o2 mod s2
        _, u, _ = _ext_gcd(s1 // g, s2 // g)
        k = ((o2 - o1) // g * u) % (s2 // g)
        x = (o1 + s1 * k) % l
        return LatticeSupport(Q(x, den), Q(l, den))


def _ext_gcd(a: int, b: int):
    if b == 0:
        return a, 1, 0
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


@dataclass(frozen=True)
class BasisFamily(Support):
    """{scale * e_k : k in indices} in l2, scale optionally sqrt(2)/2-flagged."""

    scale: Fraction
    half: bool
    indices: IndexSet

    def point(self, k: int) -> Point:
        return basis_point(k, self.scale, self.half)

    def contains(self, p: Point) -> bool:
        from .metric import SparseVec, Coord

        if not isinstance(p, SparseVec) or len(p.coords) != 1:
            return False
        idx, c = p.coords[0]
        return c == Coord(self.scale, self.half) and self.indices.contains(idx)

    def stream(self) -> Iterator[Point]:
        return (self.point(k) for k in self.indices.iterate())

    def sq_pairwise(self) -> Root2:
        """Squared distance between two distinct family members (l2)."""
        v = Root2(Q(0), self.scale / 2) if self.half else Root2(self.scale)
        return v.square() * 2

    def cover_number(self, metric: Metric, radius) -> CoverResult:
        r = as_fraction(radius)
        if not self.indices.infinite:
            pts = [self.point(k) for k in self.indices.iterate()]
            return FiniteCover(covering_number_exact(metric, pts, r))
        from .metric import EuclideanMetric

        if isinstance(metric, EuclideanMetric):
            sqp = self.sq_pairwise()
            if (sqp - Root2(r * r)).sign() <= 0:
                return FiniteCover(1)  # one member's closed ball covers all
            sep = rational_separation(sqp, r)
            if sep is not None:
                return InfiniteCover(
                    SeparationWitness(
                        family=f"basis scale={format_fraction(self.scale)}"
                        + (":sqrt2half" if self.half else "")
                        + f" indices={self.indices.describe()}",
                        sample=tuple(self.enumerate_points(12)),
                        separation=sep,
                        radius=r,
                    )
                )
        return super().cover_number(metric, radius)

    def finite_points(self) -> Optional[list[Point]]:
        if self.indices.infinite:
            return None
        return [self.point(k) for k in self.indices.iterate()]


@dataclass(frozen=True)
class AffinePowerFamily(Support):
    """{scale * e_(mult*base^n + shift) : n >= n0} in l2.

    Covers the index patterns the fixture closures force: geometric
    towers of basis points on one scale.
    """

    scale: Fraction
    half: bool
    base: int
    mult: int = 1
    shift: int = 0
    n0: int = 1

    def __post_init__(self):
        if self.base < 2 or self.mult < 1:
            raise ValueError("need base >= 2 and mult >= 1")

    def index(self, n: int) -> int:
        return self.mult * self.base**n + self.shift

    def point(self, n: int) -> Point:
        return basis_point(self.index(n), self.scale, self.half)

    def contains(self, p: Point) -> bool:
        from .metric import SparseVec, Coord

        if not isinstance(p, SparseVec) or len(p.coords) != 1:
            return False
        idx, c = p.coords[0]
        if c != Coord(self.scale, self.half):
            return False
        v = idx - self.shift
        if v <= 0 or v % self.mult:
            return False
        v //= self.mult
        n = 0
        while v % self.base == 0:
            v //= self.base
            n += 1
        return v == 1 and n >= self.n0

    def stream(self) -> Iterator[Point]:
        return (self.point(n) for n in itertools.count(self.n0))

    def sq_pairwise(self) -> Root2:
        v = Root2(Q(0), self.scale / 2) if self.half else Root2(self.scale)
        return v.square() * 2


@dataclass(frozen=True)
class UnionSupport(Support):
    parts: tuple[Support, ...]

    def contains(self, p: Point) -> bool:
        return any(s.contains(p) for s in self.parts)

    def stream(self) -> Iterator[Point]:
        return merge_point_streams([s.stream() for s in self.parts])

    def finite_points(self) -> Optional[list[Point]]:
        pts = []
        for s in self.parts:
            f = s.finite_points()
            if f is None:
                return None
            pts.extend(f)
        return sort_points(set(pts))


def union_support(*parts: Support) -> Support:
    return UnionSupport(tuple(parts)) if len(parts) != 1 else parts[0]


# ---------------------------------------------------------------------------
# hypotheses and classes


@dataclass(frozen=True)
class Hypothesis:
    id: str
    support: Support


LabeledSample = Sequence[tuple[Point, int]]


class HypothesisClass:
    """Common oracle surface for explicit and intensional classes."""

    name: str = "class"

    def version_space_nonempty(self, sample: Sequence[Point]) -> bool:
        raise NotImplementedError

    def closure(self, sample: Sequence[Point]) -> Optional[Support]:
        """Intersection of supports over the version space; None if empty."""
        raise NotImplementedError

    def erm(self, sample: LabeledSample) -> int:
        raise NotImplementedError

    def enumerate_points(self, n: int) -> list[Point]:
        """Canonical dense enumeration of the class's point universe."""
        raise NotImplementedError

    def members(self) -> Optional[tuple[Hypothesis, ...]]:
        return None

    def uus_witnesses(self, metric: Metric, r: Fraction) -> tuple:
        """Witness families such that every member's support contains at
        least one of them (the quantification over members is part of
        the class's analytic structure).  Empty means no certificate."""
        return ()

    def exclusion_witness(self, sample: Sequence[Point], p: Point) -> Optional[Hypothesis]:
        """A concrete consistent member whose support omits p, when one
        exists; used to certify negative closure answers."""
        return None


class ExplicitClass(HypothesisClass):
    def __init__(self, hypotheses: Sequence[Hypothesis], name: str = "explicit"):
        ids = [h.id for h in hypotheses]
        if len(set(ids)) != len(ids):
            raise ValueError("hypothesis ids must be unique")
        self.hypotheses = tuple(hypotheses)
        self.name = name

    def members(self) -> tuple[Hypothesis, ...]:
        return self.hypotheses

    def version_space(self, sample: Sequence[Point]) -> tuple[Hypothesis, ...]:
        return tuple(
            h for h in self.hypotheses if all(h.support.contains(x) for x in sample)
        )

    def version_space_nonempty(self, sample: Sequence[Point]) -> bool:
        return bool(self.version_space(sample))

    def closure(self, sample: Sequence[Point]) -> Optional[Support]:
        vs = self.version_space(sample)
        if not vs:
            return None
        return intersect_supports([h.support for h in vs])

    def erm(self, sample: LabeledSample) -> int:
        best = None
        for h in self.hypotheses:
            errs = sum(1 for x, y in sample if int(h.support.contains(x)) != y)
            best = errs if best is None else min(best, errs)
            if best == 0:
                return 0
        return best if best is not None else 0

    def enumerate_points(self, n: int) -> list[Point]:
        return take(
            merge_point_streams([h.support.stream() for h in self.hypotheses]), n
        )

    def finite_universe(self) -> Optional[list[Point]]:
        pts = []
        for h in self.hypotheses:
            f = h.support.finite_points()
            if f is None:
                return None
            pts.extend(f)
        return sort_points(set(pts))

    def intersection(self, combo: Sequence[Hypothesis]) -> Support:
        """Support intersection for a member subset; fixtures with
        structured supports override this analytically."""
        return intersect_supports([h.support for h in combo])

    def exclusion_witness(self, sample, p) -> Optional[Hypothesis]:
        for h in self.version_space(sample):
            if not h.support.contains(p):
                return h
        return None


class GenericIntersection(Support):
    """Enumerates the first support filtered by the rest.  Covering
    capability stays at the default budgeted lower bound."""

    def __init__(self, supports: Sequence[Support]):
        self.supports = tuple(supports)

    def contains(self, p: Point) -> bool:
        return all(s.contains(p) for s in self.supports)

    def stream(self) -> Iterator[Point]:
        first = self.supports[0]
        rest = self.supports[1:]
        return (p for p in first.stream() if all(s.contains(p) for s in rest))


def intersect_supports(supports: Sequence[Support]) -> Support:
    """Exact intersection where the structure allows it; a filtered
    enumeration otherwise."""
    if len(supports) == 1:
        return supports[0]
    finite = [s for s in supports if s.finite_points() is not None]
    if finite:
        pts = set(finite[0].finite_points())
        for s in supports:
            if s is finite[0]:
                continue
            pts = {p for p in pts if s.contains(p)}
        return FiniteSupport.of(pts)
    if all(isinstance(s, LatticeSupport) for s in supports):
        cur = supports[0]
        for s in supports[1:]:
            cur = cur.intersect(s)
            if cur is None:
                return FiniteSupport.of(())
        return cur
    return GenericIntersection(supports)


# ---------------------------------------------------------------------------
# top-level oracle operations


def version_space_nonempty(cls: HypothesisClass, sample: Sequence[Point]) -> bool:
    return cls.version_space_nonempty(sample)


def closure_contains(cls: HypothesisClass, sample: Sequence[Point], p: Point):
    """True/False for membership in the closure, BOT if the version space
    is empty."""
    c = cls.closure(sample)
    if c is None:
        return BOT
    return c.contains(p)


def closure_enumerate(cls: HypothesisClass, sample: Sequence[Point], n: int) -> list[Point]:
    c = cls.closure(sample)
    if c is None:
        raise BotClosure("closure of an inconsistent sample")
    return c.enumerate_points(n)


def erm_oracle(cls: HypothesisClass, sample: LabeledSample) -> int:
    return cls.erm(sample)


def closure_via_erm(cls: HypothesisClass, positives: Sequence[Point], p: Point) -> bool:
    """Closure membership through the ERM oracle: label the sample
    positively, append (p, 0), and test whether every consistent member
    is forced to err."""
    if not cls.version_space_nonempty(positives):
        raise BotClosure("closure_via_erm requires a nonempty version space")
    labeled = [(x, 1) for x in positives] + [(p, 0)]
    return cls.erm(labeled) >= 1


@dataclass(frozen=True)
class UusSatisfied:
    witnesses: tuple[tuple[str, SeparationWitness], ...]


@dataclass(frozen=True)
class UusViolated:
    hypothesis_id: str
    cover: FiniteCover


@dataclass(frozen=True)
class UusUnknown:
    budget: int
    detail: str = ""


UusResult = UusSatisfied | UusViolated | UusUnknown


def uus_check(cls: HypothesisClass, metric: Metric, r, budget: int = 64) -> UusResult:
    rr = as_fraction(r)
    members = cls.members()
    if members is None:
        ws = cls.uus_witnesses(metric, rr)
        if ws and all(verify_witness(metric, w) for _, w in ws):
            return UusSatisfied(tuple(ws))
        return UusUnknown(budget, "no verified witness for the member families")
    witnesses = []
    unknown = None
    for h in members:
        res = h.support.cover_number(metric, rr)
        if isinstance(res, FiniteCover):
            return UusViolated(h.id, res)
        if isinstance(res, InfiniteCover) and verify_witness(metric, res.witness):
            witnesses.append((h.id, res.witness))
        else:
            unknown = UusUnknown(budget, f"no verified witness for {h.id}")
    if unknown is not None:
        return unknown
    return UusSatisfied(tuple(witnesses))


# ---------------------------------------------------------------------------
# closure dimension


@dataclass(frozen=True)
class FiniteDim:
    d: int
    witness_sequence: tuple[Point, ...]


@dataclass(frozen=True)
class InfiniteDim:
    family: str
    witness: SeparationWitness


@dataclass(frozen=True)
class DimLowerBound:
    d: int
    budget: int
    achieved: frozenset[int]
    gaps: int = 0


DimResult = FiniteDim | InfiniteDim | DimLowerBound


def closure_dimension_finite(
    cls: ExplicitClass, metric: Metric, eps, eps_prime
) -> DimResult:
    """Closure dimension of a small explicit class by the subset formula:
    the best eps-cover count among member-subset intersections whose
    eps'-cover is finite.

    When every support is finite, cover numbers use the class's whole
    point universe as the candidate pool (matching the brute-force
    search); structured supports answer through their own covering
    capability.  A certified-infinite qualifying subset dominates any
    undecidable ones; otherwise undecidability is surfaced rather than
    guessed away.
    """
    e, ep = as_fraction(eps), as_fraction(eps_prime)
    members = cls.members()
    if members is None:
        raise UnsupportedSample("the subset formula needs an explicit class")
    if len(members) > 20:
        raise UnsupportedSample("subset formula limited to 20 members")
    universe = cls.finite_universe()
    best = 0
    best_witness: tuple[Point, ...] = ()
    undecidable: Optional[str] = None
    for size in range(1, len(members) + 1):
        for combo in itertools.combinations(members, size):
            ids = [h.id for h in combo]
            inter = cls.intersection(combo)
            pts = inter.finite_points()
            if pts is not None and universe is not None:
                prime_side = FiniteCover(
                    covering_number_exact(metric, pts, ep, candidates=universe)
                )
                eps_side: CoverResult = FiniteCover(
                    covering_number_exact(metric, pts, e, candidates=universe)
                )
            else:
                prime_side = inter.cover_number(metric, ep)
                if isinstance(prime_side, UnknownCover):
                    undecidable = f"eps'-cover unknown for intersection of {ids}"
                    continue
                if not cover_is_finite(prime_side):
                    continue
                eps_side = inter.cover_number(metric, e)
            if isinstance(eps_side, UnknownCover):
                undecidable = f"eps-cover unknown for intersection of {ids}"
                continue
            if not cover_is_finite(prime_side):
                continue
            if isinstance(eps_side, InfiniteCover):
                return InfiniteDim(
                    family=f"intersection of {ids}", witness=eps_side.witness
                )
            if eps_side.n > best:
                if pts is not None:
                    best_witness = tuple(pts)
                else:
                    best_witness = _finite_cover_witness(inter, metric, e, eps_side.n)
                best = eps_side.n
    if undecidable is not None:
        raise UndecidableIntersection(undecidable)
    return FiniteDim(best, best_witness)


def _finite_cover_witness(
    support: Support, metric: Metric, eps: Fraction, n: int, budget: int = 64
) -> tuple[Point, ...]:
    for k in range(1, budget + 1):
        prefix = support.enumerate_points(k)
        if len(prefix) < k:
            break
        if covering_number_exact(metric, prefix, eps) == n:
            return tuple(prefix)
    raise UndecidableIntersection("no finite witness sequence found within budget")


def closure_dimension_bruteforce(
    cls: HypothesisClass,
    metric: Metric,
    eps,
    eps_prime,
    ground_set: Sequence[Point],
    max_len: int,
) -> DimResult:
    """Search all generatable subsets of the ground set (candidate pool =
    the ground set) for the largest d with an exactly-d eps-cover and a
    finite eps'-cover of the closure.  Reports every achieved d and how
    many subsets were undecidable at budget."""
    e, ep = as_fraction(eps), as_fraction(eps_prime)
    ground = sort_points(set(ground_set))
    fu = cls.finite_universe() if isinstance(cls, ExplicitClass) else None
    if fu is not None:
        best, best_seq, achieved = _bruteforce_finite(
            cls, metric, e, ground, max_len, fu
        )
        gaps = 0
    else:
        achieved = set()
        best = 0
        best_seq = ()
        gaps = 0
        for size in range(1, min(max_len, len(ground)) + 1):
            for combo in itertools.combinations(ground, size):
                if not cls.version_space_nonempty(combo):
                    continue
                closure = cls.closure(combo)
                prime_side = closure.cover_number(metric, ep)
                if isinstance(prime_side, UnknownCover):
                    gaps += 1
                    continue
                if not cover_is_finite(prime_side):
                    continue
                d = covering_number_exact(metric, combo, e, candidates=ground)
                achieved.add(d)
                if d > best:
                    best = d
                    best_seq = combo
    if fu is not None and set(fu) <= set(ground) and max_len >= len(ground) and gaps == 0:
        return FiniteDim(best, tuple(best_seq))
    return DimLowerBound(best, len(ground), frozenset(achieved), gaps)


def _bruteforce_finite(cls, metric, e, ground, max_len, universe):
    """Bitmask route for all-finite-support classes: coverage and member
    masks are built once, so each subset costs a couple of mask
    operations plus one small exact set-cover solve."""
    from .metric import in_ball

    V = sort_points(set(universe) | set(ground))
    vpos = {p: i for i, p in enumerate(V)}
    gidx = [vpos[p] for p in ground]
    cov_e = []  # over V, balls at ground candidates, radius eps
    for p in ground:
        m = 0
        for q in V:
            if in_ball(metric, p, e, q):
                m |= 1 << vpos[q]
        cov_e.append(m)
    member_masks = []
    for h in cls.members():
        m = 0
        for q in h.support.finite_points():
            if q in vpos:
                m |= 1 << vpos[q]
        member_masks.append(m)

    achieved: set[int] = set()
    best = 0
    best_seq: tuple[Point, ...] = ()
    n = len(ground)
    for size in range(1, min(max_len, n) + 1):
        for combo in itertools.combinations(range(n), size):
            t_mask = 0
            for i in combo:
                t_mask |= 1 << gidx[i]
            if not any(t_mask & ~m == 0 for m in member_masks):
                continue
            # the eps'-cover of the (finite) closure is finite by
            # construction, so every generatable subset qualifies
            d = _masked_cover(t_mask, cov_e)
            achieved.add(d)
            if d > best:
                best = d
                best_seq = tuple(ground[i] for i in combo)
    return best, best_seq, achieved


def _masked_cover(t_mask: int, candidate_masks: Sequence[int]) -> int:
    from .metric import min_cover_of_masks

    bits = []
    m = t_mask
    while m:
        bits.append((m & -m).bit_length() - 1)
        m &= m - 1
    remap = {b: i for i, b in enumerate(bits)}
    masks = []
    for cm in candidate_masks:
        rm = 0
        mm = cm & t_mask
        while mm:
            b = (mm & -mm).bit_length() - 1
            rm |= 1 << remap[b]
            mm &= mm - 1
        if rm:
            masks.append(rm)
    return min_cover_of_masks(masks, len(bits))


# ---------------------------------------------------------------------------
# class text format
#
#   metric <...>                      (optional header)
#   hypothesis <id>
#   finite: <point> <point> ...
#   family: basis scale=<q>[:sqrt2half] indices=<all|evens|powers:<p>|explicit:k;k;...>
#   family: lattice offset=<q> step=<q>


def _parse_index_set(text: str, line_no: int) -> IndexSet:
    if text == "all":
        return IndexAll()
    if text == "evens":
        return IndexEvens()
    if text.startswith("powers:"):
        return IndexPowers(int(text.split(":", 1)[1]))
    if text.startswith("explicit:"):
        ks = frozenset(int(k) for k in text.split(":", 1)[1].split(";") if k)
        return IndexExplicit(ks)
    raise ParseError(line_no, f"unknown index set {text!r}")


def parse_class_file(text: str) -> tuple[Optional[Metric], ExplicitClass]:
    metric: Optional[Metric] = None
    blocks: list[tuple[str, list[Support]]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("metric"):
            metric = parse_metric(line, line_no)
        elif line.startswith("hypothesis"):
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(line_no, "hypothesis lines are 'hypothesis <id>'")
            blocks.append((parts[1], []))
        elif line.startswith("finite:"):
            if not blocks:
                raise ParseError(line_no, "support line before any hypothesis")
            pts = [parse_point(tok, line_no) for tok in line[7:].split()]
            blocks[-1][1].append(FiniteSupport.of(pts))
        elif line.startswith("family:"):
            if not blocks:
                raise ParseError(line_no, "support line before any hypothesis")
            parts = line[7:].split()
            if not parts:
                raise ParseError(line_no, "empty family record")
            kind, kv = parts[0], {}
            for p in parts[1:]:
                if "=" not in p:
                    raise ParseError(line_no, f"bad family parameter {p!r}")
                k, v = p.split("=", 1)
                kv[k] = v
            if kind == "basis":
                scale = kv.get("scale")
                if scale is None or "indices" not in kv:
                    raise ParseError(line_no, "basis family needs scale= and indices=")
                half = scale.endswith(":sqrt2half")
                if half:
                    scale = scale[: -len(":sqrt2half")]
                blocks[-1][1].append(
                    BasisFamily(Fraction(scale), half, _parse_index_set(kv["indices"], line_no))
                )
            elif kind == "lattice":
                if "offset" not in kv or "step" not in kv:
                    raise ParseError(line_no, "lattice family needs offset= and step=")
                blocks[-1][1].append(
                    LatticeSupport.of(Fraction(kv["offset"]), Fraction(kv["step"]))
                )
            else:
                raise ParseError(line_no, f"unknown family kind {kind!r}")
        else:
            raise ParseError(line_no, f"unknown record {line!r}")
    hyps = []
    for hid, supports in blocks:
        if not supports:
            raise ParseError(0, f"hypothesis {hid} has no support lines")
        hyps.append(Hypothesis(hid, union_support(*supports)))
    if not hyps:
        raise ParseError(0, "no hypotheses in class file")
    return metric, ExplicitClass(hyps)
