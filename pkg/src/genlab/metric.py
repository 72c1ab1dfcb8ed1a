"""Points, metrics, closed balls, and exact covering/packing solvers.

Points carry exact coordinates.  A sparse coordinate is a rational scale
that may be flagged with a sqrt(2)/2 factor; the flag never leaves the
squared-comparison layer, so boundary cases (distances exactly equal to
a radius) are decided exactly.  Balls are closed throughout.

Covering numbers are *internal*: the solver covers the target set with
closed balls centered on an explicit candidate list (defaulting to the
targets themselves).  This upper-bounds the center-anywhere quantity;
all bundled fixtures are built so the restriction is harmless.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from typing import Callable, Iterable, Optional, Sequence

from .numbers import Q, Root2, as_fraction, format_fraction

# ---------------------------------------------------------------------------
# errors


class GenlabError(Exception):
    pass


class VariantMismatch(GenlabError):
    """Metric applied to a point variant it does not measure."""


class UncoverableTarget(GenlabError):
    def __init__(self, target):
        super().__init__(f"target {target!r} lies in no candidate ball")
        self.target = target


class ParseError(GenlabError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class Atom:
    id: int


@dataclass(frozen=True)
class Real:
    value: Fraction


@dataclass(frozen=True)
class Coord:
    """A coordinate value scale * (sqrt(2)/2 if half else 1)."""

    scale: Fraction
    half: bool = False

    def value(self) -> Root2:
        if self.half:
            return Root2(Q(0), self.scale / 2)
        return Root2(self.scale)


@dataclass(frozen=True)
class SparseVec:
    """Sparse coordinate vector; indices strictly increasing, no zeros."""

    coords: tuple[tuple[int, Coord], ...]

    def __post_init__(self):
        last = 0
        for idx, c in self.coords:
            if idx <= last:
                raise ValueError("sparse indices must be strictly increasing and >= 1")
            if c.scale == 0:
                raise ValueError("zero coordinates must not be stored")
            last = idx

    def max_index(self) -> int:
        return self.coords[-1][0] if self.coords else 0


Point = Atom | Real | SparseVec

ORIGIN = SparseVec(())


def real(x) -> Real:
    return Real(as_fraction(x))


def atom(i: int) -> Atom:
    return Atom(i)


def basis_point(index: int, scale, half: bool = False) -> SparseVec:
    """scale * e_index, optionally carrying the sqrt(2)/2 factor."""
    s = as_fraction(scale)
    if s == 0:
        return ORIGIN
    return SparseVec(((index, Coord(s, half)),))


def _point_cmp(p: Point, q: Point) -> int:
    """Canonical total order: Atoms by id, Reals by (|v|, sign),
    SparseVecs by (max index, lexicographic coordinates)."""
    rank = {Atom: 0, Real: 1, SparseVec: 2}
    rp, rq = rank[type(p)], rank[type(q)]
    if rp != rq:
        return -1 if rp < rq else 1
    if isinstance(p, Atom):
        return (p.id > q.id) - (p.id < q.id)
    if isinstance(p, Real):
        kp = (abs(p.value), 0 if p.value >= 0 else 1)
        kq = (abs(q.value), 0 if q.value >= 0 else 1)
        return (kp > kq) - (kp < kq)
    mp, mq = p.max_index(), q.max_index()
    if mp != mq:
        return -1 if mp < mq else 1
    for (ip, cp), (iq, cq) in zip(p.coords, q.coords):
        if ip != iq:
            return -1 if ip < iq else 1
        s = cp.value().cmp(cq.value())
        if s:
            return s
    return (len(p.coords) > len(q.coords)) - (len(p.coords) < len(q.coords))


point_sort_key = cmp_to_key(_point_cmp)


def sort_points(points: Iterable[Point]) -> list[Point]:
    return sorted(points, key=point_sort_key)


# ---------------------------------------------------------------------------
# metrics


class Ordering(enum.Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def _ordering(sign: int) -> Ordering:
    return Ordering.LESS if sign < 0 else (Ordering.EQUAL if sign == 0 else Ordering.GREATER)


@dataclass(frozen=True)
class DiscreteMetric:
    name = "discrete"

    def dist_cmp(self, p: Point, q: Point, radius: Fraction) -> Ordering:
        d = Q(0) if p == q else Q(1)
        return _ordering((d > radius) - (d < radius))


@dataclass(frozen=True)
class AbsMetric:
    """|x - y| on Real points."""

    name = "abs"

    def dist(self, p: Point, q: Point) -> Fraction:
        if not (isinstance(p, Real) and isinstance(q, Real)):
            raise VariantMismatch("abs metric measures Real points only")
        return abs(p.value - q.value)

    def dist_cmp(self, p: Point, q: Point, radius: Fraction) -> Ordering:
        d = self.dist(p, q)
        return _ordering((d > radius) - (d < radius))


from functools import lru_cache


@lru_cache(maxsize=65536)
def _term_sq(c1: Optional[Coord], c2: Optional[Coord], w: Optional[Fraction]) -> Root2:
    """Weighted square of the coordinate difference c1 - c2 (None = 0).
    The fixtures reuse a handful of coordinate values across millions of
    comparisons, so this cache removes nearly all repeat arithmetic."""
    d = Root2(Q(0))
    if c1 is not None:
        d = c1.value()
    if c2 is not None:
        d = d - c2.value()
    t = d.square()
    if w is not None:
        t = t * w
    return t


def _sq_dist(p: SparseVec, q: SparseVec, weight: Optional[Callable[[int], Fraction]]) -> Root2:
    if not (isinstance(p, SparseVec) and isinstance(q, SparseVec)):
        raise VariantMismatch("l2 metrics measure SparseVec points only")
    total = Root2(Q(0))
    i = j = 0
    pc, qc = p.coords, q.coords
    while i < len(pc) or j < len(qc):
        if j >= len(qc) or (i < len(pc) and pc[i][0] < qc[j][0]):
            idx, c1, c2 = pc[i][0], pc[i][1], None
            i += 1
        elif i >= len(pc) or qc[j][0] < pc[i][0]:
            idx, c1, c2 = qc[j][0], None, qc[j][1]
            j += 1
        else:
            idx, c1, c2 = pc[i][0], pc[i][1], qc[j][1]
            i += 1
            j += 1
        total = total + _term_sq(c1, c2, weight(idx) if weight is not None else None)
    return total


@dataclass(frozen=True)
class EuclideanMetric:
    """l2 metric on SparseVec points, compared in squared form."""

    name = "l2"

    def sq_dist(self, p: Point, q: Point) -> Root2:
        return _sq_dist(p, q, None)

    def dist_cmp(self, p: Point, q: Point, radius: Fraction) -> Ordering:
        return _ordering((self.sq_dist(p, q) - radius * radius).sign())


@dataclass(frozen=True)
class WeightedL2Metric:
    """Weighted l2 metric: squared coordinate differences are scaled by
    an even/odd index weight before summing."""

    even: Fraction
    odd: Fraction
    name = "wl2"

    def weight(self, idx: int) -> Fraction:
        return self.even if idx % 2 == 0 else self.odd

    def sq_dist(self, p: Point, q: Point) -> Root2:
        return _sq_dist(p, q, self.weight)

    def dist_cmp(self, p: Point, q: Point, radius: Fraction) -> Ordering:
        return _ordering((self.sq_dist(p, q) - radius * radius).sign())


Metric = DiscreteMetric | AbsMetric | EuclideanMetric | WeightedL2Metric


def dist_cmp(metric: Metric, p: Point, q: Point, radius) -> Ordering:
    return metric.dist_cmp(p, q, as_fraction(radius))


def in_ball(metric: Metric, center: Point, radius, p: Point) -> bool:
    """Closed ball membership: rho(center, p) <= radius."""
    return dist_cmp(metric, center, p, radius) is not Ordering.GREATER


def in_set_ball(metric: Metric, points: Sequence[Point], radius, p: Point) -> bool:
    """Closed ball around a finite set; empty set contains nothing."""
    r = as_fraction(radius)
    return any(in_ball(metric, c, r, p) for c in points)


def cmp_dist_pair(metric: Metric, p: Point, q: Point, s: Point, t: Point) -> int:
    """Exact sign of rho(p,q) - rho(s,t)."""
    if isinstance(metric, (EuclideanMetric, WeightedL2Metric)):
        return (metric.sq_dist(p, q) - metric.sq_dist(s, t)).sign()
    if isinstance(metric, AbsMetric):
        a, b = metric.dist(p, q), metric.dist(s, t)
    else:
        a = Q(0) if p == q else Q(1)
        b = Q(0) if s == t else Q(1)
    return (a > b) - (a < b)


# ---------------------------------------------------------------------------
# covering and packing


def coverage_masks(
    metric: Metric,
    targets: Sequence[Point],
    radius,
    candidates: Sequence[Point],
) -> list[int]:
    """Bitmask per candidate of the targets inside its closed ball."""
    r = as_fraction(radius)
    masks = []
    for c in candidates:
        m = 0
        for i, t in enumerate(targets):
            if in_ball(metric, c, r, t):
                m |= 1 << i
        masks.append(m)
    return masks


def min_cover_of_masks(masks: Sequence[int], n_targets: int) -> int:
    """Exact minimum number of masks whose union covers all n_targets bits.

    Branch and bound on the least-covered outstanding target; assumes
    every target is coverable (checked by the caller).
    """
    full = (1 << n_targets) - 1
    if full == 0:
        return 0
    live = sorted(set(m for m in masks if m), key=lambda m: -bin(m).count("1"))
    if all(bin(m).count("1") == 1 for m in live):
        return n_targets  # every ball is a singleton
    # Drop dominated masks (subset of another).
    kept: list[int] = []
    for m in live:
        if not any(m | k == k for k in kept):
            kept.append(m)

    # Greedy upper bound.
    def greedy(uncovered: int) -> int:
        n = 0
        while uncovered:
            best = max(kept, key=lambda m: bin(m & uncovered).count("1"))
            gain = best & uncovered
            if not gain:
                raise UncoverableTarget(uncovered)
            uncovered &= ~best
            n += 1
        return n

    best_known = greedy(full)
    covers_bit: dict[int, list[int]] = {}
    for i in range(n_targets):
        covers_bit[i] = [m for m in kept if m >> i & 1]

    def lower_bound(uncovered: int) -> int:
        # Each mask covers at most max_gain outstanding targets.
        if not uncovered:
            return 0
        max_gain = max(bin(m & uncovered).count("1") for m in kept)
        need = bin(uncovered).count("1")
        return -(-need // max_gain)

    seen_states: dict[int, int] = {}

    def search(uncovered: int, used: int):
        nonlocal best_known
        if not uncovered:
            best_known = min(best_known, used)
            return
        if used + lower_bound(uncovered) >= best_known:
            return
        prev = seen_states.get(uncovered)
        if prev is not None and prev <= used:
            return
        seen_states[uncovered] = used
        # Branch on the outstanding target with fewest covering masks.
        pick = None
        pick_opts = None
        u = uncovered
        while u:
            i = (u & -u).bit_length() - 1
            opts = [m for m in covers_bit[i] if m & uncovered]
            if pick_opts is None or len(opts) < len(pick_opts):
                pick, pick_opts = i, opts
                if len(opts) <= 1:
                    break
            u &= u - 1
        for m in sorted(pick_opts, key=lambda m: -bin(m & uncovered).count("1")):
            search(uncovered & ~m, used + 1)

    search(full, 0)
    return best_known


def _dedup(points: Sequence[Point]) -> list[Point]:
    seen = set()
    out = []
    for p in points:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def covering_number_exact(
    metric: Metric,
    targets: Sequence[Point],
    radius,
    candidates: Optional[Sequence[Point]] = None,
) -> int:
    """Exact minimum number of candidate-centered closed balls covering
    the target set.  Candidates default to the targets themselves."""
    tgts = _dedup(targets)
    if not tgts:
        return 0
    cands = _dedup(candidates) if candidates is not None else tgts
    masks = coverage_masks(metric, tgts, radius, cands)
    union = 0
    for m in masks:
        union |= m
    full = (1 << len(tgts)) - 1
    if union != full:
        missing = (full & ~union).bit_length() - 1
        raise UncoverableTarget(tgts[missing])
    return min_cover_of_masks(masks, len(tgts))


def covering_number_greedy(
    metric: Metric,
    targets: Sequence[Point],
    radius,
    candidates: Optional[Sequence[Point]] = None,
) -> int:
    """Greedy max-coverage cover size; an upper bound on the exact value."""
    tgts = _dedup(targets)
    if not tgts:
        return 0
    cands = _dedup(candidates) if candidates is not None else tgts
    masks = coverage_masks(metric, tgts, radius, cands)
    uncovered = (1 << len(tgts)) - 1
    n = 0
    while uncovered:
        best = max(masks, key=lambda m: bin(m & uncovered).count("1"))
        if not best & uncovered:
            missing = (uncovered & -uncovered).bit_length() - 1
            raise UncoverableTarget(tgts[missing])
        uncovered &= ~best
        n += 1
    return n


def packing_greedy(metric: Metric, points: Sequence[Point], radius) -> int:
    """Size of a greedily built subset with pairwise distance > 2*radius.

    Pairwise separation beyond the closed-ball diameter forces one point
    per ball, so this lower-bounds every covering number of the set.
    """
    r = as_fraction(radius)
    kept: list[Point] = []
    for p in _dedup(points):
        if all(dist_cmp(metric, p, k, 2 * r) is Ordering.GREATER for k in kept):
            kept.append(p)
    return len(kept)


# ---------------------------------------------------------------------------
# cover results and separation witnesses


@dataclass(frozen=True)
class SeparationWitness:
    """Certifies an infinite covering number at `radius`: the described
    family is infinite and pairwise at distance >= separation > 2*radius,
    so any closed ball of that radius contains at most one member."""

    family: str
    sample: tuple[Point, ...]
    separation: Fraction
    radius: Fraction


def verify_witness(metric: Metric, w: SeparationWitness, pairs: int = 10) -> bool:
    if not w.separation > 2 * w.radius:
        return False
    pts = list(w.sample)
    if len(pts) < 2:
        return False
    checked = 0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if dist_cmp(metric, pts[i], pts[j], w.separation) is Ordering.LESS:
                return False
            checked += 1
            if checked >= max(pairs, 10):
                return True
    return True


@dataclass(frozen=True)
class FiniteCover:
    n: int


@dataclass(frozen=True)
class InfiniteCover:
    witness: SeparationWitness


@dataclass(frozen=True)
class UnknownCover:
    lower_bound: int
    budget: int


CoverResult = FiniteCover | InfiniteCover | UnknownCover


def cover_is_finite(r: CoverResult) -> bool:
    return isinstance(r, FiniteCover)


# ---------------------------------------------------------------------------
# text formats

# Point records, one per line:
#   atom:<int>
#   real:<num>/<den>
#   svec:<idx>=<num>/<den>[:sqrt2half],...     (svec: alone is the origin)
# Metric header:
#   metric discrete | abs | l2 | wl2 even=<num>/<den> odd=<num>/<den>


def format_point(p: Point) -> str:
    if isinstance(p, Atom):
        return f"atom:{p.id}"
    if isinstance(p, Real):
        return f"real:{format_fraction(p.value)}"
    parts = []
    for idx, c in p.coords:
        s = f"{idx}={format_fraction(c.scale)}"
        if c.half:
            s += ":sqrt2half"
        parts.append(s)
    return "svec:" + ",".join(parts)


def parse_point(token: str, line_no: int = 0) -> Point:
    token = token.strip()
    if token.startswith("atom:"):
        try:
            return Atom(int(token[5:]))
        except ValueError:
            raise ParseError(line_no, f"bad atom id in {token!r}")
    if token.startswith("real:"):
        try:
            return Real(Fraction(token[5:]))
        except (ValueError, ZeroDivisionError):
            raise ParseError(line_no, f"bad rational in {token!r}")
    if token.startswith("svec:"):
        body = token[5:].strip()
        if not body:
            return ORIGIN
        coords = []
        for part in body.split(","):
            try:
                idx_s, val = part.split("=", 1)
                half = False
                if val.endswith(":sqrt2half"):
                    half = True
                    val = val[: -len(":sqrt2half")]
                coords.append((int(idx_s), Coord(Fraction(val), half)))
            except (ValueError, ZeroDivisionError):
                raise ParseError(line_no, f"bad coordinate {part!r}")
        try:
            return SparseVec(tuple(coords))
        except ValueError as e:
            raise ParseError(line_no, str(e))
    raise ParseError(line_no, f"unknown point record {token!r}")


def format_metric(m: Metric) -> str:
    if isinstance(m, WeightedL2Metric):
        return f"metric wl2 even={format_fraction(m.even)} odd={format_fraction(m.odd)}"
    return f"metric {m.name}"


def parse_metric(line: str, line_no: int = 0) -> Metric:
    parts = line.split()
    if not parts or parts[0] != "metric" or len(parts) < 2:
        raise ParseError(line_no, f"bad metric header {line!r}")
    kind = parts[1]
    if kind == "discrete":
        return DiscreteMetric()
    if kind == "abs":
        return AbsMetric()
    if kind == "l2":
        return EuclideanMetric()
    if kind == "wl2":
        kv = {}
        for p in parts[2:]:
            if "=" not in p:
                raise ParseError(line_no, f"bad wl2 parameter {p!r}")
            k, v = p.split("=", 1)
            try:
                kv[k] = Fraction(v)
            except (ValueError, ZeroDivisionError):
                raise ParseError(line_no, f"bad rational in {p!r}")
        if set(kv) != {"even", "odd"}:
            raise ParseError(line_no, "wl2 needs even=<q> odd=<q>")
        return WeightedL2Metric(kv["even"], kv["odd"])
    raise ParseError(line_no, f"unknown metric {kind!r}")


def parse_points_file(text: str) -> tuple[Optional[Metric], list[Point]]:
    """Parse a points file: optional metric header, then point records."""
    metric: Optional[Metric] = None
    points: list[Point] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("metric"):
            if metric is not None:
                raise ParseError(line_no, "duplicate metric header")
            metric = parse_metric(line, line_no)
            continue
        points.append(parse_point(line, line_no))
    return metric, points
