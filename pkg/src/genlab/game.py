"""Round loop, legality/novelty scoring, verdict judges, and
transcript-level replays.

One round: the adversary reveals a point, then the generator moves on
the revealed prefix.  Emitted points are scored against the committed
hypothesis (membership) and against the closed eps'-balls around the
prefix revealed so far (novelty).  Abstentions are unscored before the
generator first engages and count as errors afterwards.

Judging at a finite horizon needs an explicit evidence policy:

* limit judge: EventuallyCorrect needs a clean all-emit suffix of at
  least half the horizon; FailsWithinHorizon needs an error inside the
  final quarter.
* uniform / non-uniform judges: strict from the first round whose
  cover profile reaches the threshold; any later violation fails.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence

from .numbers import Q, as_fraction, format_fraction
from .metric import (
    GenlabError,
    Metric,
    Point,
        format_metric,
    format_point,
    in_set_ball,
    min_cover_of_masks,
)
from .hypotheses import Hypothesis, HypothesisClass, UusSatisfied, uus_check
from .players import Abstain, Adversary, Emit, Generator, Move


class ConfigError(GenlabError):
    pass


class AdversaryIllegalReveal(GenlabError):
    pass


@dataclass(frozen=True)
class GameConfig:
    eps: Fraction  # adversary scale
    eps_prime: Fraction  # generator novelty scale
    r: Fraction  # UUS scale
    horizon: int
    seed: int = 0
    enum_budget: int = 512
    scan_budget: int = 512
    uus_override: bool = False

    def __post_init__(self):
        e, ep, r = as_fraction(self.eps), as_fraction(self.eps_prime), as_fraction(self.r)
        object.__setattr__(self, "eps", e)
        object.__setattr__(self, "eps_prime", ep)
        object.__setattr__(self, "r", r)
        if not (0 < e <= r and 0 < ep <= r):
            raise ConfigError("scales must satisfy 0 < eps, eps' <= r")
        if self.horizon < 0:
            raise ConfigError("horizon must be nonnegative")


@dataclass(frozen=True)
class Round:
    t: int
    revealed: Point
    move: Move
    member_ok: Optional[bool]
    novel_ok: Optional[bool]
    cover: int  # prefix cover level witnessed so far (running maximum)

    @property
    def scored(self) -> bool:
        return isinstance(self.move, Emit)

    @property
    def passed(self) -> bool:
        return self.scored and bool(self.member_ok) and bool(self.novel_ok)


@dataclass(frozen=True)
class Transcript:
    config: GameConfig
    class_name: str
    metric: Metric
    generator_name: str
    adversary_name: str
    committed_id: str
    rounds: tuple[Round, ...]

    @property
    def cover_profile(self) -> list[int]:
        return [r.cover for r in self.rounds]

    def reveals(self) -> list[Point]:
        return [r.revealed for r in self.rounds]

    def clean_suffix_length(self) -> int:
        """Length of the trailing run of passing emissions."""
        n = 0
        for r in reversed(self.rounds):
            if r.passed:
                n += 1
            else:
                break
        return n

    def error_rounds(self) -> list[int]:
        """Rounds with a failed emission, plus abstentions after the
        generator first engaged."""
        first_emit = next((r.t for r in self.rounds if r.scored), None)
        if first_emit is None:
            return []
        out = []
        for r in self.rounds:
            if r.scored and not r.passed:
                out.append(r.t)
            elif not r.scored and r.t > first_emit:
                out.append(r.t)
        return out


class NeighborIndex:
    """Finds the already-added points within a closed radius of a query.

    On the real line this is a bisect window; elsewhere a linear scan.
    """

    def __init__(self, metric: Metric, radius: Fraction):
        from .metric import AbsMetric, DiscreteMetric

        self.metric = metric
        self.radius = radius
        self.fast = isinstance(metric, AbsMetric)
        self.trivial = isinstance(metric, DiscreteMetric) and radius < 1
        self.points: list[Point] = []
        self.sorted_vals: list[tuple[Fraction, int]] = []

    def add(self, p: Point) -> int:
        import bisect

        i = len(self.points)
        self.points.append(p)
        if self.fast:
            bisect.insort(self.sorted_vals, (p.value, i))
        return i

    def neighbors(self, p: Point) -> list[int]:
        """Indices of added points q with rho(q, p) <= radius (self included
        if already added)."""
        import bisect

        from .metric import in_ball

        if self.trivial:
            return [i for i, q in enumerate(self.points) if q == p]
        if self.fast:
            lo = bisect.bisect_left(self.sorted_vals, (p.value - self.radius, -1))
            hi = bisect.bisect_right(
                self.sorted_vals, (p.value + self.radius, len(self.points))
            )
            return [i for _, i in self.sorted_vals[lo:hi]]
        return [
            i
            for i, q in enumerate(self.points)
            if in_ball(self.metric, q, self.radius, p)
        ]

    def any_within(self, p: Point) -> bool:
        import bisect

        if self.trivial:
            return p in self.points
        if self.fast:
            lo = bisect.bisect_left(self.sorted_vals, (p.value - self.radius, -1))
            return (
                lo < len(self.sorted_vals)
                and self.sorted_vals[lo][0] <= p.value + self.radius
            )
        from .metric import in_ball

        return any(in_ball(self.metric, q, self.radius, p) for q in self.points)


class CoverTracker:
    """Incremental internal covering number of the revealed prefix.

    Coverage is symmetric for every bundled metric, so the coverage
    graph splits into connected components and the exact cover is the
    sum of per-component covers.  A new reveal only disturbs its own
    component, which keeps the per-round cost near-linear on the
    configurations the fixtures produce.
    """

    def __init__(self, metric: Metric, radius: Fraction):
        self.metric = metric
        self.radius = radius
        self.index = NeighborIndex(metric, radius)
        self.points: list[Point] = []
        self.seen: set[Point] = set()
        self.covers: list[set[int]] = []  # indices inside the ball at point i
        self.parent: list[int] = []
        self.comp_value: dict[int, int] = {}
        self.total = 0

    def _find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def add(self, p: Point) -> int:
        if p in self.seen:
            return self.total
        i = len(self.points)
        self.points.append(p)
        self.seen.add(p)
        self.covers.append({i})
        self.parent.append(i)
        touched = {i}
        neighbors = self.index.neighbors(p)
        self.index.add(p)
        for j in neighbors:
            self.covers[j].add(i)
            self.covers[i].add(j)
            touched.add(self._find(j))
        roots = {self._find(j) for j in touched}
        for r in roots:
            self.total -= self.comp_value.pop(r, 0)
            if r != i:
                self.parent[r] = i
        if len(roots) == 1 and not self.covers[i] - {i}:
            value = 1  # isolated point: its own ball, nothing else helps
            comp = [i]
        else:
            comp = [j for j in range(i + 1) if self._find(j) == i]
            value = self._solve(comp)
        self.comp_value[i] = value
        self.total += value
        return self.total

    def _solve(self, comp: list[int]) -> int:
        if len(comp) == 1:
            return 1
        pos = {j: k for k, j in enumerate(comp)}
        masks = []
        for j in comp:
            m = 0
            for t in self.covers[j]:
                m |= 1 << pos[t]
            masks.append(m)
        return min_cover_of_masks(masks, len(comp))

    def value(self) -> int:
        return self.total


@dataclass(frozen=True)
class Upfront:
    hypothesis: Hypothesis


@dataclass(frozen=True)
class Deferred:
    pass


CommitPolicy = Upfront | Deferred


def run_game(
    config: GameConfig,
    cls: HypothesisClass,
    metric: Metric,
    adversary: Adversary,
    generator: Generator,
    commit: CommitPolicy,
) -> Transcript:
    if not config.uus_override:
        res = uus_check(cls, metric, config.r)
        if not isinstance(res, UusSatisfied):
            raise ConfigError(
                f"class fails uus_check at r={format_fraction(config.r)}: "
                f"{type(res).__name__} (set uus_override to run anyway)"
            )
    from .metric import covering_number_exact

    universe = None
    fu = getattr(cls, "finite_universe", None)
    if fu is not None:
        universe = fu()
    if universe is not None and len(universe) > 64:
        universe = None
    tracker = CoverTracker(metric, config.eps)
    reveals: list[Point] = []
    moves: list[Move] = []
    covers: list[int] = []
    witnessed = 0
    for t in range(1, config.horizon + 1):
        x = adversary.reveal(t, tuple(moves))
        reveals.append(x)
        if universe is not None:
            # small explicit class: centers range over its whole universe,
            # matching the pool the dimension computations use
            value = covering_number_exact(
                metric, reveals, config.eps, candidates=universe
            )
        else:
            value = tracker.add(x)
        # reaching a cover level is a permanent event for the threshold
        # judges, and a late reveal can act as a center that re-covers
        # earlier points, so the recorded profile is the running maximum
        witnessed = max(witnessed, value)
        covers.append(witnessed)
        moves.append(generator.move(tuple(reveals)))

    if isinstance(commit, Upfront):
        h = commit.hypothesis
    else:
        try:
            h = adversary.finalize(tuple(reveals), tuple(moves))
        except GenlabError as e:
            raise AdversaryIllegalReveal(str(e)) from e
    for i, x in enumerate(reveals):
        if not h.support.contains(x):
            raise AdversaryIllegalReveal(
                f"committed hypothesis {h.id!r} omits reveal {format_point(x)} "
                f"at round {i + 1}"
            )

    rounds = []
    novelty_index = NeighborIndex(metric, config.eps_prime)
    for i, (x, mv) in enumerate(zip(reveals, moves)):
        t = i + 1
        novelty_index.add(x)
        if isinstance(mv, Emit):
            member = h.support.contains(mv.point)
            novel = not novelty_index.any_within(mv.point)
        else:
            member = novel = None
        rounds.append(Round(t, x, mv, member, novel, covers[i]))
    return Transcript(
        config=config,
        class_name=cls.name,
        metric=metric,
        generator_name=getattr(generator, "name", type(generator).__name__),
        adversary_name=getattr(adversary, "name", type(adversary).__name__),
        committed_id=h.id,
        rounds=tuple(rounds),
    )


# ---------------------------------------------------------------------------
# verdicts and judges


@dataclass(frozen=True)
class EventuallyCorrect:
    t_star: int


@dataclass(frozen=True)
class FailsWithinHorizon:
    error_rounds: tuple[int, ...]


@dataclass(frozen=True)
class Inconclusive:
    reason: str


Verdict = EventuallyCorrect | FailsWithinHorizon | Inconclusive


def verdict_kind(v: Verdict) -> str:
    return {
        EventuallyCorrect: "eventually_correct",
        FailsWithinHorizon: "fails_within_horizon",
        Inconclusive: "inconclusive",
    }[type(v)]


def judge_limit(transcript: Transcript) -> Verdict:
    T = len(transcript.rounds)
    if T == 0:
        return Inconclusive("empty transcript")
    errors = transcript.error_rounds()
    first_emit = next((r.t for r in transcript.rounds if r.scored), None)
    if first_emit is None:
        return Inconclusive("no emissions")
    t_star = max(first_emit, max(errors) + 1 if errors else 1)
    suffix = T - t_star + 1
    if suffix >= -(-T // 2):  # clean suffix of at least half the horizon
        return EventuallyCorrect(t_star)
    final_quarter_start = T - T // 4 + 1
    late = [t for t in errors if t >= final_quarter_start]
    if late:
        return FailsWithinHorizon(tuple(errors))
    return Inconclusive("errors stop before the final quarter but suffix too short")


def _judge_threshold(transcript: Transcript, threshold: int) -> Verdict:
    t0 = next((r.t for r in transcript.rounds if r.cover >= threshold), None)
    if t0 is None:
        return Inconclusive(f"cover profile never reaches {threshold}")
    bad = [
        r.t
        for r in transcript.rounds
        if r.t >= t0 and not r.passed  # abstain after threshold is an error
    ]
    if bad:
        return FailsWithinHorizon(tuple(bad))
    return EventuallyCorrect(t0)


def judge_uniform(transcript: Transcript, d_star: int) -> Verdict:
    return _judge_threshold(transcript, d_star)


def judge_nonuniform(transcript: Transcript, d_h: int) -> Verdict:
    return _judge_threshold(transcript, d_h)


def check_cover_obligation(
    transcript: Transcript, h: Hypothesis, eps, truncation_budget: int
) -> bool:
    """Does the revealed prefix eps-cover the budgeted truncation of the
    hypothesis support?"""
    reveals = transcript.reveals()
    e = as_fraction(eps)
    for p in h.support.enumerate_points(truncation_budget):
        if not in_set_ball(transcript.metric, reveals, e, p):
            return False
    return True


# ---------------------------------------------------------------------------
# replays


def replay_novelty(transcript: Transcript, delta_prime) -> list[Optional[bool]]:
    """Recompute novelty flags at a smaller generator scale."""
    dp = as_fraction(delta_prime)
    if dp > transcript.config.eps_prime:
        raise ConfigError("replay scale must not exceed the transcript's eps'")
    reveals = transcript.reveals()
    out: list[Optional[bool]] = []
    for i, r in enumerate(transcript.rounds):
        if isinstance(r.move, Emit):
            out.append(not in_set_ball(transcript.metric, reveals[: i + 1], dp, r.move.point))
        else:
            out.append(None)
    return out


def cover_profile_at(transcript: Transcript, radius) -> list[int]:
    """Recompute the per-round cover profile at another adversary scale."""
    tracker = CoverTracker(transcript.metric, as_fraction(radius))
    return [tracker.add(r.revealed) for r in transcript.rounds]


class ScaleBoundViolation(GenlabError):
    def __init__(self, p: Point, q: Point):
        super().__init__(
            f"scale bound violated on pair {format_point(p)}, {format_point(q)}"
        )
        self.pair = (p, q)


def replay_metric_transfer(
    transcript: Transcript, rho1: Metric, M
) -> list[Optional[bool]]:
    """Verify rho2 <= M*rho1 on every observed pair (rho2 = transcript
    metric), then recompute novelty at eps'/M under rho1.  Novelty at
    eps' under rho2 must imply the recomputed flag."""
    m = as_fraction(M)
    rho2 = transcript.metric
    pts = list(dict.fromkeys(transcript.reveals() + [
        r.move.point for r in transcript.rounds if isinstance(r.move, Emit)
    ]))
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if not _dist_scaled_le(rho2, rho1, pts[i], pts[j], m):
                raise ScaleBoundViolation(pts[i], pts[j])
    dp = transcript.config.eps_prime / m
    reveals = transcript.reveals()
    out: list[Optional[bool]] = []
    for i, r in enumerate(transcript.rounds):
        if isinstance(r.move, Emit):
            out.append(not in_set_ball(rho1, reveals[: i + 1], dp, r.move.point))
        else:
            out.append(None)
    return out


def _dist_scaled_le(rho2: Metric, rho1: Metric, p: Point, q: Point, m: Fraction) -> bool:
    """Exact check of rho2(p,q) <= m * rho1(p,q)."""
    from .metric import EuclideanMetric, WeightedL2Metric, AbsMetric, DiscreteMetric

    def sq(metric):
        if isinstance(metric, (EuclideanMetric, WeightedL2Metric)):
            return metric.sq_dist(p, q)
        if isinstance(metric, AbsMetric):
            d = metric.dist(p, q)
        else:
            d = Q(0) if p == q else Q(1)
        from .numbers import Root2

        return Root2(d * d)

    return (sq(rho2) - sq(rho1) * (m * m)).sign() <= 0


# ---------------------------------------------------------------------------
# serialization (line-oriented, bit-exact rationals)


def format_move(mv: Move) -> str:
    if isinstance(mv, Emit):
        return "emit:" + format_point(mv.point)
    return "abstain" + (f":{mv.reason}" if mv.reason else "")


def _flag(v: Optional[bool]) -> str:
    return "-" if v is None else ("1" if v else "0")


def transcript_lines(transcript: Transcript, verdicts: dict[str, Verdict] | None = None) -> list[str]:
    c = transcript.config
    lines = [
        "game "
        f"class={transcript.class_name} "
        f"eps={format_fraction(c.eps)} eps_prime={format_fraction(c.eps_prime)} "
        f"r={format_fraction(c.r)} horizon={c.horizon} seed={c.seed} "
        f"generator={transcript.generator_name} adversary={transcript.adversary_name} "
        f"committed={transcript.committed_id}",
        format_metric(transcript.metric),
    ]
    for r in transcript.rounds:
        lines.append(
            f"round t={r.t} reveal={format_point(r.revealed)} "
            f"move={format_move(r.move)} member={_flag(r.member_ok)} "
            f"novel={_flag(r.novel_ok)} cover={r.cover}"
        )
    for name, v in (verdicts or {}).items():
        extra = ""
        if isinstance(v, EventuallyCorrect):
            extra = f" t_star={v.t_star}"
        elif isinstance(v, FailsWithinHorizon):
            extra = f" errors={','.join(map(str, v.error_rounds))}"
        else:
            extra = f" reason={v.reason.replace(' ', '_')}"
        lines.append(f"verdict judge={name} kind={verdict_kind(v)}{extra}")
    return lines


def transcript_digest(transcript: Transcript) -> str:
    text = "\n".join(transcript_lines(transcript))
    return hashlib.sha256(text.encode()).hexdigest()[:16]
