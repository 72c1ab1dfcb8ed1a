"""Generator strategies and adversary constructions.

Generators are deterministic functions of the revealed prefix: calling
`move` with any prefix (including a truncation of an earlier one) gives
the move the strategy makes at that point.  Instances keep internal
memo caches, but only of quantities that are themselves functions of
the prefix, so replays and no-lookahead checks hold by construction.

Pre-threshold play is Abstain rather than an arbitrary point: those
rounds are never scored by the definitions, and abstaining keeps
transcripts auditable.  Search loops carry explicit budgets; running
out is a first-class outcome (an Abstain with a reason), never a wrong
emission.

Adversaries are single-game objects: `reveal` is called once per round
in order, and deferred adversaries pick their committed hypothesis only
at the horizon, constrained to consistency with everything revealed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .numbers import Q, as_fraction
from .metric import (
    GenlabError,
    Metric,
    Point,
    covering_number_exact,
    in_set_ball,
)
from .hypotheses import Hypothesis, HypothesisClass, Support


@dataclass(frozen=True)
class Emit:
    point: Point


@dataclass(frozen=True)
class Abstain:
    reason: str = ""


Move = Emit | Abstain

PRE_THRESHOLD = "pre-threshold"
BUDGET_EXHAUSTED = "search-budget-exhausted"
BOT_CLOSURE = "empty-version-space"


class BaseExhausted(GenlabError):
    """A trap adversary ran out of admissible base points."""


# ---------------------------------------------------------------------------
# generators


class Generator:
    name = "generator"

    def move(self, seen: Sequence[Point]) -> Move:
        raise NotImplementedError


def prefix_cover(cls: Optional[HypothesisClass], metric: Metric,
                 seen: Sequence[Point], eps: Fraction) -> int:
    """Covering number of the revealed prefix.

    Centers come from the class's whole (finite) point universe when one
    exists, matching the candidate pool the dimension computations use;
    otherwise from the prefix itself.  Structured fixtures are built so
    the prefix-internal value already equals the center-anywhere one.
    """
    universe = None
    if cls is not None:
        fu = getattr(cls, "finite_universe", None)
        if fu is not None:
            universe = fu()
    if universe is not None and len(universe) <= 64:
        return covering_number_exact(metric, seen, eps, candidates=universe)
    return covering_number_exact(metric, seen, eps)


class _NoveltyScan:
    """Scan a stable enumeration for the first point outside the closed
    eps'-balls around the revealed prefix.

    Blocked entries stay blocked (balls only accumulate along one game's
    prefix), so the scan pointer is monotone; the front entry is
    rechecked only against reveals it has not seen yet.  Any call whose
    prefix does not extend the previous one resets the cache, keeping
    the scan a pure function of (enumeration, prefix).
    """

    def __init__(self, metric: Metric, radius: Fraction, budget: int):
        self.metric = metric
        self.radius = radius
        self.budget = budget
        self.key = None
        self.ptr = 0
        self.checked = 0
        self.mirror: list[Point] = []

    def first_novel(self, key, entries: Sequence[Point], seen: Sequence[Point]) -> Optional[Point]:
        k = len(self.mirror)
        if key != self.key or len(seen) < k or list(seen[:k]) != self.mirror:
            self.key = key
            self.ptr = 0
            self.checked = 0
            self.mirror = []
        self.mirror.extend(seen[len(self.mirror):])
        while self.ptr < min(len(entries), self.budget):
            p = entries[self.ptr]
            if in_set_ball(self.metric, seen[self.checked:], self.radius, p):
                self.ptr += 1
                self.checked = 0
                continue
            self.checked = len(seen)
            return p
        return None


class UniformGenerator(Generator):
    """Wait until the eps-cover of the prefix reaches d_star, then emit
    canonically enumerated closure points outside the eps'-balls."""

    def __init__(self, cls: HypothesisClass, metric: Metric, eps, eps_prime,
                 d_star: int, budget: int = 512):
        self.cls = cls
        self.metric = metric
        self.eps = as_fraction(eps)
        self.eps_prime = as_fraction(eps_prime)
        self.d_star = d_star
        self.budget = budget
        self.name = f"uniform(d_star={d_star})"
        self._scan = _NoveltyScan(metric, self.eps_prime, budget)

    def move(self, seen: Sequence[Point]) -> Move:
        if prefix_cover(self.cls, self.metric, seen, self.eps) < self.d_star:
            return Abstain(PRE_THRESHOLD)
        closure = self.cls.closure(seen)
        if closure is None:
            return Abstain(BOT_CLOSURE)
        entries = closure.enumerate_points(self.budget)
        p = self._scan.first_novel(closure, entries, seen)
        return Emit(p) if p is not None else Abstain(BUDGET_EXHAUSTED)


class NonUniformGenerator(Generator):
    """Pick the deepest ladder level whose threshold the prefix cover has
    reached (capped by the round index), and play its uniform strategy."""

    def __init__(self, ladder: Sequence[tuple[HypothesisClass, int]], metric: Metric,
                 eps, eps_prime, budget: int = 512):
        self.ladder = list(ladder)
        self.metric = metric
        self.eps = as_fraction(eps)
        self.eps_prime = as_fraction(eps_prime)
        self.budget = budget
        self.name = f"nonuniform(levels={len(self.ladder)})"
        self._scans = [
            _NoveltyScan(metric, self.eps_prime, budget) for _ in self.ladder
        ]

    def move(self, seen: Sequence[Point]) -> Move:
        # nested ladder: the top level carries the union's point universe
        d_t = prefix_cover(self.ladder[-1][0], self.metric, seen, self.eps)
        n_t = 0
        for n, (_, thresh) in enumerate(self.ladder, start=1):
            if n <= len(seen) and thresh <= d_t:
                n_t = n
        if n_t == 0:
            return Abstain(PRE_THRESHOLD)
        cls = self.ladder[n_t - 1][0]
        closure = cls.closure(seen)
        if closure is None:
            return Abstain(BOT_CLOSURE)
        entries = closure.enumerate_points(self.budget)
        p = self._scans[n_t - 1].first_novel(closure, entries, seen)
        return Emit(p) if p is not None else Abstain(BUDGET_EXHAUSTED)


class LimitGenerator(Generator):
    """Union-of-classes strategy: abstain until the prefix cover reaches
    c+1, freeze the per-class closures of that prefix with their
    canonical enumerations, then follow the index whose frozen
    enumeration has the longest prefix inside the eps-balls of the
    reveals, emitting its first enumerated point outside the eps'-balls.
    Ties break to the lowest index."""

    def __init__(self, classes: Sequence[HypothesisClass], metric: Metric,
                 eps, eps_prime, c: int, enum_budget: int = 512,
                 scan_budget: int = 512):
        self.classes = list(classes)
        self.metric = metric
        self.eps = as_fraction(eps)
        self.eps_prime = as_fraction(eps_prime)
        self.c = c
        self.enum_budget = enum_budget
        self.scan_budget = scan_budget
        self.name = f"limit(c={c},n={len(self.classes)})"
        self._reset()

    def _reset(self):
        self._mirror: list[Point] = []
        self._tstar: Optional[int] = None
        self._enums: list[list[Point]] = []
        self._survivors: list[int] = []
        self._n: dict[int, int] = {}
        self._n_checked: dict[int, int] = {}
        self._scans: dict[int, _NoveltyScan] = {}

    def _sync(self, seen: Sequence[Point]) -> None:
        k = len(self._mirror)
        if len(seen) < k or list(seen[:k]) != self._mirror:
            self._reset()
        self._mirror.extend(seen[len(self._mirror):])

    def move(self, seen: Sequence[Point]) -> Move:
        self._sync(seen)
        if self._tstar is None:
            if covering_number_exact(self.metric, seen, self.eps) < self.c + 1:
                return Abstain(PRE_THRESHOLD)
            self._tstar = len(seen)
            prefix = list(seen)
            for i, cls in enumerate(self.classes):
                closure = cls.closure(prefix)
                if closure is None:
                    continue
                self._survivors.append(i)
                self._enums.append(closure.enumerate_points(self.enum_budget))
                self._n[i] = 0
                self._n_checked[i] = 0
                self._scans[i] = _NoveltyScan(self.metric, self.eps_prime, self.scan_budget)
            if not self._survivors:
                return Abstain(BOT_CLOSURE)
        # advance the covered-prefix counters
        for pos, i in enumerate(self._survivors):
            enum = self._enums[pos]
            while self._n[i] < len(enum):
                p = enum[self._n[i]]
                if in_set_ball(self.metric, seen[self._n_checked[i]:], self.eps, p):
                    self._n[i] += 1
                    self._n_checked[i] = 0
                else:
                    self._n_checked[i] = len(seen)
                    break
        best = max(self._n[i] for i in self._survivors)
        i_t = min(i for i in self._survivors if self._n[i] == best)
        pos = self._survivors.index(i_t)
        p = self._scans[i_t].first_novel(i_t, self._enums[pos], seen)
        return Emit(p) if p is not None else Abstain(BUDGET_EXHAUSTED)


class ErmSearchGenerator(Generator):
    """Scan a dense enumeration; skip points inside the eps'-balls of the
    prefix; emit the first point whose one-negative ERM value is at
    least 1 (every consistent hypothesis is forced to contain it)."""

    def __init__(self, cls: HypothesisClass, metric: Metric, eps_prime,
                 dense: Sequence[Point] | Callable[[int], list[Point]],
                 budget: int = 512):
        self.cls = cls
        self.metric = metric
        self.eps_prime = as_fraction(eps_prime)
        self.budget = budget
        if callable(dense):
            self._dense = list(dense(budget))
        else:
            self._dense = list(dense)[:budget]
        self.name = "erm_search"
        self._blocked: set[int] = set()
        self._checked = [0] * len(self._dense)
        self._mirror: list[Point] = []

    def move(self, seen: Sequence[Point]) -> Move:
        k = len(self._mirror)
        if len(seen) < k or list(seen[:k]) != self._mirror:
            self._blocked = set()
            self._checked = [0] * len(self._dense)
            self._mirror = []
        self._mirror.extend(seen[len(self._mirror):])
        if not self.cls.version_space_nonempty(seen):
            return Abstain(BOT_CLOSURE)
        labeled_base = [(x, 1) for x in seen]
        for i, y in enumerate(self._dense):
            if i in self._blocked:
                continue
            if in_set_ball(self.metric, seen[self._checked[i]:], self.eps_prime, y):
                self._blocked.add(i)
                continue
            self._checked[i] = len(seen)
            if self.cls.erm(labeled_base + [(y, 0)]) >= 1:
                return Emit(y)
        return Abstain(BUDGET_EXHAUSTED)


class ScriptedGenerator(Generator):
    """Plays a fixed move list; abstains once the script runs out."""

    def __init__(self, moves: Sequence[Move]):
        self.script = list(moves)
        self.name = "scripted"

    def move(self, seen: Sequence[Point]) -> Move:
        t = len(seen)
        if 1 <= t <= len(self.script):
            return self.script[t - 1]
        return Abstain("script-exhausted")


# ---------------------------------------------------------------------------
# adversaries


class Adversary:
    name = "adversary"

    def reveal(self, t: int, gen_moves: Sequence[Move]) -> Point:
        raise NotImplementedError

    def finalize(self, reveals: Sequence[Point], moves: Sequence[Move]) -> Hypothesis:
        raise GenlabError(f"{self.name} does not defer its commitment")


class EnumerationAdversary(Adversary):
    """Reveals a fixed schedule (cycled if the horizon outruns it).  The
    default schedule is the canonical support enumeration, optionally
    shuffled in consecutive blocks by a seeded RNG; an injected prefix
    is revealed first."""

    def __init__(self, h: Hypothesis, horizon: int, seed: Optional[int] = None,
                 block: int = 8, prefix: Sequence[Point] = ()):
        pts = h.support.enumerate_points(max(horizon, 1))
        if seed is not None and block > 1:
            rng = random.Random(seed)
            shuffled = []
            for i in range(0, len(pts), block):
                chunk = pts[i:i + block]
                rng.shuffle(chunk)
                shuffled.extend(chunk)
            pts = shuffled
        self.schedule = list(prefix) + pts
        self.hypothesis = h
        self.name = f"enumeration({h.id})"

    def reveal(self, t: int, gen_moves: Sequence[Move]) -> Point:
        return self.schedule[(t - 1) % len(self.schedule)]


class ScriptedAdversary(Adversary):
    def __init__(self, points: Sequence[Point], h: Optional[Hypothesis] = None):
        if not points:
            raise ValueError("scripted adversary needs at least one point")
        self.points = list(points)
        self.hypothesis = h
        self.name = "scripted"

    def reveal(self, t: int, gen_moves: Sequence[Move]) -> Point:
        return self.points[(t - 1) % len(self.points)]

    def finalize(self, reveals, moves) -> Hypothesis:
        if self.hypothesis is None:
            raise GenlabError("scripted adversary has no hypothesis to commit")
        return self.hypothesis


def pick_worst_commitment(
    candidates: Sequence[Hypothesis],
    metric: Metric,
    eps_prime: Fraction,
    reveals: Sequence[Point],
    moves: Sequence[Move],
) -> Hypothesis:
    """Among candidates consistent with the reveals, pick the hypothesis
    that leaves the generator the shortest clean suffix (most errors on
    ties).  This realizes the existential step of the impossibility
    arguments: the adversary commits whichever consistent target makes
    the emitted points wrong."""
    consistent = [
        h for h in candidates if all(h.support.contains(x) for x in reveals)
    ]
    if not consistent:
        raise GenlabError("no candidate hypothesis is consistent with the reveals")
    novel_flags = []
    for i, mv in enumerate(moves):
        if isinstance(mv, Emit):
            novel_flags.append(
                not in_set_ball(metric, reveals[: i + 1], eps_prime, mv.point)
            )
        else:
            novel_flags.append(None)

    def score(h: Hypothesis):
        ok = []
        errors = 0
        for mv, novel in zip(moves, novel_flags):
            if isinstance(mv, Emit):
                passed = bool(novel) and h.support.contains(mv.point)
                ok.append(passed)
                errors += 0 if passed else 1
            else:
                ok.append(None)
        suffix = 0
        for v in reversed(ok):
            if v:
                suffix += 1
            else:
                break
        return (suffix, -errors)

    return min(consistent, key=lambda h: (score(h), h.id))


class DeferredEnumerationTrap(Adversary):
    """Reveals a base sequence lying in every candidate support and
    commits the worst consistent candidate at the horizon."""

    def __init__(self, base: Sequence[Point], candidates: Sequence[Hypothesis],
                 metric: Metric, eps_prime):
        if not base:
            raise ValueError("trap base must be nonempty")
        self.base = list(base)
        self.candidates = list(candidates)
        self.metric = metric
        self.eps_prime = as_fraction(eps_prime)
        self.name = "deferred_trap"

    def reveal(self, t: int, gen_moves: Sequence[Move]) -> Point:
        return self.base[(t - 1) % len(self.base)]

    def finalize(self, reveals, moves) -> Hypothesis:
        return pick_worst_commitment(
            self.candidates, self.metric, self.eps_prime, reveals, moves
        )


class SubsequenceTrapAdversary(Adversary):
    """Inductive subsequence trap: replay a fixed prefix of the base
    sequence, then keep revealing the least-index base point outside the
    closed eps'-balls around everything already revealed and everything
    the generator has produced.  Commitment is deferred to a builder
    over the picked points."""

    def __init__(self, base: Callable[[int], Point], prefix_m: int, metric: Metric,
                 eps_prime, builder: Callable[[Sequence[Point]], Hypothesis],
                 base_budget: int = 10_000):
        self.base = base
        self.prefix_m = prefix_m
        self.metric = metric
        self.eps_prime = as_fraction(eps_prime)
        self.builder = builder
        self.base_budget = base_budget
        self.picks: list[Point] = []
        self.cursor = 0
        self.name = f"subseq_trap(m={prefix_m})"

    def reveal(self, t: int, gen_moves: Sequence[Move]) -> Point:
        if t <= self.prefix_m:
            p = self.base(t - 1)
            self.picks.append(p)
            self.cursor = t
            return p
        emitted = [mv.point for mv in gen_moves if isinstance(mv, Emit)]
        dodge = self.picks + emitted
        while self.cursor < self.base_budget:
            q = self.base(self.cursor)
            self.cursor += 1
            if not in_set_ball(self.metric, dodge, self.eps_prime, q):
                self.picks.append(q)
                return q
        raise BaseExhausted(f"no admissible base point within {self.base_budget}")

    def finalize(self, reveals, moves) -> Hypothesis:
        return self.builder(tuple(self.picks))


class StagedTrapAdversary(Adversary):
    """Stage trap: reveal the anchor points, then per stage reveal the
    stage opener followed by that stage's row until the generator's
    latest output lands in the stage's protected set, then advance."""

    def __init__(
        self,
        anchors: Sequence[Point],
        opener: Callable[[int], Point],
        row: Callable[[int, int], Point],
        protected: Callable[[int, Point], bool],
        builder: Callable[["StagedTrapAdversary", Sequence[Point], Sequence[Move]], Hypothesis],
        per_stage_budget: int = 10_000,
    ):
        self.anchors = list(anchors)
        self.opener = opener
        self.row = row
        self.protected = protected
        self.builder = builder
        self.per_stage_budget = per_stage_budget
        self.stage = 1
        self.row_pos = 0  # 0 = opener still pending
        self.row_consumed: dict[int, int] = {}
        self.stalled = False
        self.name = "staged_trap"

    def reveal(self, t: int, gen_moves: Sequence[Move]) -> Point:
        if t <= len(self.anchors):
            return self.anchors[t - 1]
        last = gen_moves[-1] if gen_moves else None
        if (
            self.row_pos > 0
            and isinstance(last, Emit)
            and self.protected(self.stage, last.point)
        ):
            self.stage += 1
            self.row_pos = 0
        if self.row_pos == 0:
            self.row_pos = 1
            return self.opener(self.stage)
        j = self.row_pos
        self.row_pos += 1
        self.row_consumed[self.stage] = j
        if j > self.per_stage_budget:
            self.stalled = True
        return self.row(self.stage, j)

    def finalize(self, reveals, moves) -> Hypothesis:
        return self.builder(self, reveals, moves)


# ---------------------------------------------------------------------------
# player references ("gen:uniform d_star=2", "adv:staged_trap eps=1")


def parse_player_ref(text: str) -> tuple[str, dict[str, str]]:
    parts = text.split()
    if not parts:
        raise GenlabError("empty player reference")
    name = parts[0]
    params = {}
    for p in parts[1:]:
        if "=" not in p:
            raise GenlabError(f"bad player parameter {p!r}")
        k, v = p.split("=", 1)
        params[k] = v
    return name, params
