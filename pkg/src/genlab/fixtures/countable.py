"""Embedding countable-model classes into metric instance spaces.

A countable-model class lives on nonnegative integer indices with
distinctness novelty.  The embedding sends index j to a point x_j of an
r-separated family; closed eps-balls then isolate single indices, and
the metric game reduces to the distinctness game.

Index supports are one-sided arithmetic progressions (with optional
finite extras), so membership, intersection and enumeration stay exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Optional, Sequence

from ..numbers import Q, as_fraction
from ..metric import (
    Atom,
    CoverResult,
    DiscreteMetric,
    GenlabError,
    InfiniteCover,
    Metric,
    Point,
    SeparationWitness,
    UnknownCover,
)
from ..hypotheses import (
    ExplicitClass,
    Hypothesis,
    Support,
    )
from . import FixtureBundle


@dataclass(frozen=True)
class IntProgression:
    """{offset + step*k : k >= 0} with a few explicit extras."""

    offset: int
    step: int
    extras: frozenset[int] = frozenset()

    def __post_init__(self):
        if self.step <= 0 or self.offset < 0:
            raise ValueError("need step > 0 and offset >= 0")

    def _on_progression(self, j: int) -> bool:
        return j >= self.offset and (j - self.offset) % self.step == 0

    def contains(self, j: int) -> bool:
        return j in self.extras or self._on_progression(j)

    def iterate(self) -> Iterator[int]:
        extras = sorted(e for e in self.extras if not self._on_progression(e))
        e = 0
        v = self.offset
        while True:
            while e < len(extras) and extras[e] < v:
                yield extras[e]
                e += 1
            yield v
            v += self.step


@dataclass(frozen=True)
class CountableHypothesis:
    id: str
    indices: IntProgression | frozenset  # frozenset = finite support


@dataclass(frozen=True)
class EmbeddingSpec:
    """j -> x_j into an r-separated family, with the inverse map."""

    name: str
    to_point: Callable[[int], Point]
    from_point: Callable[[Point], Optional[int]]
    separation: Fraction
    r: Fraction

    def witness(self, radius: Fraction) -> Optional[SeparationWitness]:
        if self.separation > 2 * radius:
            return SeparationWitness(
                family=f"embedding family {self.name}",
                sample=tuple(self.to_point(j) for j in range(12)),
                separation=self.separation,
                radius=radius,
            )
        return None


def atom_embedding(r=Q(1, 2)) -> EmbeddingSpec:
    """Discrete-metric embedding: j -> Atom(j), separation exactly 1."""
    return EmbeddingSpec(
        name="atoms",
        to_point=lambda j: Atom(j),
        from_point=lambda p: p.id if isinstance(p, Atom) else None,
        separation=Q(1),
        r=as_fraction(r),
    )


def spaced_real_embedding(spacing=Q(2), r=Q(1, 2)) -> EmbeddingSpec:
    from ..metric import Real, real

    s = as_fraction(spacing)
    if not s > 2 * as_fraction(r):
        raise GenlabError("spacing must exceed 2r for an r-separated family")

    def from_point(p: Point) -> Optional[int]:
        if isinstance(p, Real) and p.value >= 0 and p.value % s == 0:
            return int(p.value / s)
        return None

    return EmbeddingSpec(
        name=f"reals spaced {s}",
        to_point=lambda j: real(s * j),
        from_point=from_point,
        separation=s,
        r=as_fraction(r),
    )


@dataclass(frozen=True)
class EmbeddedSupport(Support):
    indices: IntProgression
    embedding: EmbeddingSpec

    def contains(self, p: Point) -> bool:
        j = self.embedding.from_point(p)
        return j is not None and self.indices.contains(j)

    def stream(self) -> Iterator[Point]:
        return (self.embedding.to_point(j) for j in self.indices.iterate())

    def cover_number(self, metric: Metric, radius) -> CoverResult:
        rad = as_fraction(radius)
        w = self.embedding.witness(rad)
        if w is not None:
            return InfiniteCover(
                SeparationWitness(w.family, tuple(self.enumerate_points(12)),
                                  w.separation, rad)
            )
        return UnknownCover(1, 64)


def embed_countable_class(
    hypotheses: Sequence[CountableHypothesis], embedding: EmbeddingSpec
) -> ExplicitClass:
    """Lift a countable-model class along the embedding.  Each source
    support must be infinite (the distinctness game's unbounded-support
    assumption); membership reduces to index membership."""
    embedded = []
    for h in hypotheses:
        if not isinstance(h.indices, IntProgression):
            raise GenlabError(
                f"source hypothesis {h.id!r} has a finite support; the "
                "distinctness game needs unbounded supports"
            )
        embedded.append(Hypothesis(h.id, EmbeddedSupport(h.indices, embedding)))
    return ExplicitClass(embedded, name=f"embedded[{embedding.name}]")


def build(r=Q(1, 2)) -> FixtureBundle:
    hs = [
        CountableHypothesis("evens", IntProgression(0, 2)),
        CountableHypothesis("mult3", IntProgression(0, 3)),
    ]
    emb = atom_embedding(r)
    return FixtureBundle(
        name="discrete_embedding",
        cls=embed_countable_class(hs, emb),
        metric=DiscreteMetric(),
        params={"r": as_fraction(r)},
        notes="at r = 1/2 the family separation equals exactly 2r, so no "
        "packing witness exists and games run with uus_override",
    )
