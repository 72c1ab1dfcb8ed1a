"""Two-hypothesis l2 fixture: both supports share an equidistant basis
family (the a-points, pairwise distance exactly eps'), and differ on a
second family at pairwise distance r split by index parity.

The shared family makes the closure of any a-sample a single closed
eps'-ball, while its eps-cover grows one per point, so the brute-force
dimension lower bound climbs without limit.  The bundled adversary just
enumerates the shared family and defers commitment: at the horizon it
picks whichever member leaves the generator the shortest clean suffix.

Note the closed-ball boundary effects at these scales: the a-family
separation equals exactly 2*eps and the g-family separation equals
exactly r, so neither packs strictly beyond the relevant diameters, and
a single closed r-ball centered on any a-point covers the entire
support.  Games at r therefore run with the UUS gate overridden.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from ..numbers import Q, Root2, as_fraction
from ..metric import (
    CoverResult,
    EuclideanMetric,
    FiniteCover,
    GenlabError,
    InfiniteCover,
    Metric,
    Point,
    SeparationWitness,
    UnknownCover,
)
from ..hypotheses import (
    BasisFamily,
    ExplicitClass,
    Hypothesis,
    IndexAll,
    IndexEvens,
    IndexOdds,
    Support,
    UnionSupport,
    rational_separation,
)
from ..players import DeferredEnumerationTrap, Generator
from . import FixtureBundle, RegimeRow


@dataclass(frozen=True)
class SharedPlusParity(Support):
    """a-family (shared) union one parity half of the g-family."""

    a: BasisFamily
    g: BasisFamily

    def _union(self) -> UnionSupport:
        return UnionSupport((self.a, self.g))

    def contains(self, p: Point) -> bool:
        return self.a.contains(p) or self.g.contains(p)

    def stream(self):
        return self._union().stream()

    def cover_number(self, metric: Metric, radius) -> CoverResult:
        if not isinstance(metric, EuclideanMetric):
            return super().cover_number(metric, radius)
        r = as_fraction(radius)
        r2 = Root2(r * r)
        # squared distance between an a-point and a g-point on distinct indices
        sq_mixed = (
            self.a.point(1).coords[0][1].value().square()
            + self.g.point(2).coords[0][1].value().square()
        )
        if (sq_mixed - r2).sign() <= 0:
            # one closed ball centered at any a-point covers everything
            return FiniteCover(1)
        for fam in (self.g, self.a):
            sep = rational_separation(fam.sq_pairwise(), r)
            if sep is not None:
                return InfiniteCover(
                    SeparationWitness(
                        family=f"parity family scale={fam.scale}",
                        sample=tuple(fam.enumerate_points(12)),
                        separation=sep,
                        radius=r,
                    )
                )
        return UnknownCover(1, 64)


class TwoHypothesesClass(ExplicitClass):
    """Explicit two-member class with the analytic closure shortcut."""

    def __init__(self, h1: Hypothesis, h2: Hypothesis, shared: BasisFamily):
        super().__init__([h1, h2], name="two_hypotheses")
        self.shared = shared

    def closure(self, sample: Sequence[Point]) -> Optional[Support]:
        vs = self.version_space(sample)
        if not vs:
            return None
        if len(vs) == 2:
            return self.shared
        return vs[0].support

    def intersection(self, combo) -> Support:
        if len(combo) == 2:
            return self.shared
        return combo[0].support


def build(eps=Q(3, 10), eps_prime=Q(6, 10), r=Q(1)) -> FixtureBundle:
    eps, eps_prime, r = as_fraction(eps), as_fraction(eps_prime), as_fraction(r)
    if not (eps < eps_prime <= r):
        raise GenlabError("two_hypotheses needs eps < eps' <= r")
    a = BasisFamily(eps_prime, True, IndexAll(1))
    g_even = BasisFamily(r, True, IndexEvens(2))
    g_odd = BasisFamily(r, True, IndexOdds(1))
    h1 = Hypothesis("even_tail", SharedPlusParity(a, g_even))
    h2 = Hypothesis("odd_tail", SharedPlusParity(a, g_odd))
    cls = TwoHypothesesClass(h1, h2, a)
    return FixtureBundle(
        name="two_hypotheses",
        cls=cls,
        metric=EuclideanMetric(),
        params={"eps": eps, "eps_prime": eps_prime, "r": r},
        notes="games at r run with uus_override: a closed r-ball at any "
        "shared point covers each support entirely",
    )


def trap(bundle: FixtureBundle, horizon: int) -> DeferredEnumerationTrap:
    cls: TwoHypothesesClass = bundle.cls
    base = cls.shared.enumerate_points(horizon)
    return DeferredEnumerationTrap(
        base, list(cls.members()), bundle.metric, bundle.params["eps_prime"]
    )


def registered_generators(bundle: FixtureBundle, dim_budget: int = 8):
    """The generic strategies bundled with this fixture, instantiated at
    budget-derived thresholds (the true dimension is unbounded)."""
    from ..players import (
        ErmSearchGenerator,
        LimitGenerator,
        NonUniformGenerator,
        UniformGenerator,
    )

    cls: TwoHypothesesClass = bundle.cls
    metric = bundle.metric
    eps, ep = bundle.params["eps"], bundle.params["eps_prime"]
    h1, h2 = cls.members()
    singles = [ExplicitClass([h1], name="h1"), ExplicitClass([h2], name="h2")]
    pair = ExplicitClass([h1, h2], name="pair")
    return [
        UniformGenerator(cls, metric, eps, ep, d_star=dim_budget + 1),
        NonUniformGenerator(
            [(singles[0], dim_budget + 1), (pair, dim_budget + 1)], metric, eps, ep
        ),
        LimitGenerator(singles, metric, eps, ep, c=dim_budget),
        ErmSearchGenerator(cls, metric, ep, cls.enumerate_points),
    ]


def run_regimes(horizon: int = 40, dim_budget: int = 8, sink=None) -> list[RegimeRow]:
    from ..game import Deferred, GameConfig, judge_limit, run_game
    from ..hypotheses import DimLowerBound, closure_dimension_bruteforce
    from ..metric import Ordering, dist_cmp

    bundle = build()
    cls, metric = bundle.cls, bundle.metric
    eps, ep, r = bundle.params["eps"], bundle.params["eps_prime"], bundle.params["r"]
    rows: list[RegimeRow] = []

    # exact boundary geometry: shared points pairwise at distance eps'
    a = cls.shared
    boundary_ok = all(
        dist_cmp(metric, a.point(i), a.point(j), ep) is Ordering.EQUAL
        for i, j in [(1, 2), (2, 5), (3, 4)]
    )
    rows.append(RegimeRow("two_hypotheses", "shared family pairwise = eps'",
                          "dist_cmp Equal", boundary_ok))

    # brute-force dimension lower bound reaches every d <= dim_budget
    ground = a.enumerate_points(dim_budget) + [
        cls.members()[0].support.g.point(k) for k in (2, 4)
    ] + [cls.members()[1].support.g.point(k) for k in (1, 3)]
    dim = closure_dimension_bruteforce(cls, metric, eps, ep, ground, dim_budget)
    dim_ok = (
        isinstance(dim, DimLowerBound)
        and set(range(1, dim_budget + 1)) <= set(dim.achieved)
    )
    rows.append(RegimeRow("two_hypotheses", f"dimension lower bound to {dim_budget}",
                          f"achieved 1..{dim_budget}", dim_ok, f"{sorted(dim.achieved)}"))

    # the deferred trap defeats every registered generator
    cfg = GameConfig(eps=eps, eps_prime=ep, r=r, horizon=horizon, uus_override=True)
    ok = True
    details = []
    for gen in registered_generators(bundle, dim_budget):
        tr = run_game(cfg, cls, metric, trap(bundle, horizon), gen, Deferred())
        if sink is not None:
            sink.append(tr)
        suffix = tr.clean_suffix_length()
        if suffix > horizon // 2:
            ok = False
        details.append(f"{gen.name}: suffix {suffix}, {type(judge_limit(tr)).__name__}")
    rows.append(RegimeRow("two_hypotheses", "deferred trap defeats all generators",
                          f"clean suffix <= {horizon // 2}", ok, "; ".join(details)))
    return rows


# ---------------------------------------------------------------------------
# CLI surface


def cli_generator(bundle: FixtureBundle, metric, config, params):
    from ..players import UniformGenerator

    d_star = int(params.get("d_star", 9))
    return UniformGenerator(bundle.cls, metric, config.eps, config.eps_prime,
                            d_star=d_star, budget=config.enum_budget)


def cli_adversary(bundle: FixtureBundle, metric, kind, config, seed, params):
    from ..game import Deferred

    return trap(bundle, config.horizon), Deferred()


def cli_member_pool(bundle: FixtureBundle):
    return list(bundle.cls.members())
