"""Name-based player resolution for the command line.

References look like `gen:uniform d_star=2` or
`adv:staged_trap seed=1`; generic strategies resolve against any class,
fixture-flavored ones against the named fixture bundle.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .metric import GenlabError, Metric
from .hypotheses import HypothesisClass, Hypothesis
from .players import (
        EnumerationAdversary,
    ErmSearchGenerator,
    Generator,
    LimitGenerator,
    UniformGenerator,
    parse_player_ref,
)


def resolve_generator(ref: str, cls: HypothesisClass, metric: Metric, config,
                      bundle=None) -> Generator:
    name, params = parse_player_ref(ref)
    if not name.startswith("gen:"):
        raise GenlabError(f"generator references start with 'gen:', got {ref!r}")
    kind = name[4:]
    budget = int(params.get("budget", config.enum_budget))
    if kind == "uniform":
        d_star = int(params.get("d_star", 1))
        return UniformGenerator(cls, metric, config.eps, config.eps_prime,
                                d_star=d_star, budget=budget)
    if kind == "erm":
        return ErmSearchGenerator(cls, metric, config.eps_prime,
                                  cls.enumerate_points, budget=budget)
    if kind == "limit":
        c = int(params.get("c", 1))
        return LimitGenerator([cls], metric, config.eps, config.eps_prime, c=c,
                              enum_budget=budget, scan_budget=config.scan_budget)
    if kind == "fixture":
        if bundle is None:
            raise GenlabError("gen:fixture needs a fixture context")
        from .fixtures import get_fixture_module

        mod = get_fixture_module(bundle.name)
        return mod.cli_generator(bundle, metric, config, params)
    raise GenlabError(f"unknown generator kind {kind!r}")


def resolve_adversary(ref: str, cls: HypothesisClass, metric: Metric, config,
                      bundle=None):
    """Returns (adversary, commit policy)."""
    from .game import Deferred, Upfront

    name, params = parse_player_ref(ref)
    if not name.startswith("adv:"):
        raise GenlabError(f"adversary references start with 'adv:', got {ref!r}")
    kind = name[4:]
    seed = int(params.get("seed", config.seed))
    if kind == "enumeration":
        h = _pick_member(cls, bundle, params.get("member"))
        adv = EnumerationAdversary(h, horizon=config.horizon, seed=seed)
        return adv, Upfront(h)
    if kind in ("trap", "staged_trap"):
        if bundle is None:
            raise GenlabError(f"adv:{kind} needs a fixture context")
        from .fixtures import get_fixture_module

        mod = get_fixture_module(bundle.name)
        return mod.cli_adversary(bundle, metric, kind, config, seed, params)
    raise GenlabError(f"unknown adversary kind {kind!r}")


def _pick_member(cls: HypothesisClass, bundle, key: Optional[str]) -> Hypothesis:
    members = cls.members()
    if members is None:
        if bundle is None:
            raise GenlabError("an intensional class needs a fixture member pool")
        from .fixtures import get_fixture_module

        pool = get_fixture_module(bundle.name).cli_member_pool(bundle)
        if key is None:
            return pool[0]
        for h in pool:
            if h.id == key:
                return h
        try:
            return pool[int(key)]
        except (ValueError, IndexError):
            raise GenlabError(f"no member {key!r}; pool: {[h.id for h in pool]}")
    if key is None:
        return members[0]
    for h in members:
        if h.id == key:
            return h
    raise GenlabError(f"no member {key!r}; members: {[h.id for h in members]}")
