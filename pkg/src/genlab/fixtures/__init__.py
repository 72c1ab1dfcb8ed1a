"""Executable fixtures: each named construction bundled with the
players that drive it and an expected-regimes table the verify command
(and the acceptance suite) replays."""

from __future__ import annotations

import importlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from ..metric import Metric, Point, in_set_ball
from ..hypotheses import HypothesisClass, closure_contains


@dataclass
class RegimeRow:
    fixture: str
    label: str
    expected: str
    passed: bool
    detail: str = ""


@dataclass
class FixtureBundle:
    name: str
    cls: HypothesisClass
    metric: Metric
    params: dict
    notes: str = ""
    alt_metrics: dict = field(default_factory=dict)


def no_valid_move_scan(
    cls: HypothesisClass,
    metric: Metric,
    seen: Sequence[Point],
    eps_prime,
    budget: int,
) -> Optional[Point]:
    """Exhaustively scan the canonical candidate enumeration for a point
    that is both forced (in the closure of the reveals) and novel at
    eps'.  Returns the first such point, or None when no legal move
    exists within the budget."""
    for y in cls.enumerate_points(budget):
        if closure_contains(cls, seen, y) is True and not in_set_ball(
            metric, seen, eps_prime, y
        ):
            return y
    return None


_FIXTURE_MODULES = {
    "prime_reals": "genlab.fixtures.prime_reals",
    "two_hypotheses": "genlab.fixtures.two_hypotheses",
    "l2_case1": "genlab.fixtures.l2_case1",
    "l2_case2": "genlab.fixtures.l2_case2",
    "weighted_metric": "genlab.fixtures.weighted",
}


def fixture_names() -> list[str]:
    return sorted(_FIXTURE_MODULES)


def get_fixture_module(name: str):
    if name not in _FIXTURE_MODULES:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(fixture_names())}")
    return importlib.import_module(_FIXTURE_MODULES[name])
