#!/usr/bin/env python3
"""Sweep the game scales (gamma, gamma') over a grid for one fixture and
print the limit-judge verdict per cell.

Usage: python3 scripts/scale_sweep.py [fixture] [horizon]

Gives a quick empirical picture of how the verdict map changes with the
novelty parameters (against the fixture's bundled obligated adversary
and flagship generator).
"""

import sys
from fractions import Fraction as Q

sys.path.insert(0, "src")

from genlab.fixtures import get_fixture_module  # noqa: E402
from genlab.game import GameConfig, Upfront, judge_limit, run_game, verdict_kind  # noqa: E402
from genlab.players import EnumerationAdversary  # noqa: E402

GRID = [Q(1, 5), Q(3, 10), Q(2, 5), Q(1, 2), Q(7, 10)]
SHORT = {"eventually_correct": "EC", "fails_within_horizon": "FAIL",
         "inconclusive": "??"}


def main() -> int:
    name = sys.argv[1] if len(sys.argv) > 1 else "l2_case1"
    horizon = int(sys.argv[2]) if len(sys.argv) > 2 else 60
    mod = get_fixture_module(name)
    bundle = mod.build()
    cls, metric = bundle.cls, bundle.metric
    h = mod.cli_member_pool(bundle)[0]
    print(f"fixture {name}, member {h.id}, horizon {horizon}")
    print("gamma \\ gamma'   " + "  ".join(f"{g!s:>6}" for g in GRID))
    for gamma in GRID:
        cells = []
        for gp in GRID:
            cfg = GameConfig(eps=gamma, eps_prime=gp, r=Q(1), horizon=horizon,
                             seed=0, uus_override=True)
            adv = EnumerationAdversary(h, horizon=horizon, seed=0)
            gen = mod.cli_generator(bundle, metric, cfg, {})
            tr = run_game(cfg, cls, metric, adv, gen, Upfront(h))
            cells.append(SHORT[verdict_kind(judge_limit(tr))])
        print(f"{gamma!s:>14}   " + "  ".join(f"{c:>6}" for c in cells))
    return 0


if __name__ == "__main__":
    sys.exit(main())
