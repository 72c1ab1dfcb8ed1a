#!/usr/bin/env python3
"""Replay every fixture's expected-regime table and print a summary.

Equivalent to `genlab verify all`, with wall-clock timings per fixture.
"""

import sys
import time

sys.path.insert(0, "src")

from genlab.fixtures import fixture_names, get_fixture_module  # noqa: E402


def main() -> int:
    failures = 0
    for name in fixture_names():
        mod = get_fixture_module(name)
        t0 = time.monotonic()
        rows = mod.run_regimes()
        dt = time.monotonic() - t0
        print(f"== {name} ({dt:.1f}s)")
        for row in rows:
            mark = "pass" if row.passed else "FAIL"
            print(f"  [{mark}] {row.label}  (expected: {row.expected})")
            if row.detail:
                print(f"         {row.detail}")
            failures += 0 if row.passed else 1
    print(f"\n{failures} failing regime rows")
    return 0 if failures == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
