"""Fixture-level checks: intensional oracles certified against explicit
member instantiations, witness geometry, boundary semantics, and the
countable embedding."""

import random
from fractions import Fraction as Q

import pytest

from genlab.metric import (
    DiscreteMetric,
        GenlabError,
        in_ball,
    real,
)
from genlab.hypotheses import (
    UusSatisfied,
    UusUnknown,
    UusViolated,
    closure_contains,
    closure_via_erm,
    uus_check,
    verify_witness,
)
from genlab.fixtures import get_fixture_module, fixture_names, no_valid_move_scan


def _cross_check_oracles(cls, member, rng, n_queries=200, sample_size=5,
                         truncation=()):
    """Certify the intensional closure both ways: positive answers must
    hold on every consistent member of the explicit truncation (the
    sampled member included), and negative answers must come with a
    concrete consistent member omitting the point."""
    universe = cls.enumerate_points(160)
    support_pts = member.support.enumerate_points(80)
    for _ in range(n_queries):
        sample = rng.sample(support_pts, min(sample_size, len(support_pts)))
        assert cls.version_space_nonempty(sample)
        p = rng.choice(universe)
        ans = closure_contains(cls, sample, p)
        assert ans in (True, False)
        # the ERM route agrees
        assert closure_via_erm(cls, sample, p) == ans
        if ans:
            # forced points lie in every consistent support: the member
            # the sample came from and the whole explicit truncation
            assert member.support.contains(p)
            for h in truncation:
                if all(h.support.contains(x) for x in sample):
                    assert h.support.contains(p)
            assert cls.exclusion_witness(sample, p) is None
        else:
            w = cls.exclusion_witness(sample, p)
            assert w is not None, f"no exclusion witness for {p}"
            assert all(w.support.contains(x) for x in sample)
            assert not w.support.contains(p)
        # extensivity
        for x in sample:
            assert closure_contains(cls, sample, x) is True


@pytest.mark.parametrize("name", ["l2_case1", "l2_case2", "weighted_metric"])
def test_intensional_oracles_certified(name):
    import zlib

    mod = get_fixture_module(name)
    bundle = mod.build()
    truncation = mod.cli_member_pool(bundle)
    for seed_shift in range(3):
        rng = random.Random(zlib.crc32(name.encode()) + seed_shift)
        for member in truncation[:2]:
            _cross_check_oracles(bundle.cls, member, rng, n_queries=120,
                                 truncation=truncation)


def test_prime_reals_oracles():
    mod = get_fixture_module("prime_reals")
    bundle = mod.build()
    rng = random.Random(23)
    member = mod.cli_member_pool(bundle)[-1]  # tower 3 with explicit evens
    _cross_check_oracles(bundle.cls, member, rng, n_queries=150)


def test_two_hypotheses_brute_oracles():
    mod = get_fixture_module("two_hypotheses")
    bundle = mod.build()
    cls = bundle.cls
    rng = random.Random(7)
    member = cls.members()[0]
    _cross_check_oracles(cls, member, rng, n_queries=120, sample_size=4)


def test_uus_witness_geometry():
    # the wide families of both l2 fixtures separate beyond the ball
    # diameter at r and the witnesses verify
    for name in ("l2_case1", "l2_case2"):
        bundle = get_fixture_module(name).build()
        res = uus_check(bundle.cls, bundle.metric, bundle.params["r"])
        assert isinstance(res, UusSatisfied)
        for _, w in res.witnesses:
            assert verify_witness(bundle.metric, w)
            assert w.separation > 2 * w.radius
    # prime towers: every member contains one of the witnessed towers
    bundle = get_fixture_module("prime_reals").build()
    res = uus_check(bundle.cls, bundle.metric, Q(1))
    assert isinstance(res, UusSatisfied) and len(res.witnesses) == 5


def test_uus_honesty_at_closed_ball_boundaries():
    # two_hypotheses: a single closed r-ball covers each support
    bundle = get_fixture_module("two_hypotheses").build()
    res = uus_check(bundle.cls, bundle.metric, bundle.params["r"])
    assert isinstance(res, UusViolated)
    # below half the wide-family separation a witness exists again
    res2 = uus_check(bundle.cls, bundle.metric, Q(49, 100))
    assert isinstance(res2, UusSatisfied)
    # weighted fixture: scale-1 separation is exactly 1, so no witness
    # at tau >= 1/2
    wb = get_fixture_module("weighted_metric").build()
    assert isinstance(uus_check(wb.cls, wb.metric, Q(3, 5)), UusUnknown)
    assert isinstance(uus_check(wb.cls, wb.metric, Q(2, 5)), UusSatisfied)


def test_shared_family_closure_enumeration():
    # one shared-family reveal forces the whole family, enumerated in
    # index order
    from genlab.hypotheses import closure_enumerate

    bundle = get_fixture_module("two_hypotheses").build()
    a = bundle.cls.shared
    got = closure_enumerate(bundle.cls, [a.point(1)], 2)
    assert got == [a.point(1), a.point(2)]


def test_nonuniform_ladder_on_countable_enumeration():
    # nested ladder from an enumeration of a countable class: once deep
    # enough, emissions land in the committed support (checked by brute
    # membership)
    from genlab.hypotheses import ExplicitClass, Hypothesis, LatticeSupport
    from genlab.metric import AbsMetric
    from genlab.players import Emit, NonUniformGenerator

    hs = [Hypothesis(f"m{k}", LatticeSupport.of(0, k)) for k in (2, 3, 5)]
    ladder = [
        (ExplicitClass(hs[: n + 1], name=f"lvl{n}"), 1) for n in range(len(hs))
    ]
    gen = NonUniformGenerator(ladder, AbsMetric(), Q(2, 5), Q(2, 5))
    target = hs[2]  # multiples of 5, only present in the top level
    seen = []
    emitted = []
    for v in (0, 5, -5, 10, -10, 15):
        seen.append(real(v))
        mv = gen.move(seen)
        if isinstance(mv, Emit):
            emitted.append(mv.point)
    assert emitted and all(target.support.contains(p) for p in emitted[2:])


def test_uus_witnesses_transfer_to_smaller_scales():
    # Satisfied at r stays Satisfied at sampled smaller scales
    for name in ("l2_case1", "l2_case2"):
        bundle = get_fixture_module(name).build()
        r = bundle.params["r"]
        for delta in (r / 2, r / 3, r * Q(9, 10)):
            assert isinstance(
                uus_check(bundle.cls, bundle.metric, delta), UusSatisfied
            )


def test_obligated_reveals_hit_adversary_points():
    # at gamma below the a-point separation, covering the support forces
    # every a-point to appear among the reveals
    from genlab.fixtures.l2_case1 import member_pool
    from genlab.game import GameConfig, Upfront, check_cover_obligation, run_game
    from genlab.players import EnumerationAdversary, ScriptedGenerator

    bundle = get_fixture_module("l2_case1").build()
    cls = bundle.cls
    h = member_pool(cls.scales)[0]
    cfg = GameConfig(eps=Q(2, 5), eps_prime=Q(2, 5), r=Q(1), horizon=48, seed=1)
    adv = EnumerationAdversary(h, horizon=48, seed=1)
    tr = run_game(cfg, cls, bundle.metric, adv, ScriptedGenerator([]), Upfront(h))
    assert check_cover_obligation(tr, h, Q(2, 5), truncation_budget=48)
    classified = [cls.scales.classify(p) for p in tr.reveals()]
    assert any(c is not None and c[0] == "a" for c in classified)


def test_fixture_boundary_pairs_in_closed_balls():
    from genlab.fixtures.two_hypotheses import build as build_th
    from genlab.fixtures.weighted import apoint, build as build_w

    th = build_th()
    a = th.cls.shared
    assert in_ball(th.metric, a.point(1), th.params["eps_prime"], a.point(7))
    w = build_w()
    rho_w = w.alt_metrics["weighted"]
    assert in_ball(rho_w, apoint(2, 6), Q(1, 4), apoint(2, 12))
    # prime fixture: adjacent integers on the closed 1-ball boundary
    assert in_ball(get_fixture_module("prime_reals").build().metric,
                   real(26), Q(1), real(27))


def test_fixture_guards():
    from genlab.fixtures.two_hypotheses import build as build_th
    from genlab.fixtures.l2_case2 import build as build_c2

    with pytest.raises(GenlabError):
        build_th(eps=Q(6, 10), eps_prime=Q(6, 10))  # needs eps < eps'
    with pytest.raises(GenlabError):
        build_c2(eps1=Q(6, 10), eps2=Q(3, 10))  # needs eps1 <= eps2
    with pytest.raises(GenlabError):
        build_c2(eps1=Q(1, 2), eps2=Q(1, 2), eps_prime=Q(1, 2))  # scale collision


def test_no_valid_move_scan_positive_control():
    # sanity: the scanner does find moves when they exist
    bundle = get_fixture_module("l2_case1").build()
    scales = bundle.cls.scales
    found = no_valid_move_scan(bundle.cls, bundle.metric,
                               [scales.a(2)], Q(2, 5), 200)
    assert found is not None


def test_fixture_registry_surface():
    assert fixture_names() == [
        "l2_case1", "l2_case2", "prime_reals", "two_hypotheses", "weighted_metric",
    ]
    with pytest.raises(KeyError):
        get_fixture_module("nope")


# --- countable embedding ---------------------------------------------------


def test_embedding_rejects_finite_sources():
    from genlab.fixtures.countable import (
        CountableHypothesis,
        atom_embedding,
        embed_countable_class,
    )

    with pytest.raises(GenlabError):
        embed_countable_class(
            [CountableHypothesis("tiny", frozenset({1, 2}))], atom_embedding()
        )


def test_embedding_preserves_play_across_target_spaces():
    """The same countable class embedded into atoms (discrete metric) and
    into spaced reals (abs metric) produces index-identical transcripts."""
    from genlab.fixtures.countable import (
        CountableHypothesis,
        IntProgression,
        atom_embedding,
        embed_countable_class,
        spaced_real_embedding,
    )
    from genlab.game import GameConfig, Upfront, judge_limit, run_game, verdict_kind
    from genlab.metric import AbsMetric
    from genlab.players import EnumerationAdversary, UniformGenerator

    source = [
        CountableHypothesis("evens", IntProgression(0, 2)),
        CountableHypothesis("mult3", IntProgression(0, 3)),
    ]
    results = []
    for emb, metric in [
        (atom_embedding(Q(1, 2)), DiscreteMetric()),
        (spaced_real_embedding(Q(2), Q(1, 2)), AbsMetric()),
    ]:
        cls = embed_countable_class(source, emb)
        h = cls.members()[0]
        cfg = GameConfig(eps=Q(1, 2), eps_prime=Q(1, 2), r=Q(1, 2), horizon=12,
                         seed=9, uus_override=True)
        adv = EnumerationAdversary(h, horizon=12, seed=9)
        gen = UniformGenerator(cls, metric, cfg.eps, cfg.eps_prime, d_star=1)
        tr = run_game(cfg, cls, metric, adv, gen, Upfront(h))
        rounds = [
            (
                emb.from_point(r.revealed),
                emb.from_point(r.move.point) if r.scored else None,
                r.member_ok,
                r.novel_ok,
                r.cover,
            )
            for r in tr.rounds
        ]
        results.append((rounds, verdict_kind(judge_limit(tr))))
    assert results[0] == results[1]
