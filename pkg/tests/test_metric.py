import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, strategies as st

from genlab.numbers import Root2
from genlab.metric import (
    AbsMetric,
        Coord,
    DiscreteMetric,
    EuclideanMetric,
    ORIGIN,
    Ordering,
    ParseError,
    SeparationWitness,
    SparseVec,
    VariantMismatch,
    WeightedL2Metric,
    atom,
    basis_point,
    dist_cmp,
    format_metric,
    format_point,
    in_ball,
    in_set_ball,
    parse_metric,
    parse_point,
    parse_points_file,
    real,
    sort_points,
    verify_witness,
)

EPS_PRIME = Q(6, 10)
R = Q(1)


def a_pt(k):  # shared-family point at scale eps', sqrt(2)/2 factor
    return basis_point(k, EPS_PRIME, half=True)


def g_pt(k):
    return basis_point(k, R, half=True)


def test_dist_cmp_real_line():
    assert dist_cmp(AbsMetric(), real(0), real(3), 1) is Ordering.GREATER
    assert dist_cmp(AbsMetric(), real(5), real(6), 1) is Ordering.EQUAL


def test_dist_cmp_discrete_same_atom():
    assert dist_cmp(DiscreteMetric(), atom(4), atom(4), Q(1, 2)) is Ordering.LESS


def test_boundary_pair_exactly_at_radius():
    # distinct shared-family points sit at distance exactly eps'
    m = EuclideanMetric()
    assert dist_cmp(m, a_pt(1), a_pt(2), EPS_PRIME) is Ordering.EQUAL
    assert in_ball(m, a_pt(1), EPS_PRIME, a_pt(2))


def test_in_ball_closed_conventions():
    assert in_ball(AbsMetric(), real(5), 1, real(6))
    m = EuclideanMetric()
    g = basis_point(7, Q(1, 2))
    assert in_ball(m, ORIGIN, Q(1, 2), g)  # boundary of the closed ball
    assert not in_ball(DiscreteMetric(), atom(1), Q(1, 2), atom(2))


def test_in_set_ball():
    assert in_set_ball(AbsMetric(), [real(0), real(3)], 1, real(2))
    assert not in_set_ball(AbsMetric(), [], 1, real(0))
    seen = [a_pt(k) for k in range(1, 6)]
    assert in_set_ball(EuclideanMetric(), seen, EPS_PRIME, a_pt(6))


def test_variant_mismatch():
    with pytest.raises(VariantMismatch):
        dist_cmp(AbsMetric(), atom(1), atom(2), 1)
    with pytest.raises(VariantMismatch):
        dist_cmp(EuclideanMetric(), real(0), real(1), 1)


def test_sparse_vec_invariants():
    with pytest.raises(ValueError):
        SparseVec(((2, Coord(Q(1))), (1, Coord(Q(1)))))
    with pytest.raises(ValueError):
        SparseVec(((1, Coord(Q(0))),))


def test_canonical_point_order():
    pts = [real(-6), real(6), real(0), real(12)]
    assert sort_points(pts) == [real(0), real(6), real(-6), real(12)]
    sv = [basis_point(2, Q(2)), basis_point(2, Q(1, 2)), ORIGIN, basis_point(1, Q(3))]
    assert sort_points(sv) == [
        ORIGIN,
        basis_point(1, Q(3)),
        basis_point(2, Q(1, 2)),
        basis_point(2, Q(2)),
    ]


# --- metric axioms on random triples (squared-comparable forms) ----------


def _random_point(rng, kind):
    if kind == "abs":
        return real(Q(rng.randint(-40, 40), rng.randint(1, 8)))
    if kind == "discrete":
        return atom(rng.randint(0, 12))
    coords = []
    for idx in sorted(rng.sample(range(1, 7), rng.randint(0, 3))):
        coords.append(
            (idx, Coord(Q(rng.randint(-8, 8), rng.randint(1, 4)) or Q(1),
                        rng.random() < 0.5))
        )
    coords = [(i, c) for i, c in coords if c.scale != 0]
    return SparseVec(tuple(coords))


def _sq(metric, p, q) -> Root2:
    if isinstance(metric, (EuclideanMetric, WeightedL2Metric)):
        return metric.sq_dist(p, q)
    if isinstance(metric, AbsMetric):
        d = metric.dist(p, q)
    else:
        d = Q(0) if p == q else Q(1)
    return Root2(d * d)


@pytest.mark.parametrize(
    "kind,metric",
    [
        ("abs", AbsMetric()),
        ("discrete", DiscreteMetric()),
        ("l2", EuclideanMetric()),
        ("wl2", WeightedL2Metric(Q(1, 4), Q(1))),
    ],
)
def test_metric_axioms_on_random_triples(kind, metric):
    rng = random.Random(11)
    pkind = "l2" if kind == "wl2" else kind
    for _ in range(1000):
        p, q, s = (_random_point(rng, pkind) for _ in range(3))
        dpq, dqp = _sq(metric, p, q), _sq(metric, q, p)
        assert dpq == dqp  # symmetry, exactly
        assert _sq(metric, p, p).sign() == 0
        if p != q:
            assert dpq.sign() > 0  # identity of indiscernibles
        # triangle inequality in squared form:
        # d(p,s) <= d(p,q) + d(q,s)  <=>  A - B - C <= 2 sqrt(B C)
        A, B, C = _sq(metric, p, s), dpq, _sq(metric, q, s)
        lhs = A - B - C
        if lhs.sign() <= 0:
            continue
        assert (lhs.square() - B * C * 4).sign() <= 0


# --- text formats ---------------------------------------------------------


points_strategy = st.one_of(
    st.integers(min_value=-99, max_value=99).map(atom),
    st.fractions(min_value=-99, max_value=99, max_denominator=97).map(real),
    st.lists(
        st.tuples(
            st.integers(min_value=1, max_value=30),
            st.fractions(min_value=-9, max_value=9, max_denominator=12).filter(
                lambda q: q != 0
            ),
            st.booleans(),
        ),
        max_size=4,
        unique_by=lambda t: t[0],
    ).map(
        lambda cs: SparseVec(
            tuple((i, Coord(q, h)) for i, q, h in sorted(cs, key=lambda t: t[0]))
        )
    ),
)


@given(points_strategy)
def test_point_roundtrip(p):
    assert parse_point(format_point(p)) == p


def test_metric_roundtrip():
    for m in (DiscreteMetric(), AbsMetric(), EuclideanMetric(),
              WeightedL2Metric(Q(1, 4), Q(1))):
        assert parse_metric(format_metric(m)) == m


def test_points_file_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError) as e:
        parse_points_file("metric abs\nreal:1/2\nbogus:3\n")
    assert e.value.line_no == 3


def test_witness_verification():
    m = AbsMetric()
    good = SeparationWitness("spread", tuple(real(5 * k) for k in range(12)),
                             separation=Q(5), radius=Q(2))
    assert verify_witness(m, good)
    bad_sep = SeparationWitness("tight", tuple(real(k) for k in range(12)),
                                separation=Q(5), radius=Q(2))
    assert not verify_witness(m, bad_sep)
    bad_radius = SeparationWitness("radius", tuple(real(5 * k) for k in range(12)),
                                   separation=Q(4), radius=Q(2))
    assert not verify_witness(m, bad_radius)
