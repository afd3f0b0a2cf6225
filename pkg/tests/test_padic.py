import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scripts.errors import ConfigError, PoleError
from scripts.padic import (
    HYPERBOLIC,
    INFINITY,
    NONHYPERBOLIC,
    AbsValue,
    Disc,
    Mobius,
    PAdicScalar,
    ProjectivePoint,
    abs_p,
    as_fraction,
    classify,
    mobius_apply,
    mobius_derivative_abs,
    valuation,
    vp,
)

PRIMES = st.sampled_from([2, 3, 5, 7])
rationals = st.fractions(max_denominator=10_000).filter(lambda x: abs(x.numerator) < 10**8)
nonzero = rationals.filter(lambda x: x != 0)


def test_valuation_examples():
    assert valuation(PAdicScalar(Fraction(3, 4), 2)) == -2
    assert valuation(PAdicScalar(0, 7)) == math.inf
    assert valuation(PAdicScalar(50, 5)) == 2


def test_abs_examples():
    assert abs_p(PAdicScalar(3, 3)) == AbsValue(3, Fraction(-1))
    assert abs_p(PAdicScalar(0, 3)).is_zero
    assert abs_p(PAdicScalar(Fraction(3, 4), 2)).value() == 4


def test_scalar_rejects_bad_input():
    with pytest.raises(ConfigError):
        PAdicScalar(1, 4)
    with pytest.raises(ConfigError):
        as_fraction(0.5)
    assert as_fraction("-3/9") == Fraction(-1, 3)


@given(PRIMES, rationals, rationals)
def test_ultrametric_inequality(p, x, y):
    s = AbsValue.of(x + y, p)
    a, b = AbsValue.of(x, p), AbsValue.of(y, p)
    assert s <= max(a, b)
    if a != b:
        assert s == max(a, b)


@given(PRIMES, nonzero, nonzero)
def test_abs_is_multiplicative(p, x, y):
    assert abs_p(PAdicScalar(x, p) * PAdicScalar(y, p)) == abs_p(PAdicScalar(x, p)) * abs_p(PAdicScalar(y, p))


def test_mobius_apply_examples():
    q = 9
    assert mobius_apply(Mobius.identity(3), 7) == ProjectivePoint(Fraction(7))
    assert mobius_apply(Mobius(q, 0, 0, 1, 3), 1) == ProjectivePoint(Fraction(q))
    assert mobius_apply(Mobius(0, 1, 1, 0, 3), 0) == INFINITY
    assert mobius_apply(Mobius(2, 1, 1, 1, 3), INFINITY) == ProjectivePoint(Fraction(2))
    assert mobius_apply(Mobius(2, 1, 0, 1, 3), INFINITY) == INFINITY


def test_singular_matrix_rejected():
    with pytest.raises(ConfigError):
        Mobius(1, 2, 2, 4, 3)


def test_projective_equality():
    m = Mobius(1, 2, 3, 5, 7)
    assert m == Mobius(3, 6, 9, 15, 7)
    assert hash(m) == hash(Mobius(-2, -4, -6, -10, 7))
    assert m != Mobius(1, 2, 3, 7, 7)


def test_derivative_examples():
    p = 5
    assert mobius_derivative_abs(Mobius.identity(p), 3) == AbsValue(p, Fraction(0))
    assert mobius_derivative_abs(Mobius(25, 0, 0, 1, p), Fraction(1, 7)) == AbsValue(p, Fraction(-2))
    assert mobius_derivative_abs(Mobius(1, 0, 1, 1, p), p).value() == 1
    with pytest.raises(PoleError):
        mobius_derivative_abs(Mobius(1, 0, 1, 1, p), -1)


def test_classify_examples():
    for p in (2, 3, 5):
        assert classify(Mobius(p, 0, 0, 1, p)) == HYPERBOLIC
        assert classify(Mobius.identity(p)) == NONHYPERBOLIC
        assert classify(Mobius(0, -1, 1, 0, p)) == NONHYPERBOLIC


matrices = st.tuples(rationals, rationals, rationals, rationals).filter(lambda t: t[0] * t[3] != t[1] * t[2])


@settings(max_examples=200)
@given(PRIMES, matrices, st.integers(1, 50).map(Fraction))
def test_classify_invariant_under_rescaling(p, entries, scale):
    m = Mobius(*entries, p)
    scaled = Mobius(*(scale * e for e in entries), p)
    assert classify(m) == classify(scaled)


@settings(max_examples=200)
@given(PRIMES, matrices, matrices, rationals)
def test_composition(p, e1, e2, x):
    m1, m2 = Mobius(*e1, p), Mobius(*e2, p)
    assert mobius_apply(m1 @ m2, x) == mobius_apply(m1, mobius_apply(m2, x))


@settings(max_examples=200)
@given(PRIMES, matrices, matrices, rationals)
def test_chain_rule(p, e1, e2, x):
    m1, m2 = Mobius(*e1, p), Mobius(*e2, p)
    inner = mobius_apply(m2, x)
    if inner.is_infinity or m1.c * inner.value + m1.d == 0:
        return
    composed = mobius_derivative_abs(m1 @ m2, x)
    assert composed == mobius_derivative_abs(m1, inner.value) * mobius_derivative_abs(m2, x)


def test_disc_relations():
    D = Disc(2, -1, 3)
    assert D.contains(5) and D.contains(Fraction(2, 1) + Fraction(3, 4))
    assert not D.contains_open(5)
    assert D.contains_open(11)
    assert D.disjoint(Disc(0, -1, 3))
    assert not D.disjoint(Disc(5, -2, 3))
    assert D.contains_disc(Disc(5, -2, 3))
    assert D.same_as(Disc(-1, -1, 3))
    assert D.distance_to(Disc(0, -1, 3)) == AbsValue(3, Fraction(0))
    assert vp(Fraction(1, 9), 3) == -2
