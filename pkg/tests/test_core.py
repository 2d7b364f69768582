from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from gradcalc.core import GQ, Check, Grade, GradedScalar, gq_arith, koszul_sign, parse_gq

fracs = st.fractions(max_denominator=50).filter(lambda f: abs(f) < 1000)
gqs = st.builds(GQ, fracs, fracs)


@pytest.mark.parametrize("left,right,expected", [
    ([1], [1], -1),
    ([0], [1], 1),
    ([1, 1], [1], 1),
])
def test_koszul_sign_examples(left, right, expected):
    assert koszul_sign(left, right) == expected


def test_gq_arith_examples():
    i = GQ(0, 1)
    assert gq_arith(i, i, "mul") == GQ(-1)
    assert gq_arith(GQ(Fraction(1, 2), 1), GQ(Fraction(1, 2), -1), "add") == GQ(1)
    assert gq_arith(GQ(2, 3), None, "conj") == GQ(2, -3)


def test_gq_rejects_floats_and_division():
    with pytest.raises(TypeError):
        GQ(0.5)
    with pytest.raises(ValueError):
        gq_arith(GQ(1), GQ(2), "div")


@pytest.mark.parametrize("text,value", [
    ("3/2", GQ(Fraction(3, 2))),
    ("-i/2", GQ(0, Fraction(-1, 2))),
    ("1/2+3i", GQ(Fraction(1, 2), 3)),
    ("2-i", GQ(2, -1)),
    ("i", GQ(0, 1)),
])
def test_parse_gq(text, value):
    assert parse_gq(text) == value


@given(gqs, gqs, gqs)
def test_gq_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == GQ(0)
    assert (a * b).conj() == a.conj() * b.conj()


@given(gqs, gqs)
def test_gq_matches_complex(a, b):
    assert abs((a * b).to_complex() - a.to_complex() * b.to_complex()) < 1e-6 * (1 + abs(a.to_complex() * b.to_complex()))


def test_gq_hash_consistent_with_int_and_fraction_parts():
    assert GQ(Fraction(4, 2)) == GQ(2)
    assert hash(GQ(Fraction(4, 2))) == hash(GQ(2))


def test_grades_and_theta():
    assert Grade(1) + Grade(1) == Grade(0)
    t = GradedScalar(GQ(1), True)
    assert (t * t).is_zero()
    assert (t * GradedScalar(GQ(2))) == GradedScalar(GQ(2), True)
    with pytest.raises((ValueError, TypeError)):
        t + GradedScalar(GQ(1))


def test_check_as_dict():
    assert Check("x", False, "w").as_dict() == {"name": "x", "passed": False, "witness": "w"}
