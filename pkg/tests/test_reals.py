from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from smallbasis.reals import CReal, approx, from_json, number_to_json, rceil, rfloor, rpow, rsqrt

fractions = st.fractions(min_value=Fraction(1, 20), max_value=50, max_denominator=20)
exponents = st.fractions(min_value=-3, max_value=3, max_denominator=6)


def test_rational_results_collapse_to_fraction():
    assert rsqrt(Fraction(9, 4)) == Fraction(3, 2)
    assert isinstance(rsqrt(Fraction(9, 4)), Fraction)
    assert rsqrt(Fraction(2)) * rsqrt(Fraction(2)) == 2
    assert rpow(Fraction(8), Fraction(2, 3)) == 4


def test_sqrt2_plus_sqrt3_ordering():
    s = rsqrt(Fraction(2)) + rsqrt(Fraction(3))
    assert isinstance(s, CReal)
    assert Fraction(314, 100) < s < Fraction(315, 100)
    assert s < rsqrt(Fraction(10))  # (sqrt2 + sqrt3)^2 = 5 + 2 sqrt 6 < 10
    assert s - rsqrt(Fraction(2)) - rsqrt(Fraction(3)) == 0


def test_sort_mixed_values():
    vals = [rsqrt(Fraction(2)), Fraction(3, 2), rpow(Fraction(2), Fraction(1, 3)), Fraction(1)]
    assert sorted(vals) == [Fraction(1), rpow(Fraction(2), Fraction(1, 3)), rsqrt(Fraction(2)), Fraction(3, 2)]


def test_floor_ceil():
    assert rfloor(rsqrt(Fraction(2)) * 1000) == 1414
    assert rceil(rsqrt(Fraction(2))) == 2
    assert rfloor(Fraction(-1, 2)) == -1


def test_json_roundtrip():
    x = rsqrt(Fraction(3)) / 9 + Fraction(1, 7)
    assert from_json(number_to_json(x)) == x
    assert number_to_json(Fraction(2, 3)) == "2/3"


def test_approx_digits():
    assert approx(Fraction(1, 3), 5) == "0.33333"
    assert approx(rsqrt(Fraction(2)), 20).startswith("1.414213562373095048")


@given(fractions, exponents, exponents)
def test_rpow_exponent_law(b, e1, e2):
    assert rpow(b, e1) * rpow(b, e2) == rpow(b, e1 + e2)


@given(fractions, exponents)
def test_rpow_matches_float(b, e):
    x = rpow(b, e)
    assert math.isclose(float(x), float(b) ** float(e), rel_tol=1e-12)


@given(st.lists(st.tuples(fractions, st.sampled_from([2, 3, 5, 6, 7])), min_size=1, max_size=4))
def test_sign_agrees_with_high_precision(terms):
    x = Fraction(0)
    ref = mpmath.mpf(0)
    with mpmath.workdps(60):
        for c, p in terms:
            x = x + (c - 10) * rsqrt(Fraction(p))
            ref += mpmath.mpf(c.numerator - 10 * c.denominator) / c.denominator * mpmath.sqrt(p)
        if x == 0:
            assert abs(ref) < mpmath.mpf(10) ** -40
        else:
            assert (x > 0) == (ref > 0)


def test_division_by_irrational_sum_is_rejected():
    s = rsqrt(Fraction(2)) + rsqrt(Fraction(3))
    with pytest.raises(ArithmeticError):
        Fraction(1) / s
