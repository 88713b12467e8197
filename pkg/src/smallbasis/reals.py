"""Exact real numbers of the form sum of rationals times products of prime radicals.

A ``CReal`` holds a finite sum ``c_1 r_1 + ... + c_m r_m`` where each ``c_j`` is a
nonzero rational and each ``r_j`` is a distinct product ``p_1^{e_1} ... p_k^{e_k}``
of primes with exponents strictly between 0 and 1.  Distinct radicals of this shape
are linearly independent over Q, so a value is zero exactly when it has no terms,
and equality is structural.  Signs of multi-term values are decided with interval
arithmetic at increasing precision, which always terminates because the value is
known to be nonzero.

Arithmetic that lands back in Q returns a ``Fraction``; a ``CReal`` instance is
therefore always irrational.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Union

import mpmath
import sympy
from mpmath import iv

Rad = tuple[tuple[int, Fraction], ...]
Number = Union[Fraction, "CReal"]

_MAX_PREC = 1 << 16


class PrecisionError(ArithmeticError):
    """Interval refinement did not separate a value from zero."""


@lru_cache(maxsize=8192)
def _factor(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(sympy.factorint(n).items()))


def _normalize(exps: dict[int, Fraction]) -> tuple[Fraction, Rad]:
    """Split prime exponents into a rational part and fractional radicals."""
    coef = Fraction(1)
    rad = []
    for p in sorted(exps):
        e = exps[p]
        whole = math.floor(e)
        if whole:
            coef *= Fraction(p) ** whole
        frac = e - whole
        if frac:
            rad.append((p, frac))
    return coef, tuple(rad)


def _rad_mul(a: Rad, b: Rad) -> tuple[Fraction, Rad]:
    exps = dict(a)
    for p, e in b:
        exps[p] = exps.get(p, Fraction(0)) + e
    return _normalize(exps)


def _as_rational(x) -> Fraction | None:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return None


def _wrap(terms: dict[Rad, Fraction]) -> Number:
    terms = {r: c for r, c in terms.items() if c}
    if not terms:
        return Fraction(0)
    if set(terms) == {()}:
        return terms[()]
    return CReal(terms)


class CReal:
    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: dict[Rad, Fraction]):
        self._terms = dict(sorted(terms.items()))
        self._hash = None

    # construction helpers

    @property
    def terms(self) -> dict[Rad, Fraction]:
        return dict(self._terms)

    def _items(self):
        return self._terms.items()

    @staticmethod
    def _coerce(x) -> dict[Rad, Fraction] | None:
        if isinstance(x, CReal):
            return x._terms
        q = _as_rational(x)
        if q is None:
            return None
        return {(): q} if q else {}

    # arithmetic

    def __add__(self, other):
        o = CReal._coerce(other)
        if o is None:
            return NotImplemented
        out = dict(self._terms)
        for r, c in o.items():
            out[r] = out.get(r, Fraction(0)) + c
        return _wrap(out)

    __radd__ = __add__

    def __neg__(self):
        return CReal({r: -c for r, c in self._terms.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = CReal._coerce(other)
        if o is None:
            return NotImplemented
        return self + _wrap({r: -c for r, c in o.items()})

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = CReal._coerce(other)
        if o is None:
            return NotImplemented
        out: dict[Rad, Fraction] = {}
        for r1, c1 in self._terms.items():
            for r2, c2 in o.items():
                k, r = _rad_mul(r1, r2)
                out[r] = out.get(r, Fraction(0)) + c1 * c2 * k
        return _wrap(out)

    __rmul__ = __mul__

    def _reciprocal(self) -> Number:
        if len(self._terms) != 1:
            raise ArithmeticError("division by a multi-term exact real is not supported")
        (rad, c), = self._terms.items()
        return rpow(Fraction(1) / c, 1) * _rad_pow(rad, Fraction(-1))

    def __truediv__(self, other):
        q = _as_rational(other)
        if q is not None:
            if q == 0:
                raise ZeroDivisionError("division by zero")
            return self * (1 / q)
        if isinstance(other, CReal):
            return self * other._reciprocal()
        return NotImplemented

    def __rtruediv__(self, other):
        q = _as_rational(other)
        if q is None:
            return NotImplemented
        return self._reciprocal() * q

    def __pow__(self, e):
        return rpow(self, e)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # ordering

    def interval(self, prec: int = 64):
        iv.prec = prec
        total = iv.mpf(0)
        for rad, c in self._terms.items():
            term = iv.mpf(c.numerator) / c.denominator
            for p, e in rad:
                term = term * iv.mpf(p) ** (iv.mpf(e.numerator) / e.denominator)
            total = total + term
        return total

    def sign(self) -> int:
        if len(self._terms) == 1:
            (_, c), = self._terms.items()
            return 1 if c > 0 else -1
        prec = 64
        while prec <= _MAX_PREC:
            v = self.interval(prec)
            if v.a > 0:
                return 1
            if v.b < 0:
                return -1
            prec *= 2
        raise PrecisionError("could not resolve sign")

    def _cmp(self, other) -> int:
        d = self - other
        if isinstance(d, CReal):
            return d.sign()
        return (d > 0) - (d < 0)

    def __eq__(self, other):
        o = CReal._coerce(other)
        if o is None:
            return NotImplemented
        return self._terms == dict(sorted(o.items()))

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __lt__(self, other):
        if CReal._coerce(other) is None:
            return NotImplemented
        return self._cmp(other) < 0

    def __le__(self, other):
        if CReal._coerce(other) is None:
            return NotImplemented
        return self._cmp(other) <= 0

    def __gt__(self, other):
        if CReal._coerce(other) is None:
            return NotImplemented
        return self._cmp(other) > 0

    def __ge__(self, other):
        if CReal._coerce(other) is None:
            return NotImplemented
        return self._cmp(other) >= 0

    # conversions

    def __float__(self):
        return float(self.to_mpf(60))

    def to_mpf(self, dps: int = 30):
        with mpmath.workdps(dps):
            total = mpmath.mpf(0)
            for rad, c in self._terms.items():
                term = mpmath.mpf(c.numerator) / c.denominator
                for p, e in rad:
                    term *= mpmath.power(p, mpmath.mpf(e.numerator) / e.denominator)
                total += term
            return +total

    def floor(self) -> int:
        prec = 64
        while prec <= _MAX_PREC:
            v = self.interval(prec)
            lo = int(mpmath.floor(mpmath.mpf(v.a)))
            hi = int(mpmath.floor(mpmath.mpf(v.b)))
            if lo == hi:
                return lo
            prec *= 2
        raise PrecisionError("could not resolve floor")

    def __str__(self):
        parts = []
        for rad, c in self._terms.items():
            factors = [f"{p}^({e})" for p, e in rad]
            if c != 1 or not factors:
                factors.insert(0, str(c))
            parts.append("*".join(factors))
        return " + ".join(parts)

    def __repr__(self):
        return f"CReal({self})"

    def to_json(self) -> dict:
        return {
            "terms": [
                {"coef": str(c), "rad": [[p, str(e)] for p, e in rad]}
                for rad, c in self._terms.items()
            ]
        }


def _rad_pow(rad: Rad, e: Fraction) -> Number:
    exps = {p: x * e for p, x in rad}
    coef, r = _normalize(exps)
    return _wrap({r: coef})


def rpow(x, e) -> Number:
    """Exact ``x ** e`` for a rational exponent and a positive single-term base."""
    e = Fraction(e)
    q = _as_rational(x)
    if q is not None:
        if q == 0:
            if e <= 0:
                raise ZeroDivisionError("zero to a nonpositive power")
            return Fraction(0)
        if q < 0:
            if e.denominator != 1:
                raise ValueError("fractional power of a negative number")
            return q ** int(e)
        if e.denominator == 1:
            return q ** int(e)
        exps: dict[int, Fraction] = {}
        for sign, n in ((1, q.numerator), (-1, q.denominator)):
            for p, k in _factor(n):
                exps[p] = exps.get(p, Fraction(0)) + sign * k * e
        coef, rad = _normalize(exps)
        return _wrap({rad: coef})
    if isinstance(x, CReal):
        if len(x._terms) != 1:
            raise ArithmeticError("powers of multi-term exact reals are not supported")
        (rad, c), = x._terms.items()
        if c < 0:
            raise ValueError("fractional power of a negative number")
        return rpow(c, e) * _rad_pow(rad, e)
    raise TypeError(f"unsupported base {type(x).__name__}")


def rsqrt(x) -> Number:
    return rpow(x, Fraction(1, 2))


def rfloor(x) -> int:
    if isinstance(x, CReal):
        return x.floor()
    return math.floor(Fraction(x))


def rceil(x) -> int:
    return -rfloor(-x)


def to_float(x) -> float:
    return float(x)


def from_json(obj) -> Number:
    if isinstance(obj, str):
        return Fraction(obj)
    if isinstance(obj, int):
        return Fraction(obj)
    terms: dict[Rad, Fraction] = {}
    for t in obj["terms"]:
        rad = tuple((int(p), Fraction(e)) for p, e in t["rad"])
        terms[rad] = terms.get(rad, Fraction(0)) + Fraction(t["coef"])
    return _wrap(terms)


def number_to_json(x):
    if isinstance(x, CReal):
        return x.to_json()
    return str(Fraction(x))


def number_str(x) -> str:
    return str(x) if isinstance(x, CReal) else str(Fraction(x))


def approx(x, digits: int = 20) -> str:
    """Decimal approximation with the given number of significant digits."""
    if isinstance(x, CReal):
        v = x.to_mpf(digits + 10)
    else:
        q = Fraction(x)
        with mpmath.workdps(digits + 10):
            v = mpmath.mpf(q.numerator) / q.denominator
    return mpmath.nstr(v, digits)
