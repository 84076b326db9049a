"""Exact Gaussian rational numbers a + b*i with arbitrary-precision rational parts.

All coefficient arithmetic in the package happens here; there is no floating
point anywhere.  Internally a value is stored as an integer triple
(a, b, den) meaning (a + b*i)/den with den > 0 and gcd(a, b, den) = 1, which
keeps the observable real and imaginary parts in reduced form while paying
for a single gcd per operation.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd


class GaussianRational:
    __slots__ = ("a", "b", "den")

    def __init__(self, re=0, im=0):
        re = Fraction(re)
        im = Fraction(im)
        den = re.denominator * im.denominator // gcd(re.denominator, im.denominator)
        a = re.numerator * (den // re.denominator)
        b = im.numerator * (den // im.denominator)
        self.a, self.b, self.den = _reduce(a, b, den)

    @classmethod
    def _raw(cls, a, b, den):
        self = object.__new__(cls)
        self.a, self.b, self.den = _reduce(a, b, den)
        return self

    @property
    def re(self) -> Fraction:
        return Fraction(self.a, self.den)

    @property
    def im(self) -> Fraction:
        return Fraction(self.b, self.den)

    def is_zero(self):
        return self.a == 0 and self.b == 0

    def conjugate(self):
        return GaussianRational._raw(self.a, -self.b, self.den)

    def inverse(self):
        if self.a == 0 and self.b == 0:
            raise ZeroDivisionError("inverse of zero")
        n = self.a * self.a + self.b * self.b
        return GaussianRational._raw(self.den * self.a, -self.den * self.b, n)

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational._raw(
            self.a * other.den + other.a * self.den,
            self.b * other.den + other.b * self.den,
            self.den * other.den,
        )

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational._raw(
            self.a * other.den - other.a * self.den,
            self.b * other.den - other.b * self.den,
            self.den * other.den,
        )

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational._raw(
            self.a * other.a - self.b * other.b,
            self.a * other.b + self.b * other.a,
            self.den * other.den,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __neg__(self):
        return GaussianRational._raw(-self.a, -self.b, self.den)

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.a == other.a and self.b == other.b and self.den == other.den

    def __hash__(self):
        return hash((self.a, self.b, self.den))

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"

    def __str__(self):
        return format_gaussian(self)


def _reduce(a, b, den):
    if den < 0:
        a, b, den = -a, -b, -den
    if den == 1:
        return a, b, 1
    g = gcd(a, b, den)
    if g > 1:
        a //= g
        b //= g
        den //= g
    return a, b, den


def _coerce(value):
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, int):
        return GaussianRational._raw(value, 0, 1)
    if isinstance(value, Fraction):
        return GaussianRational._raw(value.numerator, 0, value.denominator)
    return NotImplemented


def format_gaussian(c: GaussianRational) -> str:
    """Canonical printable form, reparseable by the expression grammar.

    Pure reals print as "2" or "-1/2"; pure imaginaries as "i", "-i" or
    "2/3*i"; mixed values are parenthesised: "(1-2*i)".
    """
    re, im = c.re, c.im
    if im == 0:
        return str(re)
    if re == 0:
        if im == 1:
            return "i"
        if im == -1:
            return "-i"
        return f"{im}*i"
    if im == 1:
        imug = "i"
    elif im == -1:
        imug = "-i"
    else:
        imug = f"{im}*i"
    if imug.startswith("-"):
        return f"({re}-{imug[1:]})"
    return f"({re}+{imug})"


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I = GaussianRational(0, 1)


def gr(re=0, im=0) -> GaussianRational:
    """Shorthand constructor used heavily in tests and fixtures."""
    return GaussianRational(re, im)
