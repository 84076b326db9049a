from fractions import Fraction

import pytest

from crformal.gaussian import GaussianRational, format_gaussian, gr


def test_canonical_reduced_parts():
    c = gr(Fraction(4, 6), Fraction(-2, 8))
    assert c.re == Fraction(2, 3)
    assert c.im == Fraction(-1, 4)
    assert c.re.denominator > 0 and c.im.denominator > 0


def test_field_arithmetic():
    a = gr(1, 2)
    b = gr(3, -1)
    assert a + b == gr(4, 1)
    assert a - b == gr(-2, 3)
    assert a * b == gr(5, 5)
    assert (a / b) * b == a
    assert a * a.inverse() == gr(1)
    assert -a == gr(-1, -2)


def test_conjugation_and_powers():
    a = gr(Fraction(1, 2), 3)
    assert a.conjugate().conjugate() == a
    assert (a * a.conjugate()).im == 0
    assert gr(0, 1) ** 2 == gr(-1)
    assert gr(2) ** 10 == gr(1024)


def test_mixed_scalar_coercion():
    a = gr(1, 1)
    assert a + 1 == gr(2, 1)
    assert 2 * a == gr(2, 2)
    assert a - Fraction(1, 2) == gr(Fraction(1, 2), 1)
    assert 1 / gr(0, 1) == gr(0, -1)


def test_zero_division_rejected():
    with pytest.raises(ZeroDivisionError):
        gr(0).inverse()


@pytest.mark.parametrize(
    "value,expected",
    [
        (gr(2), "2"),
        (gr(Fraction(-1, 2)), "-1/2"),
        (gr(0, 1), "i"),
        (gr(0, -1), "-i"),
        (gr(0, Fraction(2, 3)), "2/3*i"),
        (gr(1, -2), "(1-2*i)"),
        (gr(Fraction(1, 2), 1), "(1/2+i)"),
        (gr(0), "0"),
    ],
)
def test_formatting(value, expected):
    assert format_gaussian(value) == expected


def test_exactness_no_floats():
    # a hundred mixed operations stay on exact rationals
    acc = gr(1)
    for k in range(1, 100):
        acc = acc * gr(k, 1) / gr(k, -1) + gr(Fraction(1, k))
    assert isinstance(acc.re, Fraction)
    assert isinstance(acc.im, Fraction)
