from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ahplus import QSqrt17, Scalar, beta, certified_sign, parse_scalar, sqrt
from ahplus.expr import ExprSyntaxError
from ahplus.scalars import NegativeRadicand

from conftest import S17, close, mp_beta

small = st.fractions(min_value=-20, max_value=20, max_denominator=12)
base = st.builds(QSqrt17, small, small)


def mp_of(q: QSqrt17):
    return mpmath.mpf(q.a.numerator) / q.a.denominator + mpmath.mpf(q.b.numerator) / q.b.denominator * S17


@st.composite
def tower(draw):
    """A random tower element together with its high-precision value."""
    x, ref = Scalar(), mpmath.mpf(0)
    for _ in range(draw(st.integers(1, 3))):
        c = draw(base)
        r = draw(base)
        if r.sign() <= 0:
            r = -r + 1
        deep = draw(st.booleans())
        term = Scalar.coerce(c) * (Scalar.sqrt_of(r).sqrt() if deep else Scalar.sqrt_of(r))
        tref = mp_of(c) * (mpmath.root(mp_of(r), 4) if deep else mpmath.sqrt(mp_of(r)))
        x, ref = x + term, ref + tref
    return x, ref


@given(tower(), tower())
@settings(max_examples=30, deadline=None)
def test_field_ops_match_numeric(a, b):
    (x, rx), (y, ry) = a, b
    assert close(x + y, rx + ry)
    assert close(x * y, rx * ry)
    if abs(ry) > 1e-20:
        assert close(x / y, rx / ry, 1e-30)


@given(tower())
@settings(max_examples=30, deadline=None)
def test_sign_agrees_with_numeric(a):
    x, rx = a
    if abs(rx) > 1e-30:
        assert certified_sign(x) == (1 if rx > 0 else -1)
    assert (x - x).is_zero()


@given(tower())
@settings(max_examples=30, deadline=None)
def test_serialize_roundtrip(a):
    x, _ = a
    assert parse_scalar(x.serialize()) == x


@given(tower())
@settings(max_examples=40, deadline=None)
def test_inverse(a):
    x, rx = a
    if abs(rx) > 1e-20:
        assert x * x.inverse() == 1


def test_beta_values():
    for n in range(-1, 6):
        assert close(beta(n), mp_beta(n))
        assert beta(n) ** 2 == parse_scalar(f"(7+sqrt17)/2 - {n}")


def test_known_identities():
    # d^2 = 7d - 8 gives beta_2 beta_3 = sqrt2 beta_1
    assert beta(2) * beta(3) == sqrt(2) * beta(1)
    assert beta(1) * beta(2) != sqrt(2) * beta(0)
    import sympy

    s = sympy.sqrt(17)
    for n in (-1, 0, 1, 2, 3, 4, 5):
        e = sympy.sqrt((7 + s) / 2 - n)
        assert abs(float(beta(n)) - float(e)) < 1e-12


def test_rational_root_collapses():
    assert sqrt(4) == 2
    assert sqrt(Fraction(9, 4)) == Fraction(3, 2)
    assert Scalar.sqrt_of(QSqrt17(9, 2)).serialize() == parse_scalar("sqrt(9+2*sqrt17)").serialize()
    # (1+sqrt17)^2/4 = (9+sqrt17)/2
    assert Scalar.sqrt_of(QSqrt17(Fraction(9, 2), Fraction(1, 2))) == parse_scalar("(1+sqrt17)/2")


def test_negative_radicand():
    with pytest.raises(NegativeRadicand):
        sqrt(-1)


def test_unary_minus_binds_looser_than_power():
    assert parse_scalar("-b(1)^2") == -(beta(1) ** 2)
    assert parse_scalar("(-b(1))^2") == beta(1) ** 2
    assert parse_scalar("2^-1") == Fraction(1, 2)


@pytest.mark.parametrize("bad", ["", "b(", "sqrt17 +", "b(x)", "1//2", "sqrt(1,2)"])
def test_syntax_errors(bad):
    with pytest.raises(ExprSyntaxError):
        parse_scalar(bad)


def test_decimal_rendering():
    x = beta(0)
    digits = x.decimal(50)
    assert abs(mpmath.mpf(digits) - mp_beta(0)) < mpmath.mpf(10) ** -49


def test_sign_of_tiny_difference():
    x = beta(1) * beta(2) - sqrt(2) * beta(0)
    ref = mp_beta(1) * mp_beta(2) - mpmath.sqrt(2) * mp_beta(0)
    assert certified_sign(x) == (1 if ref > 0 else -1)
    y = beta(2) * beta(3) - sqrt(2) * beta(1) + parse_scalar("1/10^40")
    assert certified_sign(y) == 1
