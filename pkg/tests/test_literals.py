from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from pottskit.algebraic import AlgNum, alg_eq
from pottskit.literals import (
    LiteralError,
    format_literal,
    parse_literal,
    parse_rational,
)

rationals = st.fractions(
    min_value=-1000, max_value=1000, max_denominator=997)


@given(rationals)
def test_rational_round_trip(r):
    a = AlgNum.from_rational(r)
    assert parse_literal(format_literal(a)).as_rational() == r


@given(rationals, rationals)
def test_gauss_round_trip(re, im):
    a = AlgNum.from_rational(re) + AlgNum.from_rational(im) * AlgNum.i_unit()
    text = format_literal(a)
    if im != 0:
        assert text.startswith("gauss:")
    assert alg_eq(parse_literal(text), a)


def test_alg_round_trip():
    sqrt2 = parse_literal('alg:{"poly": [-2,0,1], "rect": ["1","2","0","0"]}')
    assert alg_eq(sqrt2 * sqrt2, 2)
    again = parse_literal(format_literal(sqrt2))
    assert alg_eq(again, sqrt2)


def test_root_of_unity_literal_round_trip():
    z = AlgNum.root_of_unity(1, 5)
    assert alg_eq(parse_literal(format_literal(z)), z)


@pytest.mark.parametrize("bad", [
    "rat:x", "rat:1/0", "gauss:1+i", "gauss:1", "alg:nope",
    'alg:{"poly": [1]}', "unknown:3", "3",
])
def test_malformed_literals_raise(bad):
    with pytest.raises(LiteralError):
        parse_literal(bad)


def test_parse_rational():
    assert parse_rational("-7/3") == Fraction(-7, 3)
    with pytest.raises(LiteralError):
        parse_rational("seven")
