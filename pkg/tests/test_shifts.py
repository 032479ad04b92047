from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pottskit.algebraic import AlgNum, alg_eq, as_algnum, real_cmp
from pottskit.graph import to_xy
from pottskit import shifts as S


Q2 = as_algnum(2)
Q3 = as_algnum(3)
I = AlgNum.i_unit()
ONE = AlgNum.from_rational(1)
SRC_REAL = to_xy(Q2, Fraction(-3, 2))          # q=2, y=-1/2
SRC_IMAG = to_xy(Q2, as_algnum(2) * I - ONE)   # q=2, y=2i


def _verified(cert):
    res = S.verify_certificate(cert)
    assert res.ok, res.message
    return res


def test_thicken_stretch_exact():
    c = S.thicken(SRC_REAL, 3)
    assert alg_eq(c.implemented_y, Fraction(-1, 8))
    _verified(c)
    p = to_xy(Q2, as_algnum(Fraction(-1, 2)))   # x = -3
    c = S.stretch(p, 2)
    assert alg_eq(c.implemented_y, Fraction(5, 4))
    _verified(c)


def test_stretch_rejects_unit_x_power():
    p = to_xy(Q2, as_algnum(-1) + I - ONE + ONE)  # x with x^4 = 1?
    p = to_xy(Q2, Q2 / (I - ONE))                 # x = i
    with pytest.raises(S.ShiftError):
        S.stretch(p, 4)


def test_identity_shift():
    c = S.identity_shift(SRC_REAL)
    assert alg_eq(c.implemented_y, SRC_REAL.y)
    _verified(c)


def test_shift_to_norm_gt1_generic_and_cyclic():
    for y in (I, as_algnum(2) * AlgNum.root_of_unity(1, 3)):
        p = to_xy(Q3, y - ONE)
        c = S.shift_to_norm_gt1(p)
        _verified(c)
        dp = c.derived_point()
        assert real_cmp(dp.x * dp.x.conj(), 1) > 0


def test_shift_to_norm_gt1_imag_axis_q2():
    p = to_xy(Q2, as_algnum(2) * I - ONE)
    c = S.shift_to_norm_gt1(p)
    assert c.meta.get("kind") == "neg_unit_interval"
    _verified(c)
    y = c.implemented_y
    assert y.is_real()
    assert real_cmp(y, -1) > 0 and real_cmp(y, 0) < 0


def test_excluded_points_raise():
    with pytest.raises(S.ExcludedPointError):
        S.shift_to_norm_gt1(to_xy(Q2, I - ONE))
    w3 = AlgNum.root_of_unity(1, 3)
    with pytest.raises(S.ExcludedPointError):
        S.shift_to_norm_gt1(to_xy(Q3, w3 - ONE))


def test_shift_to_norm_lt1():
    for p in (SRC_REAL, to_xy(Q3, I - ONE)):
        c = S.shift_to_norm_lt1(p)
        _verified(c)
        dp = c.derived_point()
        assert real_cmp(dp.x * dp.x.conj(), 1) < 0


def test_approx_shift_to_1mq():
    p = to_xy(Q2, as_algnum(-3))
    c = S.approx_shift_to_1mq(p, 12)
    res = _verified(c)
    assert res.error_bound is not None
    assert res.error_bound <= Fraction(1, 4096)


def test_greedy_real_shift_certified():
    p = to_xy(Q2, Fraction(-1, 4))
    c = S.greedy_real_shift(p, Fraction(1, 2), 3, 16)
    res = _verified(c)
    assert res.error_bound <= Fraction(1, 2 ** 16)


def test_greedy_target_one_is_exact():
    p = to_xy(Q2, Fraction(-1, 4))
    c = S.greedy_real_shift(p, Fraction(1), 3, 10)
    assert c.error_exponent is None
    assert alg_eq(c.implemented_y, 1)


def test_gj_two_weight_variants():
    cases = [
        (2, Fraction(1, 2), 3, Fraction(5, 4), 2, 12),
        (2, Fraction(-1, 2), 3, Fraction(-5, 4), 2, 10),
        (-1, Fraction(1, 2), 5, Fraction(7, 3), 2, 10),
        (2, Fraction(-1, 2), 3, Fraction(1, 3), 2, 10),
    ]
    for q, y1, y2, target, k, n in cases:
        c = S.gj_two_weight_shift(q, y1, y2, target, k, n)
        res = _verified(c)
        if c.error_exponent is not None:
            assert res.error_bound <= Fraction(1, 2 ** n)


def test_gj_rejects_bad_weights():
    with pytest.raises(S.UnsupportedRegimeError):
        S.gj_two_weight_shift(2, Fraction(1, 2), Fraction(1, 2),
                              Fraction(5, 4), 2, 8)


def test_wrap_exact_case():
    x = as_algnum(2) * I
    pw = to_xy(Q2, Q2 / (x - ONE))
    cert, lim = S.wrap_to_unit_interval(pw, 8)
    assert lim.is_exact
    _verified(cert)
    y = cert.implemented_y
    assert real_cmp(y, 0) > 0 and real_cmp(y, 1) < 0


def test_wrap_cyclic_case():
    x = as_algnum(2) * AlgNum.root_of_unity(1, 3)
    pw = to_xy(Q3, Q3 / (x - ONE))
    cert, lim = S.wrap_to_unit_interval(pw, 8)
    _verified(cert)
    lo, hi = lim.bounds()
    assert 0 < lo <= hi < 1
    # tail bound shrinks as m grows
    m = cert.meta["wrap_m"]
    assert lim.tail_bound(m + 4) < lim.tail_bound(m)


def test_full_approx_shift_unit_interval():
    for src in (SRC_REAL, SRC_IMAG):
        c = S.full_approx_shift(src, Fraction(2, 3), 8)
        res = _verified(c)
        assert res.error_bound is None or res.error_bound <= Fraction(1, 256)


def test_full_approx_shift_zero_and_negative():
    c = S.full_approx_shift(SRC_REAL, 0, 6)
    _verified(c)
    c = S.full_approx_shift(SRC_REAL, Fraction(-3, 4), 5)
    _verified(c)


def test_certificate_json_round_trip():
    c = S.greedy_real_shift(to_xy(Q2, Fraction(-1, 4)), Fraction(1, 2),
                            3, 10)
    c2 = S.certificate_from_json(S.certificate_to_json(c))
    assert S.verify_certificate(c2).ok


def test_tampered_certificate_fails():
    c = S.greedy_real_shift(to_xy(Q2, Fraction(-1, 4)), Fraction(1, 2),
                            3, 10)
    obj = S.certificate_to_json(c)
    obj["implemented"] = "rat:9/10"
    c2 = S.certificate_from_json(obj)
    assert not S.verify_certificate(c2).ok


@given(st.integers(min_value=1, max_value=40),
       st.integers(min_value=1, max_value=40))
@settings(max_examples=50, deadline=None)
def test_budget_monotone(n, k):
    b = S.precision_budget(SRC_REAL)
    assert b.r(n + 1, k) > b.r(n, k)
    assert b.r(n, k + 1) > b.r(n, k)
    assert b.f(n + 1, [k]) > b.f(n, [k])
    assert b.f(n, [k]) >= b.r(n, k)
