import random
from fractions import Fraction

import pytest

from pottskit.algebraic import AlgNum
from pottskit.intpoly import is_irreducible, poly_eval
from pottskit.lattice import (
    MinPolyBudget,
    MinPolyRecoveryError,
    lll_reduce,
    minpoly_budget,
    minpoly_from_approx,
    sturm_isolate,
)
from pottskit.rect import RatRect


def _norm2(v):
    return sum(x * x for x in v)


def test_lll_reduces_norms():
    rng = random.Random(1)
    for _ in range(20):
        dim = rng.randint(2, 4)
        basis = [[rng.randint(-50, 50) for _ in range(dim)]
                 for _ in range(dim)]
        if not any(any(row) for row in basis):
            continue
        try:
            red = lll_reduce(basis)
        except ValueError:
            continue  # singular
        assert min(_norm2(r) for r in red) <= min(_norm2(r) for r in basis)


def test_budget_growth():
    b1 = minpoly_budget(2, 10)
    b2 = minpoly_budget(2, 1000)
    b3 = minpoly_budget(4, 10)
    assert b2.bits > b1.bits and b3.bits > b1.bits
    assert b1.tolerance == Fraction(1, 24) / Fraction(2) ** b1.bits


def _approx_of_root(poly, budget):
    """Rational approximation of one real root of poly within tolerance."""
    intervals = sturm_isolate(poly)
    assert intervals, "poly needs a real root"
    lo, hi = intervals[0]
    a = AlgNum.from_poly_and_rect(tuple(poly),
                                  RatRect.from_bounds(lo, hi, 0, 0))
    bits = budget.bits + 8
    box = a.refine(bits)
    return (box.re.lo + box.re.hi) / 2


def test_minpoly_round_trip_golden():
    cases = [
        (-2, 0, 1),          # sqrt 2
        (-1, -1, 1),         # x^2 - x - 1: golden ratio
        (-1, -3, 0, 1),      # cubic
        (1, 0, -4, 0, 1),    # sqrt2 + sqrt3 relative: x^4 - 4x^2 + 1
    ]
    for poly in cases:
        d = len(poly) - 1
        H = max(abs(c) for c in poly)
        budget = minpoly_budget(d, H)
        approx = _approx_of_root(poly, budget)
        out = minpoly_from_approx(approx, budget)
        assert tuple(out) == tuple(poly)


def test_minpoly_rational():
    budget = minpoly_budget(1, 100)
    out = minpoly_from_approx(Fraction(22, 7), budget)
    assert tuple(out) in ((-22, 7), (22, -7))


def test_minpoly_starved_precision_fails():
    poly = (1, 0, -4, 0, 1)
    budget = minpoly_budget(4, 4)
    coarse = MinPolyBudget(4, Fraction(4), 12)
    # approximate only to the starved budget, then demand the full one
    rough = _approx_of_root(poly, coarse)
    rough = Fraction(round(rough * 256), 256)
    with pytest.raises(MinPolyRecoveryError):
        minpoly_from_approx(rough, budget)


def test_sturm_isolate():
    # (x^2 - 2)(x - 3) has roots -sqrt2, sqrt2, 3
    poly = (6, -2, -3, 1)
    ivs = sturm_isolate(poly)
    assert len(ivs) == 3
    for lo, hi in ivs:
        assert lo <= hi
    # intervals are disjoint and ordered
    for (a, b), (c, d) in zip(ivs, ivs[1:]):
        assert b <= c


def test_sturm_counts_match_evals():
    poly = (-2, 0, 1)
    ivs = sturm_isolate(poly)
    assert len(ivs) == 2  # -sqrt2 and sqrt2
    for lo, hi in ivs:
        assert poly_eval(poly, lo) * poly_eval(poly, hi) <= 0
    assert is_irreducible(poly)
