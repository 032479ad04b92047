"""Integer polynomial utilities: evaluation, factorization, Sturm sequences.

Polynomials are tuples of coefficients, **lowest degree first**.  Heavy
algebra (factorization over Z, resultants, cyclotomics) is delegated to
sympy; Sturm-sequence real root isolation is implemented here directly over
`fractions.Fraction` so that every interval it reports is exact.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

import sympy as sp
from sympy.abc import x as _X

from .rect import RatInterval, RatRect

IntPoly = tuple[int, ...]


def strip(coeffs) -> IntPoly:
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def degree(p: IntPoly) -> int:
    return len(p) - 1


def is_zero_poly(p: IntPoly) -> bool:
    return len(strip(p)) == 0


def content(p: IntPoly) -> int:
    g = 0
    for c in p:
        g = gcd(g, abs(c))
    return g or 1


def primitive(p: IntPoly) -> IntPoly:
    p = strip(p)
    if not p:
        return p
    g = content(p)
    q = tuple(c // g for c in p)
    # normalize sign of leading coefficient
    if q[-1] < 0:
        q = tuple(-c for c in q)
    return q


def poly_eval(p, v):
    """Horner evaluation; works for Fraction, int, complex operands."""
    acc = 0
    for c in reversed(p):
        acc = acc * v + c
    return acc


def poly_eval_interval(p, iv: RatInterval) -> RatInterval:
    acc = RatInterval.point(0)
    for c in reversed(p):
        acc = acc * iv + RatInterval.point(Fraction(c))
    return acc


def poly_eval_rect(p, box: RatRect) -> RatRect:
    acc = RatRect.point(0)
    for c in reversed(p):
        acc = acc * box + RatRect.point(Fraction(c))
    return acc


def derivative(p):
    return tuple(i * c for i, c in enumerate(p))[1:] or (0 * p[0],)


def to_sympy(p: IntPoly) -> sp.Poly:
    return sp.Poly(list(reversed(p)), _X)


def from_sympy(poly: sp.Poly) -> IntPoly:
    return strip(tuple(int(c) for c in reversed(poly.all_coeffs())))


def factor_int_poly(p: IntPoly) -> list[tuple[IntPoly, int]]:
    """Irreducible primitive factors over Z with multiplicities.

    The constant content is dropped; factors have positive leading
    coefficient.
    """
    p = strip(p)
    if not p:
        raise ValueError("cannot factor the zero polynomial")
    if len(p) == 1:
        return []
    _, factors = sp.factor_list(to_sympy(p))
    out = []
    for f, mult in factors:
        fc = primitive(from_sympy(sp.Poly(f, _X)))
        if degree(fc) >= 1:
            out.append((fc, mult))
    return out


def squarefree_part(p: IntPoly) -> IntPoly:
    """Product of the distinct irreducible factors."""
    factors = factor_int_poly(p)
    acc = sp.Poly(1, _X)
    for f, _ in factors:
        acc = acc * to_sympy(f)
    return primitive(from_sympy(acc))


def is_irreducible(p: IntPoly) -> bool:
    p = primitive(p)
    factors = factor_int_poly(p)
    return len(factors) == 1 and factors[0][1] == 1 and factors[0][0] == p


@lru_cache(maxsize=None)
def cyclotomic(n: int) -> IntPoly:
    return from_sympy(sp.Poly(sp.polys.specialpolys.cyclotomic_poly(n, _X), _X))


def root_of_unity_order(minpoly: IntPoly) -> int | None:
    """Order n when `minpoly` is the n-th cyclotomic polynomial, else None.

    The search range uses the elementary bound phi(n) >= sqrt(n/2), i.e.
    n <= 2*d^2 for degree d.
    """
    p = primitive(minpoly)
    d = degree(p)
    if d < 1:
        return None
    limit = 2 * d * d + 1
    for n in range(1, limit + 1):
        if sp.totient(n) == d and cyclotomic(n) == p:
            return n
    return None


# ---------------------------------------------------------------------------
# Sturm sequences over Fraction
# ---------------------------------------------------------------------------


def _frac_poly(p) -> tuple[Fraction, ...]:
    c = [Fraction(v) for v in p]
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _poly_rem(a, b):
    """Remainder of a/b over Fraction, both lowest-first, b nonzero."""
    a = list(a)
    db, lb = len(b) - 1, b[-1]
    while len(a) - 1 >= db and any(a):
        while a and a[-1] == 0:
            a.pop()
        if len(a) - 1 < db:
            break
        factor = a[-1] / lb
        shift = len(a) - 1 - db
        for i, c in enumerate(b):
            a[shift + i] -= factor * c
        a.pop()
    while a and a[-1] == 0:
        a.pop()
    return tuple(a)


def sturm_chain(p) -> list[tuple[Fraction, ...]]:
    """Sturm sequence of the squarefree Fraction polynomial p."""
    p = _frac_poly(p)
    if not p:
        raise ValueError("zero polynomial")
    chain = [p, _frac_poly(derivative(p))]
    while chain[-1]:
        r = _poly_rem(chain[-2], chain[-1])
        if not r:
            break
        chain.append(tuple(-c for c in r))
    return [c for c in chain if c]


def _sign_variations(chain, v: Fraction) -> int:
    signs = []
    for p in chain:
        s = poly_eval(p, v)
        if s != 0:
            signs.append(1 if s > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_real_roots(chain, lo: Fraction, hi: Fraction) -> int:
    """Number of distinct real roots in (lo, hi] for a squarefree chain."""
    return _sign_variations(chain, lo) - _sign_variations(chain, hi)


def cauchy_root_bound(p) -> Fraction:
    """B with all complex roots of p in |z| <= B."""
    p = _frac_poly(p)
    lead = abs(p[-1])
    m = max((abs(Fraction(c)) for c in p[:-1]), default=Fraction(0))
    return 1 + m / lead


def isolate_real_roots(p: IntPoly) -> list[tuple[Fraction, Fraction]]:
    """Disjoint rational intervals, one per distinct real root of p.

    The squarefree part is taken internally.  Each interval (a, b] contains
    exactly one real root; intervals are returned sorted and pairwise
    disjoint.
    """
    p = strip(p)
    if not p:
        raise ValueError("zero polynomial")
    if len(p) == 1:
        return []
    sf = squarefree_part(p)
    chain = sturm_chain(sf)
    bound = cauchy_root_bound(sf)
    total = count_real_roots(chain, -bound - 1, bound)
    result: list[tuple[Fraction, Fraction]] = []

    def split(lo: Fraction, hi: Fraction, k: int):
        if k == 0:
            return
        if k == 1:
            result.append((lo, hi))
            return
        mid = (lo + hi) / 2
        # nudge off a root at the midpoint
        while poly_eval(sf, mid) == 0:
            mid = (lo + mid) / 2
        kl = count_real_roots(chain, lo, mid)
        split(lo, mid, kl)
        split(mid, hi, k - kl)

    split(-bound - 1, bound, total)
    return result


def refine_real_root(p, lo: Fraction, hi: Fraction, width: Fraction):
    """Bisect (lo, hi] containing exactly one root of squarefree p.

    Returns (lo', hi') with hi'-lo' <= width, still containing the root.
    Uses Sturm counts per bisection step, so endpoint coincidences are
    handled exactly.
    """
    sf = _frac_poly(p)
    chain = sturm_chain(sf)
    lo, hi = Fraction(lo), Fraction(hi)
    if count_real_roots(chain, lo, hi) != 1:
        raise ValueError("interval does not isolate exactly one root")
    while hi - lo > width:
        mid = (lo + hi) / 2
        if poly_eval(sf, mid) == 0:
            return mid, mid
        if count_real_roots(chain, lo, mid) == 1:
            hi = mid
        else:
            lo = mid
    return lo, hi
