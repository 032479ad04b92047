"""Exact arithmetic over algebraic numbers.

The universal scalar is `AlgNum`: an element of a number field Q(theta)
carrying (on demand) its irreducible defining polynomial and an isolating
rational rectangle.  All decisions (signs, comparisons, membership of an
argument in an interval) are exact: interval arithmetic provides fast
certificates, and symbolic computation (resultants + factorization over Z)
settles the degenerate cases.

Also here: root-of-unity detection, the argument-window tests, the sigma(n)
sequence plans, powers with large real part, and the height / degree /
lower-bound calculus used to bound nonzero partition-function values away
from zero.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import gcd

import mpmath
import sympy as sp

from . import intpoly
from .field import (
    QQ_FIELD,
    NumberField,
    Vec,
    croot_box,
    embed,
    join,
    poly_roots,
    select_root_index,
    to_frac,
)
from .intpoly import IntPoly, degree as poly_degree, primitive
from .rect import RatInterval, RatRect, frac_sqrt_bounds

Rat = Fraction  # spec name for the rational scalar


@dataclass(frozen=True)
class GaussRat:
    """Gaussian rational re + im*i."""

    re: Fraction
    im: Fraction

    def __str__(self):
        return f"{self.re}+{self.im}*i"


# certified bounds for ln 2
LN2_LO = Fraction(693147, 1000000)
LN2_HI = Fraction(693148, 1000000)


def _log2_upper(x: Fraction) -> int:
    """Integer upper bound for log2(x), x > 0."""
    if x <= 0:
        raise ValueError("log of non-positive value")
    n, d = x.numerator, x.denominator
    return n.bit_length() - d.bit_length() + 1


def rat_ln_upper(x: Fraction) -> Fraction:
    """Rational upper bound on ln(x) for x >= 1."""
    if x < 1:
        raise ValueError("rat_ln_upper requires x >= 1")
    return max(0, _log2_upper(x)) * LN2_HI


def _ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def exp_upper(x: Fraction) -> Fraction:
    """Rational upper bound on e**x, x >= 0 (2**ceil(x/ln2_lo))."""
    if x < 0:
        raise ValueError("exp_upper requires x >= 0")
    return Fraction(2) ** _ceil_frac(x / LN2_LO)


def _mpf_tuple_to_frac(t) -> Fraction:
    sign, man, exp, _ = t
    v = Fraction(man, 1) * (Fraction(2) ** exp)
    return -v if sign else v


def _iv_bounds(v) -> tuple[Fraction, Fraction]:
    a, b = v._mpi_
    return _mpf_tuple_to_frac(a), _mpf_tuple_to_frac(b)


def unit_circle_box(k: int, n: int, bits: int) -> RatRect:
    """Certified box around e^(2*pi*i*k/n)."""
    old = mpmath.iv.prec
    try:
        mpmath.iv.prec = bits + 20
        t = mpmath.iv.pi * 2 * k / n
        clo, chi = _iv_bounds(mpmath.iv.cos(t))
        slo, shi = _iv_bounds(mpmath.iv.sin(t))
        return RatRect.from_bounds(clo, chi, slo, shi)
    finally:
        mpmath.iv.prec = old


class AlgNum:
    """Exact algebraic number (element of a number field).

    Public representation per the external contract: `defining_poly` (the
    irreducible primitive minimal polynomial, low coefficients first),
    `rect` (an isolating rational rectangle, degenerate for real numbers)
    and `cached_refinements` (successively smaller rectangles).
    """

    __slots__ = (
        "field", "coeffs", "_minpoly", "_mp_index", "_is_real",
        "_refinements", "_box", "_conj",
    )

    def __init__(self, nfield: NumberField, coeffs: Vec):
        self.field = nfield
        # force plain-int internals: Fractions produced via sympy may carry
        # gmpy2 integers, which break mixed arithmetic with stdlib Fractions
        self.coeffs = tuple(
            Fraction(int(f.numerator), int(f.denominator))
            for f in (Fraction(c) for c in coeffs)
        )
        self._minpoly: IntPoly | None = None
        self._mp_index: int | None = None
        self._is_real: bool | None = None
        self._refinements: list[RatRect] = []
        self._box: RatRect | None = None
        self._conj: "AlgNum" | None = None

    # -- constructors -------------------------------------------------------

    @staticmethod
    def from_rational(v) -> "AlgNum":
        return AlgNum(QQ_FIELD, (Fraction(v),))

    @staticmethod
    def from_gauss(g: GaussRat) -> "AlgNum":
        if g.im == 0:
            return AlgNum.from_rational(g.re)
        i = AlgNum.i_unit()
        return i * g.im + g.re

    @staticmethod
    def i_unit() -> "AlgNum":
        F = NumberField.get((1, 0, 1), _I_INDEX())
        return AlgNum(F, F.generator())

    @staticmethod
    def from_croot(poly: IntPoly, index: int) -> "AlgNum":
        poly = primitive(poly)
        if poly_degree(poly) == 1:
            return AlgNum.from_rational(Fraction(-poly[0], poly[1]))
        F = NumberField.get(poly, index)
        a = AlgNum(F, F.generator())
        a._minpoly = poly
        a._mp_index = index
        return a

    @staticmethod
    def from_poly_and_rect(poly: IntPoly, rect: RatRect) -> "AlgNum":
        """The unique root of `poly` inside the isolating rectangle."""
        poly = intpoly.strip(tuple(int(c) for c in poly))
        if not poly or poly_degree(poly) < 1:
            raise ValueError("polynomial must be non-constant")
        candidates: list[tuple[IntPoly, int]] = []
        for f, _ in intpoly.factor_int_poly(poly):
            for i in range(poly_degree(f)):
                candidates.append((f, i))
        bits = 16
        while True:
            hits = [
                (f, i) for f, i in candidates
                if croot_box(_croot(f, i), bits).intersects(rect)
            ]
            if len(hits) == 1:
                return AlgNum.from_croot(*hits[0])
            if not hits:
                raise ValueError("rectangle contains no root of the polynomial")
            bits *= 2
            if bits > 1 << 14:
                raise ValueError(
                    "rectangle does not isolate a single root of the polynomial"
                )

    @staticmethod
    def root_of_unity(k: int, n: int) -> "AlgNum":
        """e^(2*pi*i*k/n)."""
        if n <= 0:
            raise ValueError("order must be positive")
        k %= n
        g = gcd(k, n) if k else n
        k2, n2 = (k // g, n // g) if k else (0, 1)
        if n2 == 1:
            return AlgNum.from_rational(1)
        if n2 == 2:
            return AlgNum.from_rational(-1)
        key = (k2, n2)
        cached = _UNITY_CACHE.get(key)
        if cached is None:
            poly = intpoly.cyclotomic(n2)
            idx = select_root_index(poly, lambda b: unit_circle_box(k2, n2, b))
            cached = AlgNum.from_croot(poly, idx)
            _UNITY_CACHE[key] = cached
        return cached

    # -- basic structure ----------------------------------------------------

    def is_rational(self) -> bool:
        return self.field.is_rational_elem(self.coeffs)

    def as_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not a rational number")
        if self.field.is_rational_field:
            # element = c0 (generator occurs with coefficient 0)
            return self.coeffs[0]
        return self.coeffs[0]

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def __hash__(self):
        return hash((self.field.key, self.coeffs))

    def __eq__(self, other):
        if not isinstance(other, AlgNum):
            other = _coerce(other)
            if other is None:
                return NotImplemented
        return alg_eq(self, other)

    def __repr__(self):
        box = self.enclosure(20)
        re = float(box.mid_re)
        im = float(box.mid_im)
        return f"AlgNum(~{re:.6g}{'+' if im >= 0 else ''}{im:.6g}i)"

    # -- arithmetic ---------------------------------------------------------

    def _binary(self, other, op):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if self.field is other.field:
            F = self.field
            return AlgNum(F, getattr(F, op)(self.coeffs, other.coeffs))
        F, p1, p2 = join(self.field, other.field)
        a = embed(F, p1, self.coeffs)
        b = embed(F, p2, other.coeffs)
        return AlgNum(F, getattr(F, op)(a, b))

    def __add__(self, other):
        return self._binary(other, "add")

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, "sub")

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        return self._binary(other, "mul")

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, "div")

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other / self

    def __neg__(self):
        return AlgNum(self.field, self.field.neg(self.coeffs))

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        return AlgNum(self.field, self.field.pow(self.coeffs, n))

    # -- enclosures and refinement -----------------------------------------

    def enclosure(self, bits: int) -> RatRect:
        """Certified rectangle of side <= 2**-bits containing the value."""
        box = self.field.elem_box(self.coeffs, bits)
        if self._box is not None:
            box = box.intersect(self._box)
        self._box = box
        return box

    def refine(self, n: int) -> RatRect:
        """Isolating rectangle with max side <= 2**-n (cached).

        Degenerates to an interval (im = [0,0]) when the number is real.
        """
        box = self.enclosure(n)
        if self.is_real() and not box.is_degenerate_real:
            box = RatRect(box.re, RatInterval.point(0))
            self._box = box
        self._refinements.append(box)
        return box

    @property
    def cached_refinements(self) -> list[RatRect]:
        return list(self._refinements)

    @property
    def rect(self) -> RatRect:
        if self._refinements:
            return self._refinements[-1]
        return self.refine(8)

    # -- defining polynomial ------------------------------------------------

    @property
    def defining_poly(self) -> IntPoly:
        """The (irreducible, primitive) minimal polynomial."""
        self._ensure_minpoly()
        return self._minpoly

    def _ensure_minpoly(self):
        if self._minpoly is not None:
            return
        if self.is_rational():
            v = self.coeffs[0]
            self._minpoly = primitive((-v.numerator, v.denominator))
            self._mp_index = 0
            return
        F = self.field
        t, xx = sp.symbols("t x")
        den = 1
        for c in self.coeffs:
            den = den * c.denominator // gcd(den, c.denominator)
        gint = [int(c * den) for c in self.coeffs]
        gexpr = sum(c * t ** i for i, c in enumerate(gint))
        pexpr = sum(int(c) * t ** i for i, c in enumerate(F.poly))
        res = sp.resultant(pexpr, den * xx - gexpr, t)
        cand = primitive(
            intpoly.from_sympy(sp.Poly(res, xx))
        )
        factors = intpoly.factor_int_poly(cand)
        pairs = [(f, i) for f, _ in factors for i in range(poly_degree(f))]
        bits = 16
        while True:
            box = self.enclosure(bits)
            hits = [
                (f, i) for f, i in pairs
                if croot_box(_croot(f, i), bits).intersects(box)
            ]
            if len(hits) == 1:
                f, i = hits[0]
                if poly_degree(f) == 1:
                    # rational after all (cannot happen for non-rational
                    # coefficients, but keep the invariant airtight)
                    self._minpoly, self._mp_index = f, 0
                else:
                    self._minpoly, self._mp_index = f, i
                return
            if not hits:
                raise RuntimeError("minimal polynomial selection lost the root")
            bits *= 2

    def defining_root(self):
        self._ensure_minpoly()
        if poly_degree(self._minpoly) == 1:
            return None
        return _croot(self._minpoly, self._mp_index)

    # -- realness, signs, conjugation --------------------------------------

    def is_real(self) -> bool:
        if self._is_real is None:
            if self.field.generator_is_real or self.is_rational():
                self._is_real = True
            else:
                root = self.defining_root()
                self._is_real = True if root is None else bool(root.is_real)
        return self._is_real

    def conj(self) -> "AlgNum":
        if self._conj is not None:
            return self._conj
        if self.is_real():
            self._conj = self
            return self
        order = intpoly.root_of_unity_order(self.field.poly)
        if order is not None:
            # cyclotomic generator g has |g| = 1, so conjugation is the
            # field automorphism g -> g^(order-1); staying in the same
            # field avoids an expensive compositum later
            deg = self.field.degree
            gen = AlgNum(self.field,
                         (Fraction(0), Fraction(1)) + (Fraction(0),) *
                         (deg - 2))
            gbar = gen ** (order - 1)
            out = AlgNum(self.field, (Fraction(0),) * deg)
            for c in reversed(self.coeffs):
                out = out * gbar + AlgNum.from_rational(c)
            self._conj = out
            out._conj = self
            return out
        p = self.defining_poly
        idx = select_root_index(p, lambda b: self.enclosure(b).conj())
        out = AlgNum.from_croot(p, idx)
        self._conj = out
        out._conj = self
        return out


_UNITY_CACHE: dict[tuple[int, int], AlgNum] = {}
_CROOTS: dict[tuple[IntPoly, int], sp.Basic] = {}
_I_IDX: list[int] = []


def _croot(poly: IntPoly, index: int):
    key = (poly, index)
    r = _CROOTS.get(key)
    if r is None:
        r = sp.CRootOf(
            sp.Poly(list(reversed(poly)), sp.Symbol("x")), index, radicals=False
        )
        _CROOTS[key] = r
    return r


def _I_INDEX() -> int:
    if not _I_IDX:
        _I_IDX.append(
            select_root_index((1, 0, 1), lambda b: RatRect.point(0, 1))
        )
    return _I_IDX[0]


def _coerce(v) -> AlgNum | None:
    if isinstance(v, AlgNum):
        return v
    if isinstance(v, (int, Fraction)):
        return AlgNum.from_rational(v)
    if isinstance(v, GaussRat):
        return AlgNum.from_gauss(v)
    return None


def as_algnum(v) -> AlgNum:
    a = _coerce(v)
    if a is None:
        raise TypeError(f"cannot interpret {v!r} as an algebraic number")
    return a


# ---------------------------------------------------------------------------
# Spec operations (functional surface)
# ---------------------------------------------------------------------------


def alg_add(a, b) -> AlgNum:
    return as_algnum(a) + as_algnum(b)


def alg_sub(a, b) -> AlgNum:
    return as_algnum(a) - as_algnum(b)


def alg_mul(a, b) -> AlgNum:
    return as_algnum(a) * as_algnum(b)


def alg_div(a, b) -> AlgNum:
    b = as_algnum(b)
    if b.is_zero():
        raise ZeroDivisionError("division by zero algebraic number")
    return as_algnum(a) / b


def alg_conj(a) -> AlgNum:
    return as_algnum(a).conj()


def alg_re(a) -> AlgNum:
    a = as_algnum(a)
    if a.is_real():
        return a
    return (a + a.conj()) / 2


def alg_im(a) -> AlgNum:
    a = as_algnum(a)
    if a.is_real():
        return AlgNum.from_rational(0)
    return (a - a.conj()) / (AlgNum.i_unit() * 2)


def alg_abs(a) -> AlgNum:
    """|a| as an exact algebraic number."""
    a = as_algnum(a)
    if a.is_zero():
        return AlgNum.from_rational(0)
    if a.is_rational():
        return AlgNum.from_rational(abs(a.as_rational()))
    s = a * a.conj()  # = |a|^2, real and positive
    return alg_sqrt_nonneg(s)


def alg_sqrt_nonneg(s: AlgNum) -> AlgNum:
    """Square root of a real algebraic number s >= 0."""
    s = as_algnum(s)
    if not s.is_real():
        raise ValueError("sqrt requires a real operand")
    if s.is_rational():
        v = s.as_rational()
        if v < 0:
            raise ValueError("sqrt of negative number")
        ns, ds = v.numerator, v.denominator
        from math import isqrt

        rn, rd = isqrt(ns), isqrt(ds)
        if rn * rn == ns and rd * rd == ds:
            return AlgNum.from_rational(Fraction(rn, rd))
        cand: IntPoly = (-ns, 0, ds)
    else:
        p = s.defining_poly
        cand = tuple(
            itertools.chain.from_iterable((c, 0) for c in p)
        )[:-1]

    def sqrt_box(bits: int) -> RatRect:
        box = s.enclosure(bits)
        lo = max(Fraction(0), box.re.lo)
        hi = max(Fraction(0), box.re.hi)
        slo, _ = frac_sqrt_bounds(lo, bits)
        _, shi = frac_sqrt_bounds(hi, bits)
        return RatRect.from_bounds(slo, shi, 0, 0)

    factors = intpoly.factor_int_poly(cand)
    pairs = [(f, i) for f, _ in factors for i in range(poly_degree(f))]
    bits = 16
    while True:
        target = sqrt_box(bits)
        hits = [
            (f, i) for f, i in pairs
            if croot_box(_croot(f, i), bits).intersects(target)
        ]
        if len(hits) == 1:
            return AlgNum.from_croot(*hits[0])
        if not hits:
            raise RuntimeError("sqrt root selection failed")
        bits *= 2


def alg_pow(a, n: int) -> AlgNum:
    return as_algnum(a) ** n


def is_zero(a) -> bool:
    return as_algnum(a).is_zero()


def alg_eq(a, b) -> bool:
    a, b = as_algnum(a), as_algnum(b)
    if a.field is b.field:
        return a.coeffs == b.coeffs
    return (a - b).is_zero()


def real_sign(a) -> int:
    """Exact sign (-1, 0, 1) of a real algebraic number."""
    a = as_algnum(a)
    if not a.is_real():
        raise ValueError("real_sign requires a real operand")
    if a.is_zero():
        return 0
    if a.is_rational():
        return 1 if a.as_rational() > 0 else -1
    bits = 16
    while True:
        s = a.enclosure(bits).re.sign()
        if s is not None:
            return s
        bits *= 2


def real_cmp(a, b) -> int:
    """-1, 0, 1 comparing two real algebraic numbers."""
    return real_sign(as_algnum(a) - as_algnum(b))


def upper_bound_norm(z) -> Fraction:
    """Rational upper bound on |z| (dyadic, via refinement)."""
    z = as_algnum(z)
    _, hi = z.enclosure(16).mag_bounds()
    return hi


def lower_bound_norm(z) -> Fraction:
    """Rational 0 < lower <= |z|; error for z = 0."""
    z = as_algnum(z)
    if z.is_zero():
        raise ValueError("lower_bound_norm of zero")
    bits = 16
    while True:
        box = z.enclosure(bits)
        lo, _ = box.mag_bounds(bits)
        if lo > 0:
            return lo
        bits *= 2


def is_root_of_unity(z) -> int | None:
    """The order n with z**n = 1 (minimal), or None."""
    z = as_algnum(z)
    if z.is_zero():
        return None
    if z.is_rational():
        v = z.as_rational()
        if v == 1:
            return 1
        if v == -1:
            return 2
        return None
    return intpoly.root_of_unity_order(z.defining_poly)


# -- sign of real/imaginary part with interval fast path --------------------


def sign_re(z, max_fast_bits: int = 128) -> int:
    z = as_algnum(z)
    if z.is_zero():
        return 0
    bits = 16
    while bits <= max_fast_bits:
        s = z.enclosure(bits).re.sign()
        if s is not None:
            return s
        bits *= 2
    r = z + z.conj()  # = 2 Re(z), real
    return real_sign(r)


def sign_im(z, max_fast_bits: int = 128) -> int:
    z = as_algnum(z)
    if z.is_zero():
        return 0
    bits = 16
    while bits <= max_fast_bits:
        s = z.enclosure(bits).im.sign()
        if s is not None:
            return s
        bits *= 2
    if z.is_real():
        return 0
    return real_sign((z - z.conj()) / (AlgNum.i_unit() * 2))


# -- argument interval test -------------------------------------------------


def _arg_in_cone(w: AlgNum, theta: Fraction) -> bool:
    """Arg(w) in [0, 2*pi*theta] for 0 <= theta <= 1/4, w != 0."""
    if sign_im(w) < 0:
        return False
    if sign_re(w) < 0:
        return False
    if theta == Fraction(1, 4):
        return True
    rot = AlgNum.root_of_unity(-theta.numerator, theta.denominator)
    return sign_im(w * rot) <= 0


def arg_in_interval(z, a, b) -> bool:
    """Exact test Arg(z) in [2*pi*a, 2*pi*b] for rationals 0<=a<=b<=1.

    The endpoint 0/2*pi is treated cyclically: an argument of 0 satisfies a
    window ending at b = 1.
    """
    z = as_algnum(z)
    if z.is_zero():
        raise ValueError("argument of zero is undefined")
    a, b = Fraction(a), Fraction(b)
    if a > b:
        raise ValueError("need a <= b")
    if b - a >= 1:
        return True
    # split [a, b] into pieces of length <= 1/4
    pieces = []
    c = a
    while c < b:
        d = min(b, c + Fraction(1, 4))
        pieces.append((c, d))
        c = d
    if not pieces:
        pieces = [(a, a)]
    for c, d in pieces:
        if c == 0:
            w = z
        else:
            w = z * AlgNum.root_of_unity(-c.numerator, c.denominator)
        if _arg_in_cone(w, d - c):
            return True
    return False


# ---------------------------------------------------------------------------
# sigma(n) plans
# ---------------------------------------------------------------------------


@dataclass
class ArgSequencePlan:
    """Computable sigma with n <= sigma(n) <= n + bound_k - 1 and
    cos(sigma(n)*theta) <= -margin_C, sin(sigma(n)*theta) <= -margin_C,
    where theta = Arg(base / |base|)."""

    generator: str
    bound_k: int
    margin_C: Fraction
    base: AlgNum
    kind: str = "dense"
    modulus: int = 0
    residue: int = 0
    unit: AlgNum | None = None
    window: tuple[Fraction, Fraction] = (Fraction(7, 12), Fraction(8, 12))


_SIGMA_WINDOW = (Fraction(7, 12), Fraction(8, 12))


def _unit_direction(z: AlgNum) -> AlgNum:
    """z/|z| as an exact algebraic number."""
    norm2 = z * z.conj()
    if alg_eq(norm2, 1):
        return z
    return z / alg_abs(z)


def unit_direction(z) -> AlgNum:
    """z/|z| as an exact algebraic number (z nonzero)."""
    z = as_algnum(z)
    if z.is_zero():
        raise ValueError("unit direction of zero")
    return _unit_direction(z)


def sigma_plan(z) -> ArgSequencePlan:
    """Plan for the sigma(n) sequence of a base z not in R or iR."""
    z = as_algnum(z)
    if z.is_zero() or z.is_real():
        raise ValueError("sigma_plan requires a non-real base")
    if sign_re(z) == 0:
        raise ValueError("sigma_plan requires a base off the imaginary axis")
    unit = _unit_direction(z)
    order = is_root_of_unity(unit)
    if order is not None:
        k = order
        # k in {1,2} -> real, k = 4 -> imaginary axis; both excluded above
        if k in (1, 2, 4):
            raise RuntimeError("excluded base slipped through the axis tests")
        # find j with unit = e^(2*pi*i*j/k)
        j = next(
            jj for jj in range(1, k)
            if gcd(jj, k) == 1 and alg_eq(unit, AlgNum.root_of_unity(jj, k))
        )
        # l with k/2 < l < 3k/4, i.e. 2*pi*l/k strictly inside (pi, 3*pi/2)
        l = next(ll for ll in range(1, k) if 2 * ll > k and 4 * ll < 3 * k)
        # solve sigma * j == l (mod k)
        jinv = pow(j, -1, k)
        residue = (l * jinv) % k
        # exact margin: both cos and sin of 2*pi*l/k are <= -C
        box = unit_circle_box(l, k, 40)
        C = min(-box.re.hi, -box.im.hi)
        assert C > 0
        return ArgSequencePlan(
            generator=f"sigma(n) = n + ((r - n) mod {k}), r = {residue}"
                      f" (root of unity of order {k}, power lands on 2*pi*{l}/{k})",
            bound_k=k,
            margin_C=C,
            base=z,
            kind="cyclic",
            modulus=k,
            residue=residue,
            unit=unit,
        )
    # dense case: irrational rotation; window [7/12, 8/12] gives margin 1/2
    j, direction = _near_zero_multiple(unit)
    delta_lo = _arc_distance_lower_bound(unit, j)
    M = _ceil_frac(1 / delta_lo)
    bound_k = j * M + 1
    return ArgSequencePlan(
        generator=f"smallest sigma >= n with Arg(unit^sigma) in "
                  f"[2*pi*7/12, 2*pi*8/12]; step multiple j={j}",
        bound_k=bound_k,
        margin_C=Fraction(1, 2),
        base=z,
        kind="dense",
        unit=unit,
    )


def _near_zero_multiple(unit: AlgNum) -> tuple[int, int]:
    """j <= 12 with Arg(unit^j) within 2*pi/12 of 0 (mod 2*pi), plus the
    side (+1: in (0, 1/12], -1: in [11/12, 1))."""
    w = unit
    for j in range(1, 13):
        if arg_in_interval(w, 0, Fraction(1, 12)):
            return j, 1
        if arg_in_interval(w, Fraction(11, 12), 1):
            return j, -1
        w = w * unit
    raise RuntimeError("pigeonhole failure: no near-zero multiple below 13")


def _arc_distance_lower_bound(unit: AlgNum, j: int) -> Fraction:
    """Rational lower bound on the circular distance of Arg(unit^j)/2pi
    from 0.

    For w on the unit circle at angle phi: |Im w| = |sin phi| <= the angle
    distance to the real axis, so dist(phi, 0)/2pi >= |Im w|/7 once the
    enclosure of w excludes the real axis (and >= 1/4 when Re w < 0).
    """
    w = unit ** j
    bits = 8
    while bits <= 1 << 12:
        box = w.refine(bits)
        if box.re.hi < 0:
            return Fraction(1, 4)
        if box.im.lo > 0 or box.im.hi < 0:
            a = box.im.lo if box.im.lo > 0 else -box.im.hi
            return a / 7
        bits *= 2
    raise RuntimeError("failed to bound the rotation step away from zero")


def sigma_eval(plan: ArgSequencePlan, n: int) -> int:
    """Evaluate sigma(n) for the given plan."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if plan.kind == "cyclic":
        k, r = plan.modulus, plan.residue
        return n + ((r - n) % k)
    a, b = plan.window
    w = plan.unit ** n
    s = n
    while True:
        if arg_in_interval(w, a, b):
            return s
        w = w * plan.unit
        s += 1
        if s - n > 10 * plan.bound_k:
            raise RuntimeError("sigma search exceeded its certified bound")


# ---------------------------------------------------------------------------
# Powers with large real part
# ---------------------------------------------------------------------------


def _norm_gt_one(z: AlgNum) -> bool:
    return real_cmp(z * z.conj(), AlgNum.from_rational(1)) > 0


def _norm_lower_bound_above_one(z: AlgNum) -> Fraction:
    """Rational L with 1 < L <= |z| (requires |z| > 1)."""
    bits = 16
    while True:
        lo, _ = z.enclosure(bits).mag_bounds(bits)
        if lo > 1:
            return lo
        bits *= 2
        if bits > 1 << 14:
            raise RuntimeError("failed to separate |z| from 1")


def large_real_power(z, x, want_negative: bool = False) -> int:
    """n with Re(z**n) >= x (or <= -x when want_negative); requires |z|>1."""
    z = as_algnum(z)
    x = Fraction(x)
    if x <= 0:
        raise ValueError("x must be positive")
    if not _norm_gt_one(z):
        raise ValueError("large_real_power requires |z| > 1")
    if z.is_real():
        v = z
        sgn = real_sign(v)
        if sgn > 0 and want_negative:
            raise ValueError("positive real base cannot reach negative real part")
        n = 1
        w = v
        while True:
            s = real_cmp(w, AlgNum.from_rational(-x) if want_negative
                         else AlgNum.from_rational(x))
            if want_negative and s <= 0:
                return n
            if not want_negative and s >= 0:
                return n
            w = w * v
            n += 1
            if n > 10000:
                raise RuntimeError("power search runaway (real case)")
    L = _norm_lower_bound_above_one(z)
    unit = _unit_direction(z)
    order = is_root_of_unity(unit)
    if order is not None:
        k = order
        if not want_negative:
            # z^(mk) = |z|^(mk) > 0
            m = 1
            while L ** (m * k) < x:
                m += 1
            return m * k
        m0 = next(
            mm for mm in range(1, k + 1) if sign_re(unit ** mm) < 0
        )
        # rational bound 0 < r_lo <= -Re(unit^m0)
        u = unit ** m0
        bits = 16
        while True:
            box = u.enclosure(bits)
            if box.re.hi < 0:
                r_lo = -box.re.hi
                break
            bits *= 2
        m = 0
        while L ** (m0 + m * k) * r_lo < x:
            m += 1
        return m0 + m * k
    # dense case: arguments are equidistributed; search for a window hit
    window = (Fraction(7, 12), Fraction(8, 12)) if want_negative \
        else (Fraction(1, 12), Fraction(1, 6))
    n_min = 1
    while L ** n_min < 2 * x:
        n_min += 1
    w = z ** n_min
    n = n_min
    while True:
        if arg_in_interval(w, *window):
            return n
        w = w * z
        n += 1
        if n - n_min > 100000:
            raise RuntimeError("power search runaway (dense case)")


# ---------------------------------------------------------------------------
# Heights and lower bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HeightProfile:
    """Degree and (rational upper bounds on) the usual height, the Mahler
    measure, and the absolute logarithmic height of an algebraic number."""

    degree: int
    usual_height: Fraction
    mahler: Fraction
    abs_log_height: Fraction


@dataclass(frozen=True)
class LowerBound:
    """C > 1 with |Z_Tutte(G; q, gamma)| >= C**(-size(G)) whenever nonzero."""

    C: Fraction
    for_q: "AlgNum"
    for_gamma: "AlgNum"


def height_profile(a) -> HeightProfile:
    a = as_algnum(a)
    p = a.defining_poly
    d = poly_degree(p)
    H = Fraction(max(abs(c) for c in p))
    _, sq_hi = frac_sqrt_bounds(Fraction(d + 1), 24)
    M_ub = H * sq_hi
    h_ub = rat_ln_upper(max(M_ub, Fraction(1))) / d
    return HeightProfile(degree=d, usual_height=H, mahler=M_ub, abs_log_height=h_ub)


def lower_bound_constant(q, gamma) -> LowerBound:
    """C with |Z_Tutte(G;q,gamma)| >= C**(-size(G)) for all G with Z != 0.

    Follows c = D*(2 + h(q) + h(gamma)), D <= d(q)*d(gamma), C > e^(2c).
    """
    q, gamma = as_algnum(q), as_algnum(gamma)
    hq = height_profile(q)
    hg = height_profile(gamma)
    D = hq.degree * hg.degree
    c = D * (2 + hq.abs_log_height + hg.abs_log_height)
    C = exp_upper(2 * c) + 1
    return LowerBound(C=C, for_q=q, for_gamma=gamma)


def ratio_degree_height_bound(q, gamma, n_vertices: int, m_edges: int
                              ) -> tuple[int, Fraction]:
    """(degree bound, height bound) for Z_{s|t}/Z_st at (q, gamma) on a
    graph with n vertices and m edges."""
    q, gamma = as_algnum(q), as_algnum(gamma)
    hq = height_profile(q)
    hg = height_profile(gamma)
    d = hq.degree * hg.degree
    # (2^(m+1/2) e^(n h(q) + m h(gamma)))^(2d), over-approximated rationally
    expo = n_vertices * hq.abs_log_height + m_edges * hg.abs_log_height
    base = Fraction(2) ** (m_edges + 1) * exp_upper(expo)
    return d, base ** (2 * d)
