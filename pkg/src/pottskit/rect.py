"""Certified rational interval and rectangle arithmetic.

All enclosures are closed boxes with `fractions.Fraction` endpoints.  Every
operation is outward-conservative: the result box contains every value
obtainable from points of the operand boxes.  This is the workhorse behind
sign determination, norm bounds and refinement of algebraic numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Union

RatLike = Union[int, Fraction]


def _frac(v: RatLike) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def frac_sqrt_bounds(x: Fraction, bits: int = 32) -> tuple[Fraction, Fraction]:
    """Dyadic (lo, hi) with lo**2 <= x <= hi**2, hi - lo <= 2**(1-bits)-ish.

    Requires x >= 0.
    """
    if x < 0:
        raise ValueError("sqrt of negative rational")
    if x == 0:
        return Fraction(0), Fraction(0)
    scale = 1 << (2 * bits)
    n = isqrt((x.numerator * scale) // x.denominator)
    lo = Fraction(n, 1 << bits)
    hi = Fraction(n + 2, 1 << bits)
    # guard against the floor in the scaled isqrt
    while lo * lo > x:
        lo -= Fraction(1, 1 << bits)
    while hi * hi < x:
        hi += Fraction(1, 1 << bits)
    if lo < 0:
        lo = Fraction(0)
    return lo, hi


@dataclass(frozen=True)
class RatInterval:
    """Closed interval [lo, hi] with rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @staticmethod
    def point(v: RatLike) -> "RatInterval":
        v = _frac(v)
        return RatInterval(v, v)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __add__(self, o: "RatInterval") -> "RatInterval":
        return RatInterval(self.lo + o.lo, self.hi + o.hi)

    def __sub__(self, o: "RatInterval") -> "RatInterval":
        return RatInterval(self.lo - o.hi, self.hi - o.lo)

    def __neg__(self) -> "RatInterval":
        return RatInterval(-self.hi, -self.lo)

    def __mul__(self, o: "RatInterval") -> "RatInterval":
        c = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return RatInterval(min(c), max(c))

    def scale(self, v: RatLike) -> "RatInterval":
        v = _frac(v)
        if v >= 0:
            return RatInterval(self.lo * v, self.hi * v)
        return RatInterval(self.hi * v, self.lo * v)

    def shift(self, v: RatLike) -> "RatInterval":
        v = _frac(v)
        return RatInterval(self.lo + v, self.hi + v)

    def recip(self) -> "RatInterval":
        if self.contains_zero():
            raise ZeroDivisionError("interval contains zero")
        return RatInterval(1 / self.hi, 1 / self.lo)

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def contains(self, v: RatLike) -> bool:
        v = _frac(v)
        return self.lo <= v <= self.hi

    def contains_interval(self, o: "RatInterval") -> bool:
        return self.lo <= o.lo and o.hi <= self.hi

    def intersects(self, o: "RatInterval") -> bool:
        return not (self.hi < o.lo or o.hi < self.lo)

    def intersect(self, o: "RatInterval") -> "RatInterval":
        return RatInterval(max(self.lo, o.lo), min(self.hi, o.hi))

    def sq(self) -> "RatInterval":
        """Enclosure of {v*v : v in self}; tighter than self*self."""
        if self.lo >= 0:
            return RatInterval(self.lo * self.lo, self.hi * self.hi)
        if self.hi <= 0:
            return RatInterval(self.hi * self.hi, self.lo * self.lo)
        return RatInterval(Fraction(0), max(self.lo * self.lo, self.hi * self.hi))

    def sign(self) -> int | None:
        """Certified sign, or None when the interval straddles zero."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == self.hi == 0:
            return 0
        return None

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2


@dataclass(frozen=True)
class RatRect:
    """Axis-aligned box in C: re in [re.lo, re.hi], im in [im.lo, im.hi]."""

    re: RatInterval
    im: RatInterval

    @staticmethod
    def point(re: RatLike, im: RatLike = 0) -> "RatRect":
        return RatRect(RatInterval.point(re), RatInterval.point(im))

    @staticmethod
    def from_bounds(re_lo, re_hi, im_lo, im_hi) -> "RatRect":
        return RatRect(
            RatInterval(_frac(re_lo), _frac(re_hi)),
            RatInterval(_frac(im_lo), _frac(im_hi)),
        )

    @property
    def is_degenerate_real(self) -> bool:
        return self.im.lo == self.im.hi == 0

    @property
    def side(self) -> Fraction:
        return max(self.re.width, self.im.width)

    def __add__(self, o: "RatRect") -> "RatRect":
        return RatRect(self.re + o.re, self.im + o.im)

    def __sub__(self, o: "RatRect") -> "RatRect":
        return RatRect(self.re - o.re, self.im - o.im)

    def __neg__(self) -> "RatRect":
        return RatRect(-self.re, -self.im)

    def __mul__(self, o: "RatRect") -> "RatRect":
        return RatRect(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )

    def scale(self, v: RatLike) -> "RatRect":
        return RatRect(self.re.scale(v), self.im.scale(v))

    def conj(self) -> "RatRect":
        return RatRect(self.re, -self.im)

    def contains_zero(self) -> bool:
        return self.re.contains_zero() and self.im.contains_zero()

    def contains_point(self, re: RatLike, im: RatLike = 0) -> bool:
        return self.re.contains(re) and self.im.contains(im)

    def contains_rect(self, o: "RatRect") -> bool:
        return self.re.contains_interval(o.re) and self.im.contains_interval(o.im)

    def intersects(self, o: "RatRect") -> bool:
        return self.re.intersects(o.re) and self.im.intersects(o.im)

    def intersect(self, o: "RatRect") -> "RatRect":
        return RatRect(self.re.intersect(o.re), self.im.intersect(o.im))

    def mag_sq(self) -> RatInterval:
        return self.re.sq() + self.im.sq()

    def recip(self) -> "RatRect":
        m = self.mag_sq()
        if m.contains_zero():
            raise ZeroDivisionError("rectangle contains zero")
        inv = m.recip()
        return RatRect(self.re * inv, (-self.im) * inv)

    def div(self, o: "RatRect") -> "RatRect":
        return self * o.recip()

    def pow(self, n: int) -> "RatRect":
        if n < 0:
            return self.recip().pow(-n)
        result = RatRect.point(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def mag_bounds(self, bits: int = 32) -> tuple[Fraction, Fraction]:
        """Rational (lo, hi) with lo <= |z| <= hi for every z in the box."""
        m = self.mag_sq()
        lo, _ = frac_sqrt_bounds(m.lo, bits)
        _, hi = frac_sqrt_bounds(m.hi, bits)
        return lo, hi

    @property
    def mid_re(self) -> Fraction:
        return self.re.mid

    @property
    def mid_im(self) -> Fraction:
        return self.im.mid
