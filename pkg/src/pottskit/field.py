"""Number fields Q(theta) with certified generator enclosures.

A `NumberField` is an irreducible primitive integer polynomial together
with a root index (sympy `CRootOf` ordering).  Field elements are plain
tuples of `Fraction` coefficients (lowest power of theta first); all
element arithmetic happens here so the scalar layer stays fast.

Fields are joined on demand via sympy's primitive_element; joins and
embeddings are cached process-wide.
"""

from __future__ import annotations

from fractions import Fraction

import sympy as sp
from sympy import CRootOf
from sympy.abc import x as _X

from . import intpoly
from .intpoly import IntPoly, degree, primitive, strip
from .rect import RatRect

Vec = tuple[Fraction, ...]


def to_frac(v) -> Fraction:
    """Convert int/mpq/sympy Rational to Fraction."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    n = getattr(v, "numerator", None)
    if n is not None:
        return Fraction(int(v.numerator), int(v.denominator))
    r = sp.Rational(v)
    return Fraction(int(r.p), int(r.q))


def croot_box(root, bits: int) -> RatRect:
    """Isolating box of an algebraic-number expression, side <= 2**-bits.

    Accepts a plain `CRootOf`, a rational number, or (what `CRootOf`
    returns after its internal rescaling preprocessing) a polynomial
    expression with rational coefficients in a single `CRootOf` atom.
    """
    from sympy.polys.rootoftools import ComplexRootOf

    if isinstance(root, ComplexRootOf):
        tol = sp.Rational(1, 1 << bits)
        if root.is_real:
            root.eval_rational(tol)
            iv = root._get_interval()
            return RatRect.from_bounds(to_frac(iv.a), to_frac(iv.b), 0, 0)
        root.eval_rational(tol, tol)
        iv = root._get_interval()
        return RatRect.from_bounds(
            to_frac(iv.ax), to_frac(iv.bx), to_frac(iv.ay), to_frac(iv.by)
        )
    if root.is_Rational:
        return RatRect.point(to_frac(root))
    atoms = list(root.atoms(ComplexRootOf))
    if len(atoms) != 1:
        raise TypeError(f"cannot compute enclosure of {root!r}")
    inner = atoms[0]
    coeffs = [
        to_frac(c) for c in reversed(sp.Poly(root, inner).all_coeffs())
    ]
    b = bits
    while True:
        out = intpoly.poly_eval_rect(coeffs, croot_box(inner, b))
        if out.side <= sp.Rational(1, 1 << bits):
            return out
        b *= 2


def poly_roots(p: IntPoly) -> list[CRootOf]:
    return sp.Poly(list(reversed(p)), _X).all_roots(radicals=False)


def select_root_index(p: IntPoly, box_fn, start_bits: int = 16) -> int:
    """Index of the unique root of p inside the target enclosure.

    `box_fn(bits)` must return a box that always contains the target value;
    the target must be a root of p.  Refines both sides until exactly one
    root's isolating box intersects the target's.
    """
    roots = poly_roots(p)
    bits = start_bits
    while True:
        target = box_fn(bits)
        hits = [
            i for i, r in enumerate(roots) if croot_box(r, bits).intersects(target)
        ]
        if len(hits) == 1:
            return hits[0]
        if not hits:
            raise ValueError("target enclosure excludes every root (bad input)")
        bits *= 2
        if bits > 1 << 16:
            raise RuntimeError("root selection failed to separate candidates")


_FIELDS: dict[tuple[IntPoly, int], "NumberField"] = {}


class NumberField:
    """Q(theta) for theta = the root_index-th root of poly (CRootOf order)."""

    def __init__(self, poly: IntPoly, root_index: int):
        poly = primitive(strip(poly))
        self.poly = poly
        self.root_index = root_index
        self.degree = degree(poly)
        self.key = (poly, root_index)
        lead = Fraction(poly[-1])
        self._monic = tuple(Fraction(c) / lead for c in poly)
        self._root: CRootOf | None = None
        self._box: RatRect | None = None
        self._box_bits = 0
        # theta^k for k = degree .. 2*degree-2, as coefficient vectors
        self._red: list[Vec] = []
        d = self.degree
        if d >= 1:
            cur = [Fraction(0)] * d
            # theta^d = -(monic tail)
            top = [-c for c in self._monic[:-1]]
            cur = list(top)
            self._red.append(tuple(cur))
            for _ in range(d - 2):
                # multiply by theta and reduce
                nxt = [Fraction(0)] + cur[:-1]
                if cur[-1]:
                    for i in range(d):
                        nxt[i] += cur[-1] * top[i]
                cur = nxt
                self._red.append(tuple(cur))

    @staticmethod
    def get(poly: IntPoly, root_index: int) -> "NumberField":
        poly = primitive(strip(poly))
        key = (poly, root_index)
        f = _FIELDS.get(key)
        if f is None:
            f = NumberField(poly, root_index)
            _FIELDS[key] = f
        return f

    def __repr__(self):
        return f"NumberField({self.poly}, {self.root_index})"

    @property
    def is_rational_field(self) -> bool:
        return self.degree == 1

    @property
    def root(self) -> CRootOf:
        if self._root is None:
            if self.is_rational_field:
                raise ValueError("rational field has no CRootOf generator")
            self._root = CRootOf(
                sp.Poly(list(reversed(self.poly)), _X), self.root_index,
                radicals=False,
            )
        return self._root

    @property
    def generator_is_real(self) -> bool:
        if self.is_rational_field:
            return True
        return bool(self.root.is_real)

    def generator_box(self, bits: int) -> RatRect:
        if self.is_rational_field:
            v = -Fraction(self.poly[0], self.poly[1])
            return RatRect.point(v)
        if self._box is None or self._box_bits < bits:
            box = croot_box(self.root, bits)
            if self._box is not None:
                box = box.intersect(self._box)
            self._box = box
            self._box_bits = bits
        return self._box

    # -- element arithmetic (vectors lowest-first, length == degree) --------

    def zero(self) -> Vec:
        return tuple([Fraction(0)] * self.degree)

    def one(self) -> Vec:
        return self.from_rational(Fraction(1))

    def from_rational(self, v) -> Vec:
        out = [Fraction(0)] * self.degree
        out[0] = Fraction(v)
        return tuple(out)

    def generator(self) -> Vec:
        if self.degree == 1:
            return self.from_rational(-Fraction(self.poly[0], self.poly[1]))
        out = [Fraction(0)] * self.degree
        out[1] = Fraction(1)
        return tuple(out)

    def add(self, a: Vec, b: Vec) -> Vec:
        return tuple(x + y for x, y in zip(a, b))

    def sub(self, a: Vec, b: Vec) -> Vec:
        return tuple(x - y for x, y in zip(a, b))

    def neg(self, a: Vec) -> Vec:
        return tuple(-x for x in a)

    def scale(self, a: Vec, v: Fraction) -> Vec:
        return tuple(x * v for x in a)

    def mul(self, a: Vec, b: Vec) -> Vec:
        d = self.degree
        if d == 1:
            return (a[0] * b[0],)
        conv = [Fraction(0)] * (2 * d - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        conv[i + j] += ai * bj
        out = conv[:d]
        for k in range(d, 2 * d - 1):
            ck = conv[k]
            if ck:
                red = self._red[k - d]
                for i in range(d):
                    if red[i]:
                        out[i] += ck * red[i]
        return tuple(out)

    def inv(self, a: Vec) -> Vec:
        if all(c == 0 for c in a):
            raise ZeroDivisionError("inverse of zero field element")
        d = self.degree
        if d == 1:
            return (1 / a[0],)
        # extended Euclid: s*a + t*m = 1 over Q[x], m the monic minimal poly
        m = list(self._monic)
        r0, r1 = m, [Fraction(c) for c in a]
        s0, s1 = [Fraction(0)], [Fraction(1)]

        def trim(p):
            while p and p[-1] == 0:
                p.pop()
            return p

        r0, r1 = trim(r0), trim(r1)
        while True:
            if not r1:
                raise ZeroDivisionError("element not invertible (degenerate)")
            if len(r1) == 1:
                break
            # divide r0 by r1
            q = [Fraction(0)] * (len(r0) - len(r1) + 1)
            rem = list(r0)
            while len(rem) >= len(r1) and trim(rem):
                if len(rem) < len(r1):
                    break
                f = rem[-1] / r1[-1]
                sh = len(rem) - len(r1)
                q[sh] = f
                for i, c in enumerate(r1):
                    rem[sh + i] -= f * c
                rem.pop()
                while rem and rem[-1] == 0:
                    rem.pop()
            # s_new = s0 - q*s1
            s_new = [Fraction(0)] * max(len(s0), len(q) + len(s1) - 1)
            for i, c in enumerate(s0):
                s_new[i] += c
            for i, qc in enumerate(q):
                if qc:
                    for j, sc in enumerate(s1):
                        if sc:
                            s_new[i + j] -= qc * sc
            r0, r1 = r1, trim(rem)
            s0, s1 = s1, trim(s_new)
        c = r1[0]
        inv_vec = [v / c for v in s1]
        # reduce mod m (degree should already be < d, but be safe)
        while len(inv_vec) > d:
            k = len(inv_vec) - 1
            top = inv_vec.pop()
            if top:
                red = self._red[k - d]
                for i in range(d):
                    inv_vec[i] += top * red[i]
        inv_vec += [Fraction(0)] * (d - len(inv_vec))
        return tuple(inv_vec)

    def div(self, a: Vec, b: Vec) -> Vec:
        return self.mul(a, self.inv(b))

    def pow(self, a: Vec, n: int) -> Vec:
        if n < 0:
            return self.pow(self.inv(a), -n)
        result = self.one()
        base = a
        while n:
            if n & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            n >>= 1
        return result

    def is_rational_elem(self, a: Vec) -> bool:
        return all(c == 0 for c in a[1:])

    def elem_box(self, a: Vec, bits: int) -> RatRect:
        """Certified enclosure of a(theta) with side <= 2**-bits."""
        if self.is_rational_elem(a):
            return RatRect.point(a[0])
        gen_bits = max(bits, 8)
        target = Fraction(1, 1 << bits)
        while True:
            box = self.generator_box(gen_bits)
            out = intpoly.poly_eval_rect(a, box)
            if out.side <= target:
                return out
            gen_bits *= 2
            if gen_bits > 1 << 20:
                raise RuntimeError("element enclosure failed to converge")


QQ_FIELD = NumberField.get((0, 1), 0)  # theta = 0; elements are rationals


_JOIN_CACHE: dict[tuple, tuple] = {}


def join(f1: NumberField, f2: NumberField):
    """Compositum F of f1, f2 plus embedding power tables.

    Returns (F, pows1, pows2) where pows1[i] is the vector of theta1**i in
    F (length f1.degree), similarly pows2.  Mapping an element of f1 into F
    is sum(c_i * pows1[i]).
    """
    if f1.key == f2.key:
        pows = _power_table(f1, f1.generator())
        return f1, pows, pows
    # a degree-1 field's element (c0,) is just the rational c0 = c0 * theta^0,
    # so its embedding power table is the single vector "one"
    if f1.is_rational_field:
        return f2, [f2.one()], _power_table(f2, f2.generator())
    if f2.is_rational_field:
        return f1, _power_table(f1, f1.generator()), [f1.one()]
    key = (f1.key, f2.key)
    cached = _JOIN_CACHE.get(key)
    if cached is not None:
        return cached
    result = _join_by_resultant(f1, f2)
    _JOIN_CACHE[key] = result
    return result


def _join_by_resultant(f1: NumberField, f2: NumberField):
    """Compositum via theta = theta1 + c*theta2 and resultant elimination.

    For each small c: the candidate polynomial D(x) = Res_t(p1(t),
    c^d2 * p2((x-t)/c)) has theta among its roots; theta's irreducible
    factor defines F.  theta is primitive iff gcd(p1(t), p2((theta-t)/c))
    over F[t] is linear, in which case its root *is* theta1.
    """
    t, xx = sp.symbols("t x")
    p1 = f1.poly
    p2 = f2.poly
    d2 = degree(p2)
    p1expr = sum(int(c) * t ** i for i, c in enumerate(p1))
    for c in (1, -1, 2, -2, 3, -3, 5, 7, 11):
        p2expr = sum(
            int(a) * (xx - t) ** j * c ** (d2 - j) for j, a in enumerate(p2)
        )
        D = sp.resultant(p1expr, p2expr, t)
        Dp = primitive(intpoly.from_sympy(sp.Poly(D, xx)))

        def theta_box(bits, c=c):
            return f1.generator_box(bits) + f2.generator_box(bits).scale(c)

        # locate theta among the roots of the irreducible factors of D
        pairs = []
        for f, _ in intpoly.factor_int_poly(Dp):
            for i in range(degree(f)):
                pairs.append((f, i))
        bits = 24
        found = None
        while found is None:
            target = theta_box(bits)
            hits = [
                (f, i) for f, i in pairs
                if croot_box(_croot_cached(f, i), bits).intersects(target)
            ]
            if len(hits) == 1:
                found = hits[0]
            elif not hits:
                raise RuntimeError("compositum root selection lost theta")
            else:
                bits *= 2
                if bits > 1 << 16:
                    raise RuntimeError("compositum root selection stalled")
        fpoly, idx = found
        F = NumberField.get(fpoly, idx)
        theta = F.generator()
        # alpha2-shifted copy of p2: r(u) = p2((theta - u)/c), coefficients
        # in F; computed by Horner on the linear polynomial (theta - u)/c
        cinv = Fraction(1, c)
        lin = [F.scale(theta, cinv), F.from_rational(-cinv)]  # (theta - u)/c
        r = [F.from_rational(p2[-1])]
        for a in reversed(p2[:-1]):
            r = _fpoly_mul(F, r, lin)
            r[0] = F.add(r[0], F.from_rational(a))
        p1F = [F.from_rational(a) for a in p1]
        g = _fpoly_gcd(F, p1F, r)
        if len(g) != 2:
            continue  # theta not primitive for this c; try the next one
        # monic linear gcd u + g0 -> theta1 = -g0
        g0 = F.div(g[0], g[1])
        a1 = F.neg(g0)
        a2 = F.scale(F.sub(theta, a1), cinv)
        for vec, src in ((a1, f1), (a2, f2)):
            if not F.elem_box(vec, 24).intersects(src.generator_box(24)):
                raise RuntimeError("compositum embedding verification failed")
        return (F, _power_table(F, a1, f1.degree), _power_table(F, a2, f2.degree))
    raise RuntimeError("no primitive element found among small multipliers")


def _croot_cached(poly: IntPoly, index: int):
    return CRootOf(
        sp.Poly(list(reversed(poly)), _X), index, radicals=False
    )


def _fpoly_mul(F: NumberField, a: list[Vec], b: list[Vec]) -> list[Vec]:
    out = [F.zero() for _ in range(len(a) + len(b) - 1)]
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] = F.add(out[i + j], F.mul(ai, bj))
    return out


def _fpoly_trim(F: NumberField, a: list[Vec]) -> list[Vec]:
    while a and all(c == 0 for c in a[-1]):
        a.pop()
    return a


def _fpoly_rem(F: NumberField, a: list[Vec], b: list[Vec]) -> list[Vec]:
    a = list(a)
    db = len(b) - 1
    lead_inv = F.inv(b[-1])
    while len(a) - 1 >= db:
        a = _fpoly_trim(F, a)
        if len(a) - 1 < db:
            break
        q = F.mul(a[-1], lead_inv)
        sh = len(a) - 1 - db
        for i, bc in enumerate(b):
            a[sh + i] = F.sub(a[sh + i], F.mul(q, bc))
        a.pop()
    return _fpoly_trim(F, a)


def _fpoly_gcd(F: NumberField, a: list[Vec], b: list[Vec]) -> list[Vec]:
    a = _fpoly_trim(F, list(a))
    b = _fpoly_trim(F, list(b))
    while b:
        a, b = b, _fpoly_rem(F, a, b)
    return a


def _power_table(F: NumberField, gen: Vec, count: int | None = None) -> list[Vec]:
    n = count if count is not None else F.degree
    pows = [F.one()]
    for _ in range(n - 1):
        pows.append(F.mul(pows[-1], gen))
    return pows


def embed(F: NumberField, pows: list[Vec], a: Vec) -> Vec:
    out = F.zero()
    for c, p in zip(a, pows):
        if c:
            out = F.add(out, F.scale(p, c))
    return out
