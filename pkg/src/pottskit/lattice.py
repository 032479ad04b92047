"""LLL lattice reduction and minimal-polynomial reconstruction.

Reduction is done with exact rational Gram–Schmidt: the lattices here are
tiny (dimension = degree bound + 2), so exactness beats floating-point
speed.  `minpoly_from_approx` recovers the exact minimal polynomial of an
algebraic number from a rational approximation of certified precision by
reducing the standard reconstruction lattice (identity block alongside a
column of scaled approximate powers) and validating the short vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import intpoly
from .field import croot_box, poly_roots
from .intpoly import IntPoly, primitive, strip
from .rect import RatRect

LatticeBasis = list  # list of equal-length integer (or rational) rows


class MinPolyRecoveryError(ValueError):
    """No reduced lattice vector passed the candidate checks.

    Signals a violated precondition: the approximated number either has
    degree or height above the stated bounds, or the approximation is less
    precise than the budget requires.
    """


@dataclass(frozen=True)
class MinPolyBudget:
    """Precision contract for minimal-polynomial reconstruction.

    `bits` is the smallest b with 2^b >= 2^(d^2/2) (d+1)^((3d+4)/2) U^(2d);
    the approximation must satisfy |alpha - approx| <= 2^-b / (12 d).
    """

    degree_bound: int
    height_bound: Fraction
    bits: int

    @property
    def tolerance(self) -> Fraction:
        return Fraction(1, 12 * self.degree_bound) / (
            Fraction(2) ** self.bits
        )


def minpoly_budget(d: int, U) -> MinPolyBudget:
    if d < 1:
        raise ValueError("degree bound must be positive")
    U = Fraction(U)
    if U < 1:
        raise ValueError("height bound must be >= 1")
    # compare squared: 4^b >= 2^(d^2) (d+1)^(3d+4) U^(4d)
    need = Fraction(2) ** (d * d) * Fraction(d + 1) ** (3 * d + 4) * U ** (4 * d)
    b = 1
    step = 1 << 12
    while step:
        while Fraction(4) ** (b + step) < need:
            b += step
        step >>= 1
    if Fraction(4) ** b < need:
        b += 1
    return MinPolyBudget(degree_bound=d, height_bound=U, bits=b)


def _dot(a, b) -> Fraction:
    return sum(x * y for x, y in zip(a, b))


def _gso(rows):
    """Gram–Schmidt of rational rows: (mu, squared norms, starred rows)."""
    n = len(rows)
    mu = [[Fraction(0)] * n for _ in range(n)]
    norms = [Fraction(0)] * n
    star = []
    for i in range(n):
        v = list(rows[i])
        for j in range(i):
            mu[i][j] = _dot(rows[i], star[j]) / norms[j]
            v = [x - mu[i][j] * y for x, y in zip(v, star[j])]
        sq = _dot(v, v)
        if sq == 0:
            raise ValueError("lattice basis rows are linearly dependent")
        star.append(v)
        norms[i] = sq
    return mu, norms, star


def _round_half_down(x: Fraction) -> int:
    return (2 * x.numerator + x.denominator) // (2 * x.denominator)


def lll_reduce(basis: LatticeBasis, delta=Fraction(3, 4)) -> LatticeBasis:
    """LLL-reduce the rows of `basis` (exact rational arithmetic).

    Returns rows spanning the same lattice, size-reduced and satisfying
    the Lovász condition with parameter `delta` in (1/4, 1).
    """
    delta = Fraction(delta)
    if not (Fraction(1, 4) < delta < 1):
        raise ValueError("delta must lie in (1/4, 1)")
    rows = [[Fraction(v) for v in row] for row in basis]
    n = len(rows)
    if n == 0:
        return []
    if len({len(r) for r in rows}) != 1:
        raise ValueError("rows must have equal dimension")
    _gso(rows)  # raises on dependent rows
    k = 1
    while k < n:
        mu, norms, _ = _gso(rows)
        for j in range(k - 1, -1, -1):
            c = _round_half_down(mu[k][j])
            if c:
                rows[k] = [x - c * y for x, y in zip(rows[k], rows[j])]
                mu, norms, _ = _gso(rows)
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            rows[k], rows[k - 1] = rows[k - 1], rows[k]
            k = max(k - 1, 1)
    out = []
    for row in rows:
        if all(v.denominator == 1 for v in row):
            out.append([int(v) for v in row])
        else:
            out.append(list(row))
    return out


def _approx_parts(approx) -> tuple[Fraction, Fraction]:
    re = getattr(approx, "re", None)
    if re is not None:
        return Fraction(re), Fraction(approx.im)
    return Fraction(approx), Fraction(0)


def _root_matches(p: IntPoly, re: Fraction, im: Fraction, tol: Fraction) -> bool:
    """Does p have a complex root within distance ~tol of re + im*i?

    Uses isolating boxes refined below tol; accepts when a box intersects
    the square of half-side tol around the approximation.
    """
    bits = max(4, (tol.denominator // max(1, tol.numerator)).bit_length() + 2)
    target = RatRect.from_bounds(re - tol, re + tol, im - tol, im + tol)
    for root in poly_roots(p):
        if croot_box(root, bits).intersects(target):
            return True
    return False


def minpoly_from_approx(approx, budget: MinPolyBudget) -> IntPoly:
    """Exact minimal polynomial from an approximation meeting the budget.

    `approx` is a rational (real case) or an object with rational `re`/`im`
    attributes (complex case).  The reconstruction lattice has rows
    (e_i | round(2^b * Re(approx^i)) [| round(2^b * Im(approx^i))]); a short
    vector's first d+1 coordinates are the candidate coefficients.  Only
    irreducible candidates within the height bound whose root matches the
    approximation are accepted.
    """
    d, U, b = budget.degree_bound, budget.height_bound, budget.bits
    re, im = _approx_parts(approx)
    scale = 1 << b
    complex_case = im != 0
    powers = [(Fraction(1), Fraction(0))]
    for _ in range(d):
        pr, pi = powers[-1]
        powers.append((pr * re - pi * im, pr * im + pi * re))
    rows = []
    for i in range(d + 1):
        row = [0] * (d + 1)
        row[i] = 1
        row.append(_round_half_down(scale * powers[i][0]))
        if complex_case:
            row.append(_round_half_down(scale * powers[i][1]))
        rows.append(row)
    reduced = lll_reduce(rows)
    tol = budget.tolerance
    for row in reduced:
        cand = primitive(strip(tuple(int(v) for v in row[: d + 1])))
        if intpoly.degree(cand) < 1:
            continue
        # when the number's true degree is below the budget's bound, the
        # short vectors are multiples of the minimal polynomial, so accept
        # a matching irreducible factor
        for factor, _mult in intpoly.factor_int_poly(cand):
            if intpoly.degree(factor) < 1:
                continue
            if max(abs(c) for c in factor) > U:
                continue
            if _root_matches(factor, re, im, 2 * tol):
                return factor
    raise MinPolyRecoveryError(
        "no reduced vector yields an irreducible polynomial within the "
        "height bound with a root matching the approximation"
    )


def sturm_isolate(p: IntPoly) -> list[tuple[Fraction, Fraction]]:
    """Disjoint rational intervals, one per distinct real root of p.

    The squarefree part is taken internally; the zero polynomial is an
    error.
    """
    return intpoly.isolate_real_roots(p)
