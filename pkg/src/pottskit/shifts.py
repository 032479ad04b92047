"""Certified weight-shift calculus on the Tutte hyperbola (x-1)(y-1) = q.

A "shift" is a two-terminal series-parallel gadget whose edges carry the
source weight(s).  Substituting the gadget for an edge moves the effective
point (x, y) along the hyperbola: stretching (series paths) multiplies x,
thickening (parallel copies) multiplies y.  Exact shifts land on
algebraically exact points; approximate shifts come with a certificate
that the implemented weight is within 2**-n of the target, checkable by
exact re-evaluation of the gadget plus interval refinement.

The approximate machinery:

- precision budgets: how accurately a theta gadget's edge weight must be
  known so the implemented weight is accurate to 2**-n;
- a greedy exponent scheme implementing any real target in (0, 1] (or in
  [1, B]) from a point with y in (0, 1) and x < -1 (or x > 1);
- a two-weight greedy implementing targets from a pair of edge weights;
- an argument-wrapping construction that drives a non-real point with
  |x| > 1 into the real interval (0, 1) in the limit, with a certified
  geometric tail bound;
- norm shifts moving any admissible non-real point to |x| > 1 or |x| < 1
  exactly, and transitive/parallel/series composition of all of the above.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .algebraic import (
    AlgNum,
    alg_abs,
    alg_eq,
    alg_im,
    alg_re,
    arg_in_interval,
    as_algnum,
    is_root_of_unity,
    is_zero,
    large_real_power,
    lower_bound_norm,
    real_cmp,
    real_sign,
    sigma_eval,
    sigma_plan,
    sign_im,
    sign_re,
    unit_direction,
)
from .graph import (
    ParamPoint,
    SPGraph,
    implemented_weight,
    sp_eval,
    theta_weight,
    to_xy,
)
from .literals import format_literal, parse_literal

# Rational bracketing of pi, used only for certified upper/lower bounds.
PI_UP = Fraction(355, 113)
PI_LO = Fraction(333, 106)

_SRC_LABEL = "e"


class ShiftError(ValueError):
    """A shift construction's preconditions are violated."""


class UnsupportedRegimeError(ShiftError):
    """Parameter regime outside the supported constructive range."""


class ExcludedPointError(ShiftError):
    """One of the four exceptional points where no norm shift exists."""


# ---------------------------------------------------------------------------
# small rational helpers
# ---------------------------------------------------------------------------


def _ceil_log2(x: Fraction) -> int:
    """Smallest integer t with 2**t >= x (x > 0); may be negative."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("log of a non-positive number")
    t = x.numerator.bit_length() - x.denominator.bit_length() - 2
    while Fraction(2) ** t < x:
        t += 1
    return t


def _rat_up_real(a: AlgNum, bits: int = 24) -> Fraction:
    """Certified rational upper bound of a real algebraic number."""
    return a.enclosure(bits).re.hi


def _rat_lo_real(a: AlgNum, bits: int = 24) -> Fraction:
    """Certified rational lower bound of a real algebraic number."""
    return a.enclosure(bits).re.lo


def _mag_bounds_sep_one(z: AlgNum, cap_bits: int = 1 << 13):
    """(lo, hi) rational bounds on |z| with the interval separated from 1.

    Raises ShiftError when |z| = 1 exactly or separation fails at the cap.
    """
    if alg_eq(z * z.conj(), 1):
        raise ShiftError("|value| = 1: no separation from the unit circle")
    bits = 16
    while bits <= cap_bits:
        box = z.enclosure(bits)
        lo, hi = box.mag_bounds(bits)
        if lo > 1 or hi < 1:
            return lo, hi
        bits *= 2
    raise ShiftError("could not separate |value| from 1 at the bit cap")


def _certify_abs_le(d: AlgNum, tol: Fraction, cap_bits: int = 1 << 14):
    """Interval-certify |d| <= tol.  Returns (ok, certified bound)."""
    if d.is_zero():
        return True, Fraction(0)
    bits = 32
    while bits <= cap_bits:
        lo, hi = d.enclosure(bits).mag_bounds(bits)
        if hi <= tol:
            return True, hi
        if lo > tol:
            return False, lo
        bits *= 2
    raise ShiftError("error-bound certification undecided at the bit cap")


# ---------------------------------------------------------------------------
# SP-tree helpers (trees are nested tuples as in graph.SPGraph)
# ---------------------------------------------------------------------------


def _path_tree(n: int, label: str = _SRC_LABEL):
    """Series path of n shared edge objects (stretching gadget)."""
    if n < 1:
        raise ShiftError("path length must be >= 1")
    e = ("edge", label)
    return e if n == 1 else ("S", (e,) * n)


def _parallel_of(children):
    children = tuple(children)
    if not children:
        raise ShiftError("parallel composition needs at least one child")
    return children[0] if len(children) == 1 else ("P", children)


def _series_of(children):
    children = tuple(children)
    if not children:
        raise ShiftError("series composition needs at least one child")
    return children[0] if len(children) == 1 else ("S", children)


def _theta_tree(lengths, label: str = _SRC_LABEL):
    """Parallel composition of paths; path objects shared per length."""
    cache = {}
    paths = []
    for l in lengths:
        p = cache.get(l)
        if p is None:
            p = _path_tree(int(l), label)
            cache[l] = p
        paths.append(p)
    return _parallel_of(paths)


def _subst(node, mapping, _memo=None):
    """Replace each ("edge", lab) with mapping[lab]; subtrees stay shared."""
    if _memo is None:
        _memo = {}
    hit = _memo.get(id(node))
    if hit is not None:
        return hit
    if node[0] == "edge":
        out = mapping.get(node[1], node)
    else:
        out = (node[0], tuple(_subst(ch, mapping, _memo) for ch in node[1]))
    _memo[id(node)] = out
    return out


def _tree_edge_count(node, _memo=None) -> int:
    if node is None:
        return 0
    if _memo is None:
        _memo = {}
    hit = _memo.get(id(node))
    if hit is not None:
        return hit
    out = 1 if node[0] == "edge" else sum(
        _tree_edge_count(ch, _memo) for ch in node[1])
    _memo[id(node)] = out
    return out


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


@dataclass
class ShiftCertificate:
    """Self-certifying record of a weight shift.

    `gadget_root` is an SP tree over labels in `weights` (None encodes the
    edgeless gadget implementing y = 1 exactly).  `implemented_y` is the
    exact algebraic value 1 + (implemented weight of the gadget at q);
    `target_y` is an AlgNum, or a WrapLimit descriptor for limit targets.
    `error_exponent` n certifies |target - implemented| <= 2**-n; None
    means the shift is exact (target equals implemented).
    """

    source: ParamPoint
    gadget_root: Optional[tuple]
    weights: dict
    target_y: object
    implemented_y: AlgNum
    error_exponent: Optional[int]
    trace: tuple = ()
    theta: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def gadget(self) -> Optional[SPGraph]:
        if self.gadget_root is None:
            return None
        return SPGraph(self.gadget_root, self.weights)

    @property
    def size(self) -> int:
        return _tree_edge_count(self.gadget_root)

    def derived_point(self) -> ParamPoint:
        """The exact hyperbola point implemented by the gadget."""
        gamma = self.implemented_y - AlgNum.from_rational(1)
        return to_xy(self.source.q, gamma)


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    error_bound: Optional[Fraction]
    message: str


def verify_certificate(cert: ShiftCertificate) -> VerifyResult:
    """Re-evaluate the gadget exactly and certify the claimed error bound."""
    q = cert.source.q
    one = AlgNum.from_rational(1)
    if cert.gadget_root is None:
        impl = one
    else:
        sp = SPGraph(cert.gadget_root, cert.weights)
        try:
            impl = implemented_weight(sp_eval(sp, q), q) + one
        except ValueError as e:
            return VerifyResult(False, None, f"gadget evaluation failed: {e}")
    if not alg_eq(impl, cert.implemented_y):
        return VerifyResult(
            False, None, "re-evaluated weight differs from the recorded one")
    n = cert.error_exponent
    if n is None:
        if isinstance(cert.target_y, AlgNum) and not alg_eq(
                impl, cert.target_y):
            return VerifyResult(False, None, "exact shift misses its target")
        return VerifyResult(True, Fraction(0), "exact shift verified")
    tol = Fraction(1, 2) ** n
    target = cert.target_y
    if isinstance(target, WrapLimit):
        m = cert.meta.get("wrap_m")
        if m is None:
            return VerifyResult(False, None, "wrap certificate lacks depth")
        if not alg_eq(impl, target.partial_product(m)):
            return VerifyResult(
                False, None, "implemented value is not the wrap partial")
        tb = target.tail_bound(m)
        if tb <= tol:
            return VerifyResult(True, tb, "wrap tail bound verified")
        return VerifyResult(False, tb, "wrap tail bound exceeds 2^-n")
    diff = impl - as_algnum(target)
    ok, bound = _certify_abs_le(diff, tol)
    if ok:
        return VerifyResult(True, bound, "error interval-certified")
    return VerifyResult(False, bound, "error exceeds the claimed bound")


def _exact_cert(source, root, value, trace, theta=False, meta=None):
    return ShiftCertificate(
        source=source,
        gadget_root=root,
        weights={_SRC_LABEL: source.gamma},
        target_y=value,
        implemented_y=value,
        error_exponent=None,
        trace=tuple(trace),
        theta=theta,
        meta=dict(meta or {}),
    )


# ---------------------------------------------------------------------------
# precision budgets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PrecisionBudget:
    """Accuracy bookkeeping for evaluating gadgets at approximate weights.

    Constants (all integers >= 0):
      t_stretch: 2^-t_stretch <= ||x| - 1| and |x| <= 2^t_stretch,
      t_x:       every per-path factor 1 + q/(x^l - 1) has norm <= 2^t_x,
      t_q:       |q| <= 2^t_q,
      t_gamma:   2^-t_gamma <= |gamma|.

    r(n, k): bits of accuracy on z needed so 1/(z^k - 1) is accurate to
    2^-n for z near x.  f(n, lengths): bits of accuracy on gamma needed so
    the theta gadget with those path lengths implements its weight to
    2^-n.  Both are monotone in every argument.
    """

    t_stretch: int
    t_x: int
    t_q: int
    t_gamma: int

    def r(self, n: int, k: int) -> int:
        return n + (self.t_stretch + 1) * (k + 1)

    def g(self, n: int, lengths) -> int:
        lengths = [int(l) for l in lengths]
        if not lengths:
            raise ValueError("budget needs at least one path length")
        m = len(lengths)
        k = max(lengths)
        return self.r(n + (self.t_x + 1) * (m + 1) + self.t_q, k)

    def f(self, n: int, lengths) -> int:
        return self.g(n, lengths) + self.t_q + 2 * self.t_gamma + 1

    @property
    def r_of_n_k(self) -> str:
        return f"r(n,k) = n + {self.t_stretch + 1}*(k+1)"

    @property
    def f_of_n_G(self) -> str:
        return (
            f"f(n,G) = r(n + {self.t_x + 1}*(m+1) + {self.t_q}, k)"
            f" + {self.t_q + 2 * self.t_gamma + 1}"
        )


def _budget_from_bounds(q_up: Fraction, x_lo: Fraction, x_hi: Fraction,
                        gamma_lo: Fraction) -> PrecisionBudget:
    if not (0 < x_lo <= x_hi) or gamma_lo <= 0 or q_up <= 0:
        raise ShiftError("budget bounds must be positive")
    if x_lo > 1:
        sep = x_lo - 1
    elif x_hi < 1:
        sep = 1 - x_hi
    else:
        raise ShiftError("|x| bounds must be separated from 1")
    t_stretch = max(_ceil_log2(x_hi), _ceil_log2(1 / sep), 0)
    t_x = max(_ceil_log2(1 + q_up / sep), 0)
    t_q = max(_ceil_log2(q_up), 0)
    t_gamma = max(_ceil_log2(1 / gamma_lo), 0)
    return PrecisionBudget(t_stretch, t_x, t_q, t_gamma)


def precision_budget(point: ParamPoint) -> PrecisionBudget:
    """Budget constants of an exact hyperbola point (requires |x| != 1)."""
    x_lo, x_hi = _mag_bounds_sep_one(point.x)
    q_up = upper_q(point.q)
    gamma_lo = lower_bound_norm(point.gamma)
    return _budget_from_bounds(q_up, x_lo, x_hi, gamma_lo)


def upper_q(q: AlgNum) -> Fraction:
    if not q.is_real():
        raise UnsupportedRegimeError("q must be real")
    up = _rat_up_real(q)
    if up <= 0:
        raise ShiftError("q upper bound must be positive here")
    return up


# ---------------------------------------------------------------------------
# exact elementary shifts
# ---------------------------------------------------------------------------


def identity_shift(point: ParamPoint) -> ShiftCertificate:
    return _exact_cert(
        point, ("edge", _SRC_LABEL), point.y, ("identity",), theta=True)


def thicken(point: ParamPoint, n: int) -> ShiftCertificate:
    """n parallel copies of the edge: y -> y**n (exact)."""
    n = int(n)
    if n < 1:
        raise ShiftError("thickening count must be >= 1")
    root = _parallel_of((("edge", _SRC_LABEL),) * n)
    return _exact_cert(point, root, point.y ** n, (f"thicken:{n}",),
                       theta=True)


def stretch(point: ParamPoint, n: int) -> ShiftCertificate:
    """Path of n edges: x -> x**n, y -> 1 + q/(x**n - 1) (exact).

    Errors when x**n = 1 (the stretched point degenerates).
    """
    n = int(n)
    if n < 1:
        raise ShiftError("stretching length must be >= 1")
    one = AlgNum.from_rational(1)
    xn = point.x ** n
    if alg_eq(xn, one):
        raise ShiftError(f"x^{n} = 1: stretching degenerates")
    y1 = one + point.q / (xn - one)
    return _exact_cert(point, _path_tree(n), y1, (f"stretch:{n}",),
                       theta=True)


# ---------------------------------------------------------------------------
# admissibility / excluded points
# ---------------------------------------------------------------------------


def _omega3() -> AlgNum:
    return AlgNum.root_of_unity(1, 3)


def _check_admissible(point: ParamPoint):
    q, y = point.q, point.y
    if not q.is_real():
        raise UnsupportedRegimeError("q must be real")
    if real_cmp(q, 2) < 0:
        raise UnsupportedRegimeError(
            "norm shifts are implemented for q >= 2 only")
    i_unit = AlgNum.i_unit()
    if alg_eq(q, 2) and (alg_eq(y, i_unit) or alg_eq(y, -i_unit)):
        raise ExcludedPointError("(q, y) = (2, +-i) admits no norm shift")
    w3 = _omega3()
    if alg_eq(q, 3) and (alg_eq(y, w3) or alg_eq(y, w3 * w3)):
        raise ExcludedPointError(
            "(q, y) = (3, third root of unity) admits no norm shift")


# ---------------------------------------------------------------------------
# norm shifts (exact): to |x| > 1
# ---------------------------------------------------------------------------


def shift_to_norm_gt1(point: ParamPoint) -> ShiftCertificate:
    """Exact SP shift to a point with |x| > 1 and y off the real axis.

    Dispatches on Arg(y).  The one case that cannot reach |x| > 1
    (q = 2 with y on the imaginary axis) instead lands in y in (-1, 0) and
    is flagged with meta["kind"] = "neg_unit_interval"; all other results
    carry meta["kind"] = "norm_gt1".
    """
    _check_admissible(point)
    y = point.y
    if y.is_real():
        raise ShiftError("shift_to_norm_gt1 requires a non-real source y")
    if sign_re(y) == 0:
        return _case_imag_axis(point)
    y3 = y ** 3
    if y3.is_real() and real_sign(y3) > 0:
        return _case_third_root_arg(point)
    return _case_generic_arg(point)


def _gt1_meta(cert: ShiftCertificate) -> ShiftCertificate:
    cert.meta.setdefault("kind", "norm_gt1")
    return cert


def _case_generic_arg(point: ParamPoint) -> ShiftCertificate:
    """Arg(y) generic: thicken until both Re and Im of y**n are positive."""
    y = point.y
    u = unit_direction(y)
    order = is_root_of_unity(u)
    if order is None:
        n, w = 1, y
        while not arg_in_interval(w, Fraction(1, 12), Fraction(1, 6)):
            n += 1
            w = w * y
            if n > 200000:
                raise ShiftError("argument window search did not terminate")
    else:
        if order < 5:
            raise ShiftError("unexpected small-order direction in the "
                             "generic-argument branch")
        k = next(
            j for j in range(1, order)
            if math.gcd(j, order) == 1
            and alg_eq(u, AlgNum.root_of_unity(j, order))
        )
        n = pow(k, -1, order)
        w = y ** n
    if not (sign_re(w) > 0 and sign_im(w) != 0):
        raise ShiftError("window landing check failed")
    cert = _exact_cert(
        point, _parallel_of((("edge", _SRC_LABEL),) * n), w,
        (f"norm-gt1:thicken:{n}",), theta=True)
    return _gt1_meta(cert)


def _case_third_root_arg(point: ParamPoint) -> ShiftCertificate:
    """Arg(y) in {2*pi/3, 4*pi/3}."""
    q, x, y = point.q, point.x, point.y
    one = AlgNum.from_rational(1)
    threshold = one - q / 2
    c = real_cmp(alg_re(y), threshold)
    if c > 0:
        return _gt1_meta(_exact_cert(
            point, ("edge", _SRC_LABEL), y, ("norm-gt1:direct",), theta=True))
    if c < 0:
        # stretch until Arg(y_n) leaves all special rays, then recurse
        n = 1
        xn = x
        while True:
            if not alg_eq(xn, one):
                yn = one + q / (xn - one)
                if (not yn.is_real()) and sign_re(yn) != 0:
                    y3n = yn ** 3
                    if not (y3n.is_real() and real_sign(y3n) > 0):
                        break
            n += 1
            xn = xn * x
            if n > 20000:
                raise ShiftError("stretch search did not terminate")
        inner = shift_to_norm_gt1(to_xy(q, yn - one))
        root = _subst(inner.gadget_root, {_SRC_LABEL: _path_tree(n)})
        cert = _exact_cert(
            point, root, inner.implemented_y,
            (f"norm-gt1:stretch:{n}",) + inner.trace, theta=False)
        return _gt1_meta(cert)
    # Re(y) = 1 - q/2 exactly (so q > 2 since Re(y) != 0 here)
    if real_cmp(q, 2) == 0:
        raise ShiftError("internal: q = 2 cannot reach this branch")
    s = 1 if sign_im(y) > 0 else 2
    n_res = pow(s, -1, 3)
    norm2 = y * y.conj()
    cmp1 = real_cmp(norm2, 1)
    if cmp1 == 0:
        raise ShiftError("|y| = 1 with Re(y) = 1 - q/2 forces an excluded "
                         "point")
    qm2 = q - as_algnum(2)
    qm2sq = qm2 * qm2
    if cmp1 > 0:
        n = n_res
        while real_cmp(norm2 ** n, qm2sq) <= 0:
            n += 3
        yn = y ** n
        inner = _case_third_root_arg(to_xy(q, yn - one))
        root = _subst(
            inner.gadget_root,
            {_SRC_LABEL: _parallel_of((("edge", _SRC_LABEL),) * n)})
        cert = _exact_cert(
            point, root, inner.implemented_y,
            (f"norm-gt1:thicken:{n}",) + inner.trace, theta=False)
        return _gt1_meta(cert)
    n = n_res
    while real_cmp(norm2 ** n, qm2sq) >= 0:
        n += 3
    yn = y ** n
    if not real_cmp(alg_re(yn), threshold) > 0:
        raise ShiftError("thickening landing check failed")
    cert = _exact_cert(
        point, _parallel_of((("edge", _SRC_LABEL),) * n), yn,
        (f"norm-gt1:thicken:{n}",), theta=True)
    return _gt1_meta(cert)


def _case_imag_axis(point: ParamPoint) -> ShiftCertificate:
    """Re(y) = 0, y != 0."""
    q, x, y = point.q, point.x, point.y
    if real_cmp(q, 2) > 0:
        # Re(y) = 0 > 1 - q/2 already puts |x| > 1
        return _gt1_meta(_exact_cert(
            point, ("edge", _SRC_LABEL), y, ("norm-gt1:direct-axis",),
            theta=True))
    # q = 2: |x| = 1; a k-stretch keeps y on the imaginary axis, and the
    # 2-thickening of a k-stretch with Re(x^k) < 0 lands in (-1, 0)
    one = AlgNum.from_rational(1)
    k, xk = 1, x
    while True:
        if sign_re(xk) < 0 and not alg_eq(xk, -one):
            break
        k += 1
        xk = xk * x
        if k > 20000:
            raise ShiftError("imaginary-axis stretch search did not "
                             "terminate")
    yk = one + q / (xk - one)
    y2 = yk * yk
    if not (y2.is_real() and real_cmp(y2, 0) < 0 and real_cmp(y2, -1) > 0):
        raise ShiftError("imaginary-axis landing check failed")
    pk = _path_tree(k)
    cert = _exact_cert(
        point, ("P", (pk, pk)), y2,
        (f"axis:stretch:{k}", "axis:thicken:2"), theta=True)
    cert.meta["kind"] = "neg_unit_interval"
    return cert


# ---------------------------------------------------------------------------
# norm shifts (exact): to |x| < 1
# ---------------------------------------------------------------------------


def shift_to_norm_lt1(point: ParamPoint) -> ShiftCertificate:
    """Exact SP shift to a point with |x| < 1 (i.e. Re(y) < 1 - q/2)."""
    _check_admissible(point)
    q, y = point.q, point.y
    if y.is_real():
        if not (real_cmp(y, -1) > 0 and real_cmp(y, 0) < 0):
            raise ShiftError("a real source y must lie in (-1, 0)")
        return _lt1_from_neg_unit(point)
    if sign_re(y) == 0 and real_cmp(q, 2) == 0:
        cert = _case_imag_axis(point)
        # y in (-1, 0) gives Re(y) < 0 = 1 - q/2, hence |x| < 1 already
        cert.meta["kind"] = "norm_lt1"
        return cert
    first = shift_to_norm_gt1(point)
    return _push_below(point, first.derived_point(), first.gadget_root,
                       first.trace, 0)


def _lt1_from_neg_unit(point: ParamPoint) -> ShiftCertificate:
    """Source y in (-1, 0): route through y^2, a 2-stretch, a thickening
    and a parallel join with the identity edge to land below -q."""
    q, y = point.q, point.y
    one = AlgNum.from_rational(1)
    b1 = y * y                      # in (0, 1)
    a1 = one + q / (b1 - one)       # < -1
    a2 = a1 * a1                    # > 1
    b2 = one + q / (a2 - one)       # > 1
    if not real_cmp(b2, 1) > 0:
        raise ShiftError("internal: expected b2 > 1")
    j = 1
    p = b2
    while real_cmp(p * y, -q) >= 0:
        j += 1
        p = p * b2
        if j > 20000:
            raise ShiftError("thickening search did not terminate")
    y2 = p * y                      # < -q, so x2 in (0, 1)
    e = ("edge", _SRC_LABEL)
    t2 = ("P", (e, e))              # 2-thickening
    s2 = ("S", (t2, t2))           # then 2-stretch: implements (a2, b2)
    root = ("P", (s2,) * j + (e,))
    if not real_cmp(y2, -q) < 0:
        raise ShiftError("landing check failed in the real branch")
    cert = _exact_cert(
        point, root, y2,
        ("thicken:2", "stretch:2", f"thicken:{j}", "parallel:identity"),
        theta=False)
    cert.meta["kind"] = "norm_lt1"
    return cert


def _push_below(source: ParamPoint, p1: ParamPoint, prefix_root, trace,
                depth: int) -> ShiftCertificate:
    """From (x1, y1) with |x1| > 1, y1 non-real: stretch to Re(y-hat) > 1,
    then thicken (non-real case) or parallel-join and recurse (real case)."""
    if depth > 16:
        raise ShiftError("push-below recursion exceeded its depth cap")
    q = source.q
    one = AlgNum.from_rational(1)
    q_up = upper_q(q)
    n = large_real_power(p1.x, Fraction(9, 8))
    xh = p1.x ** n
    yh = one + q / (xh - one)
    stretch_root = prefix_root if n == 1 else ("S", (prefix_root,) * n)
    trace = tuple(trace) + (f"stretch:{n}",)
    if not yh.is_real():
        margin = max(q_up / 2 - 1, Fraction(0)) + Fraction(1, 8)
        t = large_real_power(yh, margin, want_negative=True)
        y2 = yh ** t
        root = stretch_root if t == 1 else ("P", (stretch_root,) * t)
        if not real_cmp(alg_re(y2), one - q / 2) < 0:
            raise ShiftError("landing check failed: Re(y) >= 1 - q/2")
        cert = _exact_cert(source, root, y2, trace + (f"thicken:{t}",),
                           theta=False)
        cert.meta["kind"] = "norm_lt1"
        return cert
    # y-hat is real (necessarily > 1): inflate the original y out of the
    # unit disc and recurse on the resulting non-real point
    if not real_cmp(yh, 1) > 0:
        raise ShiftError("internal: expected a real y-hat > 1")
    ysq = source.y * source.y.conj()
    l = 1
    while real_cmp((yh ** (2 * l)) * ysq, 1) <= 0:
        l += 1
        if l > 20000:
            raise ShiftError("inflation search did not terminate")
    yp = (yh ** l) * source.y
    root = ("P", (stretch_root,) * l + (("edge", _SRC_LABEL),))
    trace = trace + (f"thicken:{l}", "parallel:identity")
    pp = to_xy(q, yp - one)
    first = shift_to_norm_gt1(pp)
    combined = _subst(first.gadget_root, {_SRC_LABEL: root})
    return _push_below(source, first.derived_point(), combined,
                       trace + first.trace, depth + 1)


# ---------------------------------------------------------------------------
# approximate shift to (0, 1 - q): long stretch at |x| < 1
# ---------------------------------------------------------------------------


def _stretch_length_to_1mq(point: ParamPoint, n: int) -> int:
    _, hi = _mag_bounds_sep_one(point.x)
    if hi >= 1:
        raise ShiftError("approximate shift to 1 - q requires |x| < 1")
    b = 1 - hi
    c = max(upper_q(point.q), Fraction(1))
    target = Fraction(1, 2) ** n * b / c
    j, pw = 1, 1 - b
    while pw > target:
        j += 1
        pw *= 1 - b
    return j


def approx_shift_to_1mq(point: ParamPoint, n: int) -> ShiftCertificate:
    """Stretch a |x| < 1 point until y is within 2**-n of 1 - q."""
    if n < 1:
        raise ShiftError("accuracy exponent must be >= 1")
    one = AlgNum.from_rational(1)
    j = _stretch_length_to_1mq(point, n)
    xj = point.x ** j
    yj = one + point.q / (xj - one)
    cert = ShiftCertificate(
        source=point,
        gadget_root=_path_tree(j),
        weights={_SRC_LABEL: point.gamma},
        target_y=one - point.q,
        implemented_y=yj,
        error_exponent=n,
        trace=(f"stretch:{j}", f"target:1-q@2^-{n}"),
        theta=True,
    )
    return cert


# ---------------------------------------------------------------------------
# greedy exponent engines (exact algebraic parameters)
# ---------------------------------------------------------------------------


def _ascending_lengths(q: AlgNum, x2: AlgNum, w: AlgNum, n: int):
    """Greedy stretch exponents from (x2 > 1, q > 0) whose stretch values
    y_j = 1 + q/(x2^j - 1) decrease to 1; approximates a target w >= 1
    from below to 2**-n.  Returns (lengths, exact product)."""
    one = AlgNum.from_rational(1)
    if not (real_cmp(x2, 1) > 0 and real_sign(q) > 0):
        raise ShiftError("ascending greedy needs x > 1 and q > 0")
    if real_cmp(w, 1) < 0:
        raise ShiftError("ascending greedy target must be >= 1")
    w_up = _rat_up_real(w)
    tol = Fraction(1, 2) ** n
    lengths = []
    P = one
    j, xj = 1, x2
    while True:
        yj = one + q / (xj - one)
        while real_cmp(P * yj, w) <= 0:
            P = P * yj
            lengths.append(j)
            if len(lengths) > 100000:
                raise ShiftError("ascending greedy ran away")
        gap = _rat_up_real(yj - one, bits=n + 8)
        if gap * w_up <= tol:
            break
        j += 1
        xj = xj * x2
        if j > 100000:
            raise ShiftError("ascending greedy stage cap exceeded")
    return lengths, P


def _descending_lengths(q: AlgNum, y2: AlgNum, x1: AlgNum, w: AlgNum,
                        n: int):
    """For q < 0: overshoot with parallel y2-edges (y2 > 1), then descend
    with stretch values u_j = 1 + q/(x1^j - 1) in (0, 1) increasing to 1.
    Returns (count of single edges, descent lengths, exact product)."""
    one = AlgNum.from_rational(1)
    if not real_cmp(x1, 1) > 0:
        raise ShiftError("descending greedy needs x1 > 1")
    w_up = _rat_up_real(w)
    tol = Fraction(1, 2) ** n
    D = 0
    P = one
    while real_cmp(P, w) < 0:
        P = P * y2
        D += 1
        if D > 100000:
            raise ShiftError("overshoot ran away")
    lengths = []
    j, xj = 1, x1
    while True:
        if not alg_eq(xj, one):
            uj = one + q / (xj - one)
            if real_sign(uj) > 0 and real_cmp(uj, 1) < 0:
                while real_cmp(P * uj, w) >= 0:
                    P = P * uj
                    lengths.append(j)
                    if len(lengths) > 100000:
                        raise ShiftError("descending greedy ran away")
                lo = _rat_lo_real(uj, bits=n + 8)
                gap = _rat_up_real(one - uj, bits=n + 8)
                if lo >= Fraction(1, 2) and 2 * gap * w_up <= tol:
                    break
        j += 1
        xj = xj * x1
        if j > 100000:
            raise ShiftError("descending greedy stage cap exceeded")
    return D, lengths, P


# ---------------------------------------------------------------------------
# two-weight greedy shift
# ---------------------------------------------------------------------------


def gj_two_weight_shift(q, y1, y2, target, k: int, n: int
                        ) -> ShiftCertificate:
    """Theta gadget over two edge weights implementing `target` to 2**-n.

    Requires real q != 0, y1 real with 0 < |y1| < 1, y2 real with y2 > 1,
    and a real algebraic target with |target| in [|y1|^k, |y1|^-k].
    Positive targets below 1 are lifted by y1^-2k, approximated from the
    y2 side, and corrected by 2k parallel y1-edges; negative targets are
    divided by y1 < 0 first and corrected by one y1-edge.
    """
    q, y1, y2 = as_algnum(q), as_algnum(y1), as_algnum(y2)
    target = as_algnum(target)
    one = AlgNum.from_rational(1)
    if is_zero(q) or not q.is_real():
        raise UnsupportedRegimeError("q must be real and nonzero")
    for v, name in ((y1, "y1"), (y2, "y2"), (target, "target")):
        if not v.is_real():
            raise ShiftError(f"{name} must be real")
    if not (real_sign(y1) != 0 and real_cmp(alg_abs(y1), 1) < 0):
        raise ShiftError("y1 must satisfy 0 < |y1| < 1")
    if not real_cmp(y2, 1) > 0:
        raise UnsupportedRegimeError(
            "only y2 > 1 is supported as the large weight")
    if is_zero(target):
        raise ShiftError("target must be nonzero")
    if k < 0 or n < 1:
        raise ShiftError("need k >= 0 and n >= 1")
    a1 = alg_abs(y1)
    tabs = alg_abs(target)
    if real_cmp(tabs, a1 ** k) < 0 or real_cmp(tabs * a1 ** k, 1) > 0:
        raise ShiftError("target outside the reachable range "
                         "[|y1|^k, |y1|^-k]")

    gamma1, gamma2 = y1 - one, y2 - one
    weights = {"a": gamma1, "b": gamma2}
    source = to_xy(q, gamma1)

    if real_sign(target) < 0:
        if real_sign(y1) >= 0:
            raise ShiftError("a negative target needs a negative weight")
        pos = gj_two_weight_shift(q, y1, y2, target / y1, k + 1, n)
        root = _parallel_of(tuple(pos.gadget_root[1]) + (("edge", "a"),)
                            if pos.gadget_root[0] == "P"
                            else (pos.gadget_root, ("edge", "a")))
        impl = pos.implemented_y * y1
        return ShiftCertificate(
            source=source, gadget_root=root, weights=weights,
            target_y=target, implemented_y=impl, error_exponent=n,
            trace=pos.trace + ("parallel:y1",), theta=True,
            meta={"two_weight": True})

    # positive target
    extra_a = 0
    w = target
    if real_cmp(target, 1) < 0:
        extra_a = 2 * k
        w = target / (y1 ** (2 * k))
        if real_cmp(w, 1) < 0:
            raise ShiftError("lifted target fell below 1: increase k")
    qsign = real_sign(q)
    if qsign > 0:
        x2 = one + q / gamma2
        lengths, P = _ascending_lengths(q, x2, w, n)
        children = []
        cache = {}
        for l in lengths:
            p = cache.get(l)
            if p is None:
                p = _path_tree(l, "b")
                cache[l] = p
            children.append(p)
        trace = (f"ascending:{len(lengths)}",)
    else:
        x1 = one + q / gamma1
        D, lengths, P = _descending_lengths(q, y2, x1, w, n)
        children = [("edge", "b")] * D
        cache = {}
        for l in lengths:
            p = cache.get(l)
            if p is None:
                p = _path_tree(l, "a")
                cache[l] = p
            children.append(p)
        trace = (f"overshoot:{D}", f"descending:{len(lengths)}",)
    children.extend([("edge", "a")] * extra_a)
    impl = P * (y1 ** extra_a)
    if not children:
        root = None
    else:
        root = _parallel_of(children)
    return ShiftCertificate(
        source=source, gadget_root=root, weights=weights, target_y=target,
        implemented_y=impl, error_exponent=n,
        trace=trace + ((f"correct:y1^{extra_a}",) if extra_a else ()),
        theta=True, meta={"two_weight": True})


# ---------------------------------------------------------------------------
# greedy real shift with rational probing (computable y)
# ---------------------------------------------------------------------------


@dataclass
class ComputableY:
    """A real intermediate weight y in (1 - q/2, 1) known to any accuracy.

    `approx(n)` returns a rational within 2**-n of y; `lo`/`hi` are fixed
    certified rational bounds with hi < 1 and x-bounds above 1 in norm.
    """

    q: AlgNum
    approx: Callable[[int], Fraction]
    lo: Fraction
    hi: Fraction
    exact: Optional[AlgNum] = None


def computable_from_exact(q: AlgNum, y: AlgNum) -> ComputableY:
    if not y.is_real():
        raise ShiftError("greedy source y must be real")
    if not real_cmp(y, 1) < 0:
        raise ShiftError("greedy source y must be < 1")
    bits = 8
    while True:
        box = y.refine(bits)
        lo, hi = box.re.lo, box.re.hi
        q_lo = _rat_lo_real(q)
        if hi < 1 and (q_lo - 1 + lo) > (1 - lo):
            break
        bits *= 2
        if bits > 1 << 12:
            raise ShiftError("could not bracket y inside (1 - q/2, 1)")

    def approx(m: int) -> Fraction:
        b = y.refine(m + 2)
        return (b.re.lo + b.re.hi) / 2

    return ComputableY(q=q, approx=approx, lo=lo, hi=hi, exact=y)


def greedy_budget(cy: ComputableY) -> PrecisionBudget:
    q_lo, q_up = _rat_lo_real(cy.q), upper_q(cy.q)
    x_lo = (q_lo - 1 + cy.lo) / (1 - cy.lo)
    x_hi = (q_up - 1 + cy.hi) / (1 - cy.hi)
    if x_lo <= 1:
        raise ShiftError("greedy source must have |x| bounded above 1")
    return _budget_from_bounds(q_up, x_lo, x_hi, 1 - cy.hi)


def _theta_value_at(q: AlgNum, gamma_hat: Fraction, exps: dict):
    """Product of per-path factors of the theta gadget with path length
    multiset `exps` (length -> multiplicity) at the rational weight."""
    if q.is_rational():
        qr = q.as_rational()
        xh = 1 + qr / gamma_hat
        out = Fraction(1)
        for j, d in exps.items():
            den = xh ** j - 1
            if den == 0:
                raise ShiftError("degenerate probe: x-hat^j = 1")
            out *= (1 + qr / den) ** d
        return out
    one = AlgNum.from_rational(1)
    xh = one + q / as_algnum(gamma_hat)
    out = one
    for j, d in exps.items():
        den = xh ** j - one
        if is_zero(den):
            raise ShiftError("degenerate probe: x-hat^j = 1")
        out = out * (one + q / den) ** d
    return out


def _abs_le_alg(value, w: AlgNum, tol: Fraction) -> bool:
    """Exact test |value - w| <= tol for rational/algebraic value."""
    d = as_algnum(value) - w
    return real_cmp(d, tol) <= 0 and real_cmp(d, -tol) >= 0


def _expand(exps: dict) -> list:
    out = []
    for j in sorted(exps):
        out.extend([j] * exps[j])
    return out


def greedy_lengths(cy: ComputableY, w: AlgNum, n: int) -> list:
    """Greedy odd-stretch exponents approximating w in (0, 1] to 2**-n.

    All inequality tests run through rational probes of y at the budget
    accuracy f(n+2, candidate gadget), so only approximations of y are
    ever needed; the stopping rule fires once the probed value is within
    2**-(n+1) of the target.
    """
    if not w.is_real() or real_sign(w) <= 0 or real_cmp(w, 1) > 0:
        raise ShiftError("greedy target must be real in (0, 1]")
    if alg_eq(w, 1):
        return []
    q = cy.q
    q_up = upper_q(q)
    budget = greedy_budget(cy)
    x_lo = (_rat_lo_real(q) - 1 + cy.lo) / (1 - cy.lo)
    tol_stop = Fraction(1, 2) ** (n + 1)
    j0 = 1
    pw = x_lo
    while pw <= q_up or j0 % 2 == 0:
        j0 += 1
        pw *= x_lo
    if j0 % 2 == 0:
        j0 += 1
        pw *= x_lo
    exps: dict = {}
    j = j0
    stages = 0

    def probe(cand: dict):
        lengths = _expand(cand) or [j]
        fbits = budget.f(n + 2, lengths)
        gamma_hat = cy.approx(fbits) - 1
        return _theta_value_at(q, gamma_hat, cand)

    while True:
        d = 0
        while True:
            cand = dict(exps)
            if d:
                cand[j] = d
            val = probe(cand)
            if _abs_le_alg(val, w, tol_stop):
                return _expand(cand)
            cand2 = dict(exps)
            cand2[j] = d + 1
            val2 = probe(cand2)
            if real_cmp(val2, w) >= 0:
                d += 1
            else:
                break
            if d > 100000:
                raise ShiftError("greedy exponent ran away")
        if d:
            exps[j] = d
        j += 2
        stages += 1
        if stages > 8 * (n + j0 + 64):
            raise ShiftError("greedy stage cap exceeded before the "
                             "stopping rule fired")


def greedy_real_shift(point: ParamPoint, target, k: int, n: int
                      ) -> ShiftCertificate:
    """Theta shift from a real point with y in (1 - q/2, 1), x < -1 to a
    real algebraic target w in [y^k, 1], accurate to 2**-n."""
    w = as_algnum(target)
    cy = computable_from_exact(point.q, point.y)
    if alg_eq(w, 1):
        return ShiftCertificate(
            source=point, gadget_root=None,
            weights={_SRC_LABEL: point.gamma}, target_y=w,
            implemented_y=AlgNum.from_rational(1), error_exponent=None,
            trace=("empty-product",), theta=True)
    lengths = greedy_lengths(cy, w, n)
    one = AlgNum.from_rational(1)
    impl = theta_weight(lengths, point) + one if lengths else one
    return ShiftCertificate(
        source=point, gadget_root=_theta_tree(lengths) if lengths else None,
        weights={_SRC_LABEL: point.gamma}, target_y=w,
        implemented_y=impl, error_exponent=n,
        trace=(f"greedy:{len(lengths)}", f"k:{k}"), theta=True)


# ---------------------------------------------------------------------------
# argument wrapping: non-real |x| > 1 into the real unit interval
# ---------------------------------------------------------------------------


@dataclass
class WrapState:
    """Invariant record of the wrapping construction: after step m the
    accumulated argument tau_m satisfies 0 <= 2*pi - tau_m < theta_m,
    certified by the exact window tests run at each step."""

    exponents: tuple
    margin_c: Fraction
    margin_r: Fraction
    windows_certified: bool

    def exponent_cap_ok(self) -> bool:
        cap = 2 * PI_UP / (self.margin_c * self.margin_r)
        return all(Fraction(e) <= cap for e in self.exponents)


class WrapLimit:
    """Limit descriptor of the wrapped product w in (0, 1).

    For a source point with non-real y and |x| > 1, builds stretch lengths
    sigma(j + m2) whose stretch values z_j approach 1 from inside the unit
    disc in a controlled cone, and greedily raises them to exponents e_j
    keeping the accumulated argument just below a full turn.  The partial
    products converge geometrically to a real limit w in (0, 1) with the
    certified tail bound PI_UP * g_up(m) + T * r^m.

    When x lies on the imaginary axis a single even stretch lands in
    (0, 1) exactly and the limit degenerates to that algebraic value.
    """

    def __init__(self, point: ParamPoint):
        q, x, y = point.q, point.x, point.y
        if not q.is_real() or real_sign(q) <= 0:
            raise UnsupportedRegimeError("wrapping requires real q > 0")
        if y.is_real():
            raise ShiftError("wrapping requires a non-real source y")
        if real_cmp(x * x.conj(), 1) <= 0:
            raise ShiftError("wrapping requires |x| > 1")
        self.point = point
        self.one = AlgNum.from_rational(1)
        if sign_re(x) == 0:
            self._init_exact()
            return
        self.exact_value = None
        self.stretch_m = None
        self.plan = sigma_plan(x)
        bits = 16
        while True:
            lo, hi = x.enclosure(bits).mag_bounds(bits)
            if lo > 1:
                break
            bits *= 2
            if bits > 1 << 12:
                raise ShiftError("could not bound |x| above 1")
        self.R_lo, self.R_up = lo, hi
        self.q_up = upper_q(q)
        q_lo = _rat_lo_real(q)
        if q_lo <= 0:
            raise ShiftError("need a positive lower bound on q")
        self.q_lo = q_lo
        C = self.plan.margin_C
        K = self.plan.bound_k
        margin = max(self.q_up / 2 - 1, Fraction(0)) + Fraction(1, 8)
        m1, p = 1, self.R_lo
        while C * p < margin:
            m1 += 1
            p *= self.R_lo
        m2, p = 1, self.R_lo
        while p < 4 * self.q_up:
            m2 += 1
            p *= self.R_lo
        self.m2 = max(m1, m2)
        # tail constant: sum_{j>m} h(j) e_j <= T * R_lo^-m, using
        # h(j) <= 2 q R^-(j+m2) and e_j <= (8 pi / C) R^(sigma gap) with
        # sigma gaps at most K
        self.T = (16 * PI_UP * self.q_up * self.R_up ** K
                  / (C * (self.R_lo - 1) * self.R_lo ** self.m2))
        self.margin_c = (self.q_lo * C / 4) / (
            self.R_up ** (self.m2 + K))
        self.margin_r = 1 / self.R_lo
        self._zs: list = []
        self._es: list = []
        self._prods: list = []
        self._gups: list = []
        self._sigma_pow = (0, self.one)  # (exponent, x**exponent)

    # -- exact special case -------------------------------------------------

    def _init_exact(self):
        q, x = self.point.q, self.point.x
        one = self.one
        x2 = x * x
        if not (x2.is_real() and real_sign(x2) < 0):
            raise ShiftError("internal: expected x^2 real negative")
        m = 2
        xm = x2
        step = x2 * x2
        while True:
            ym = one + q / (xm - one)
            if real_sign(ym) > 0:
                break
            m += 4
            xm = xm * step
            if m > 20000:
                raise ShiftError("axis stretch search did not terminate")
        if not real_cmp(ym, 1) < 0:
            raise ShiftError("internal: axis stretch value not below 1")
        self.exact_value = ym
        self.stretch_m = m
        self.plan = None

    @property
    def is_exact(self) -> bool:
        return self.exact_value is not None

    # -- step construction --------------------------------------------------

    def _x_power(self, s: int) -> AlgNum:
        cur_s, cur = self._sigma_pow
        if s < cur_s:
            return self.point.x ** s
        out = cur * self.point.x ** (s - cur_s) if s > cur_s else cur
        self._sigma_pow = (s, out)
        return out

    def _extend_to(self, m: int):
        q = self.point.q
        one = self.one
        while len(self._es) < m:
            j = len(self._es) + 1
            s = sigma_eval(self.plan, j + self.m2)
            xs = self._x_power(s)
            z = one + q / (xs - one)
            bits = 24
            while True:
                box = z.enclosure(bits)
                if (box.re.lo > 0 and box.re.hi < 1 and box.im.lo > 0):
                    break
                bits *= 2
                if bits > 1 << 12:
                    raise ShiftError(
                        "stretch value left its certified cone")
            g_lo, g_up = box.im.lo, box.im.hi
            cap_e = int(2 * PI_UP / g_lo) + 3
            prev = self._prods[-1] if self._prods else one
            if j == 1:
                e, wcur = 1, z
            else:
                e, wcur = 0, prev
            while True:
                wnext = wcur * z
                cond_a = arg_in_interval(wcur, Fraction(3, 4), Fraction(1))
                cond_b = arg_in_interval(wnext, Fraction(0), Fraction(1, 4)) \
                    and not (wnext.is_real() and real_sign(wnext) > 0)
                if cond_a and cond_b:
                    break
                wcur = wnext
                e += 1
                if e > cap_e:
                    raise ShiftError("wrap exponent search ran away")
            self._zs.append(z)
            self._es.append(e)
            self._prods.append(wcur)
            self._gups.append(g_up)

    def partial_product(self, m: int) -> AlgNum:
        if self.is_exact:
            return self.exact_value
        self._extend_to(m)
        return self._prods[m - 1]

    def tail_bound(self, m: int) -> Fraction:
        """Certified |partial_product(m) - w| + argument defect bound."""
        if self.is_exact:
            return Fraction(0)
        self._extend_to(m)
        return PI_UP * self._gups[m - 1] + self.T * self.margin_r ** m

    def state(self, m: int) -> WrapState:
        if self.is_exact:
            return WrapState((), Fraction(1), Fraction(1), True)
        self._extend_to(m)
        return WrapState(tuple(self._es[:m]), self.margin_c, self.margin_r,
                         True)

    def _depth_for(self, tol: Fraction) -> int:
        m = 1
        while self.tail_bound(m) > tol:
            m += 1
            if m > 500000:
                raise ShiftError("wrap depth cap exceeded")
        return m

    # -- outputs ------------------------------------------------------------

    def certificate(self, n: int) -> ShiftCertificate:
        point = self.point
        if self.is_exact:
            cert = stretch(point, self.stretch_m)
            cert.meta["wrap_exact"] = True
            return cert
        m = self._depth_for(Fraction(1, 2) ** n)
        cache = {}
        children = []
        for j in range(1, m + 1):
            e = self._es[j - 1]
            if e == 0:
                continue
            s = sigma_eval(self.plan, j + self.m2)
            p = cache.get(s)
            if p is None:
                p = _path_tree(s)
                cache[s] = p
            children.extend([p] * e)
        root = _parallel_of(children)
        return ShiftCertificate(
            source=point, gadget_root=root,
            weights={_SRC_LABEL: point.gamma}, target_y=self,
            implemented_y=self._prods[m - 1], error_exponent=n,
            trace=(f"wrap:m={m}",), theta=True,
            meta={"wrap_m": m, "tail_bound": str(self.tail_bound(m))})

    def approx(self, n: int) -> Fraction:
        if self.is_exact:
            b = self.exact_value.refine(n + 2)
            return (b.re.lo + b.re.hi) / 2
        m = self._depth_for(Fraction(1, 2) ** (n + 1))
        box = self._prods[m - 1].refine(n + 3)
        return (box.re.lo + box.re.hi) / 2

    def bounds(self):
        """Certified rationals 0 < lo <= w <= hi < 1."""
        if self.is_exact:
            bits = 8
            while True:
                box = self.exact_value.refine(bits)
                if 0 < box.re.lo and box.re.hi < 1:
                    return box.re.lo, box.re.hi
                bits *= 2
                if bits > 1 << 12:
                    raise ShiftError("could not bracket the limit")
        n = 4
        while n <= 1 << 11:
            tol = Fraction(1, 2) ** n
            a = self.approx(n)
            lo, hi = a - tol, a + tol
            if 0 < lo and hi < 1:
                return lo, hi
            n *= 2
        raise ShiftError("could not bracket the wrap limit inside (0, 1)")


def wrap_to_unit_interval(point: ParamPoint, n: int):
    """(certificate at accuracy 2**-n, limit descriptor)."""
    limit = WrapLimit(point)
    return limit.certificate(n), limit


# ---------------------------------------------------------------------------
# composition
# ---------------------------------------------------------------------------


@dataclass
class ThetaShiftPlan:
    """Producer of theta gadgets over an intermediate point.

    `build(m)` returns path lengths whose theta weight at the true
    intermediate point is within 2**-m of `target_y` (1 + weight, as a
    y-value).  `budget` carries the intermediate point's constants.
    """

    q: AlgNum
    budget: PrecisionBudget
    target_y: object
    build: Callable[[int], list]
    label: str = "m"
    description: str = ""


def compose_transitive(s1: Callable[[int], ShiftCertificate],
                       plan: ThetaShiftPlan, n: int) -> ShiftCertificate:
    """Substitute an inner shift into a theta plan over its target point.

    `s1(b)` must return a certificate implementing the plan's intermediate
    y-value to 2**-b (exact certificates qualify for any b).  The theta
    gadget is requested at accuracy 2**-(n+1) and the inner shift at the
    budget accuracy f(n+1, lengths), giving overall accuracy 2**-n.
    """
    if n < 1:
        raise ShiftError("accuracy exponent must be >= 1")
    one = AlgNum.from_rational(1)
    lengths = plan.build(n + 1)
    if not lengths:
        c1 = s1(n + 1)
        return ShiftCertificate(
            source=c1.source, gadget_root=None, weights=c1.weights,
            target_y=plan.target_y, implemented_y=one, error_exponent=n,
            trace=("empty-theta",) + ((plan.description,) if
                                      plan.description else ()),
            theta=True)
    fbits = plan.budget.f(n + 1, lengths)
    c1 = s1(fbits)
    if c1.gadget_root is None:
        raise ShiftError("cannot substitute an edgeless inner gadget")
    gamma2 = c1.implemented_y - one
    if is_zero(gamma2):
        raise ShiftError("inner shift landed on y = 1: composition "
                         "degenerates")
    p2 = to_xy(plan.q, gamma2)
    y3 = theta_weight(lengths, p2) + one
    root2 = _theta_tree(lengths, plan.label)
    root = _subst(root2, {plan.label: c1.gadget_root})
    desc = (plan.description,) if plan.description else ()
    return ShiftCertificate(
        source=c1.source, gadget_root=root, weights=c1.weights,
        target_y=plan.target_y, implemented_y=y3, error_exponent=n,
        trace=c1.trace + (f"compose:f={fbits}",) + desc
        + (f"theta:{len(lengths)}",),
        theta=False)


def chain_exact(prefix: ShiftCertificate,
                inner: ShiftCertificate) -> ShiftCertificate:
    """Substitute an exact prefix shift into every edge of an inner
    certificate built over the prefix's derived point."""
    if prefix.error_exponent is not None:
        raise ShiftError("chain prefix must be exact")
    if prefix.gadget_root is None:
        raise ShiftError("chain prefix must have a gadget")
    if inner.gadget_root is None:
        return ShiftCertificate(
            source=prefix.source, gadget_root=None, weights=prefix.weights,
            target_y=inner.target_y, implemented_y=inner.implemented_y,
            error_exponent=inner.error_exponent,
            trace=prefix.trace + inner.trace, theta=inner.theta,
            meta=dict(inner.meta))
    if not alg_eq(inner.source.gamma + AlgNum.from_rational(1),
                  prefix.implemented_y):
        raise ShiftError("chain mismatch: inner source is not the prefix "
                         "target")
    mapping = {lab: prefix.gadget_root for lab in inner.weights}
    root = _subst(inner.gadget_root, mapping)
    return ShiftCertificate(
        source=prefix.source, gadget_root=root, weights=prefix.weights,
        target_y=inner.target_y, implemented_y=inner.implemented_y,
        error_exponent=inner.error_exponent,
        trace=prefix.trace + inner.trace, theta=False,
        meta=dict(inner.meta))


def _merge_weights(w1: dict, w2: dict) -> dict:
    out = dict(w1)
    for lab, v in w2.items():
        if lab in out and not alg_eq(as_algnum(out[lab]), as_algnum(v)):
            raise ShiftError(f"conflicting weights for label {lab!r}")
        out[lab] = v
    return out


def compose_parallel(s1: Callable[[int], ShiftCertificate],
                     s2: Callable[[int], ShiftCertificate],
                     target_a: AlgNum, target_b: AlgNum,
                     n: int) -> ShiftCertificate:
    """Parallel composition: implements the product of the two targets."""
    target_a, target_b = as_algnum(target_a), as_algnum(target_b)
    bound = (_rat_up_real(alg_abs(target_a)) + 1
             + _rat_up_real(alg_abs(target_b)))
    extra = max(_ceil_log2(bound), 0) + 1
    target = target_a * target_b
    tol = Fraction(1, 2) ** n
    m = n + extra
    for _ in range(4):
        ca, cb = s1(m), s2(m)
        if ca.gadget_root is None or cb.gadget_root is None:
            raise ShiftError("parallel composition needs nonempty gadgets")
        root = _parallel_of((ca.gadget_root, cb.gadget_root))
        impl = ca.implemented_y * cb.implemented_y
        try:
            ok, _bound = _certify_abs_le(impl - target, tol)
        except ShiftError:
            ok = False
        if ok:
            return ShiftCertificate(
                source=ca.source, gadget_root=root,
                weights=_merge_weights(ca.weights, cb.weights),
                target_y=target, implemented_y=impl, error_exponent=n,
                trace=ca.trace + ("parallel-join",) + cb.trace,
                theta=False)
        m += 8
    raise ShiftError("parallel composition failed to certify its error")


def compose_series(s1: Callable[[int], ShiftCertificate],
                   s2: Callable[[int], ShiftCertificate],
                   q: AlgNum, target_a: AlgNum, target_b: AlgNum,
                   n: int) -> ShiftCertificate:
    """Series composition: multiplies the x-coordinates of the targets."""
    one = AlgNum.from_rational(1)
    target_a, target_b = as_algnum(target_a), as_algnum(target_b)
    for t in (target_a, target_b):
        if alg_eq(t, one):
            raise ShiftError("series composition target y = 1 degenerates")
    xa = one + q / (target_a - one)
    xb = one + q / (target_b - one)
    xab = xa * xb
    if alg_eq(xab, one):
        raise ShiftError("series composition lands on x = 1")
    target = one + q / (xab - one)
    tol = Fraction(1, 2) ** n
    m = n + 8
    for _ in range(5):
        ca, cb = s1(m), s2(m)
        if ca.gadget_root is None or cb.gadget_root is None:
            raise ShiftError("series composition needs nonempty gadgets")
        ya, yb = ca.implemented_y, cb.implemented_y
        if alg_eq(ya, one) or alg_eq(yb, one):
            raise ShiftError("series composition hit y = 1")
        xha = one + q / (ya - one)
        xhb = one + q / (yb - one)
        xh = xha * xhb
        if alg_eq(xh, one):
            raise ShiftError("series composition hit x = 1")
        impl = one + q / (xh - one)
        root = _series_of((ca.gadget_root, cb.gadget_root))
        try:
            ok, _bound = _certify_abs_le(impl - target, tol)
        except ShiftError:
            ok = False
        if ok:
            return ShiftCertificate(
                source=ca.source, gadget_root=root,
                weights=_merge_weights(ca.weights, cb.weights),
                target_y=target, implemented_y=impl, error_exponent=n,
                trace=ca.trace + ("series-join",) + cb.trace,
                theta=False)
        m += 16
    raise ShiftError("series composition failed to certify its error")


# ---------------------------------------------------------------------------
# full pipeline
# ---------------------------------------------------------------------------


def _source_to_unit_interval_producer(source: ParamPoint):
    """(certificate producer, ComputableY) implementing a point with y in
    (0, 1) from the source to any requested accuracy."""
    q, y = source.q, source.y
    one = AlgNum.from_rational(1)
    if y.is_real():
        if not (real_cmp(y, -1) > 0 and real_cmp(y, 0) < 0):
            raise ShiftError("real source y must lie in (-1, 0)")
        cert = thicken(source, 2)
        cy = computable_from_exact(q, cert.implemented_y)

        def s1(_bits: int) -> ShiftCertificate:
            return cert

        return s1, cy
    if sign_re(y) == 0 and real_cmp(q, 2) == 0:
        c4 = _case_imag_axis(source)
        y2 = c4.implemented_y           # in (-1, 0)
        root = _parallel_of((c4.gadget_root, c4.gadget_root))
        cert = _exact_cert(source, root, y2 * y2,
                           c4.trace + ("thicken:2",), theta=False)
        cy = computable_from_exact(q, cert.implemented_y)

        def s1(_bits: int) -> ShiftCertificate:
            return cert

        return s1, cy
    c1 = shift_to_norm_gt1(source)
    if c1.meta.get("kind") == "neg_unit_interval":
        raise ShiftError("internal: unexpected neg-unit-interval landing")
    limit = WrapLimit(c1.derived_point())
    if limit.is_exact:
        inner = limit.certificate(1)    # exact
        cert = chain_exact(c1, inner)
        cy = computable_from_exact(q, cert.implemented_y)

        def s1(_bits: int) -> ShiftCertificate:
            return cert

        return s1, cy
    lo, hi = limit.bounds()
    cy = ComputableY(q=q, approx=limit.approx, lo=lo, hi=hi, exact=None)

    def s1(bits: int) -> ShiftCertificate:
        return chain_exact(c1, limit.certificate(bits))

    return s1, cy


def _shift_to_01_target(source: ParamPoint, w: AlgNum,
                        n: int) -> ShiftCertificate:
    if alg_eq(w, 1):
        return ShiftCertificate(
            source=source, gadget_root=None,
            weights={_SRC_LABEL: source.gamma}, target_y=w,
            implemented_y=AlgNum.from_rational(1), error_exponent=None,
            trace=("empty-product",), theta=True)
    s1, cy = _source_to_unit_interval_producer(source)
    plan = ThetaShiftPlan(
        q=source.q, budget=greedy_budget(cy), target_y=w,
        build=lambda m: greedy_lengths(cy, w, m),
        description="greedy-to-target")
    return compose_transitive(s1, plan, n)


def _half_point(q: AlgNum) -> ParamPoint:
    return to_xy(q, Fraction(-1, 2))


def _producer_to_half(source: ParamPoint):
    half = as_algnum(Fraction(1, 2))

    def s(m: int) -> ShiftCertificate:
        return _shift_to_01_target(source, half, m)

    return s


def full_approx_shift(source: ParamPoint, target, n: int
                      ) -> ShiftCertificate:
    """Approximate shift from an admissible source (q >= 2, y in (-1, 0)
    or non-real, not an excluded point) to any real algebraic target
    y-value, accurate to 2**-n."""
    _check_admissible(source)
    if n < 1:
        raise ShiftError("accuracy exponent must be >= 1")
    y = source.y
    if y.is_real() and not (real_cmp(y, -1) > 0 and real_cmp(y, 0) < 0):
        raise ShiftError("real source y must lie in (-1, 0)")
    w = as_algnum(target)
    if not w.is_real():
        raise ShiftError("target y must be real algebraic")
    q = source.q
    one = AlgNum.from_rational(1)
    sgn = real_sign(w)
    if sgn > 0 and real_cmp(w, 1) <= 0:
        return _shift_to_01_target(source, w, n)
    if sgn == 0:
        # through (1 - 2q, 1/2), then a long thickening sends y to 0
        ph = _half_point(q)
        plan = ThetaShiftPlan(
            q=q, budget=precision_budget(ph), target_y=w,
            build=lambda m: [1] * m, description="thicken-to-zero")
        return compose_transitive(_producer_to_half(source), plan, n)
    if sgn > 0:
        # w > 1: through (1 - 2q, 1/2), 2-stretch to x2 = (1-2q)^2, then
        # ascend with exact stretch values of the resulting y2 > 1
        ph = _half_point(q)
        x2 = ph.x * ph.x
        y2 = one + q / (x2 - one)
        plan2 = ThetaShiftPlan(
            q=q, budget=precision_budget(ph), target_y=y2,
            build=lambda m: [2], description="square-stretch")
        s_half = _producer_to_half(source)

        def s2x(m: int) -> ShiftCertificate:
            return compose_transitive(s_half, plan2, m)

        p2 = to_xy(q, y2 - one)
        plan3 = ThetaShiftPlan(
            q=q, budget=precision_budget(p2), target_y=w,
            build=lambda m: _ascending_lengths(q, p2.x, w, m)[0],
            description="ascending-greedy")
        return compose_transitive(s2x, plan3, n)
    # w < 0: parallel-compose a shift to 1 - q with a shift to w/(1 - q)
    y3 = w / (one - q)
    base = shift_to_norm_lt1(source)
    pb = base.derived_point()

    def s_zero(m: int) -> ShiftCertificate:
        return chain_exact(base, approx_shift_to_1mq(pb, m))

    def s_pos(m: int) -> ShiftCertificate:
        return full_approx_shift(source, y3, m)

    return compose_parallel(s_zero, s_pos, one - q, y3, n)


# ---------------------------------------------------------------------------
# JSON serialization of certificates
# ---------------------------------------------------------------------------


def _tree_to_json(node):
    if node[0] == "edge":
        return {"edge": node[1]}
    return {"op": node[0], "children": [_tree_to_json(ch) for ch in node[1]]}


def _tree_from_json(obj):
    if "edge" in obj:
        return ("edge", obj["edge"])
    return (obj["op"], tuple(_tree_from_json(ch) for ch in obj["children"]))


def certificate_to_json(cert: ShiftCertificate) -> dict:
    target = cert.target_y
    if isinstance(target, WrapLimit):
        target_obj = {
            "kind": "wrap_limit",
            "q": format_literal(target.point.q),
            "gamma": format_literal(target.point.gamma),
        }
    else:
        target_obj = {"kind": "algebraic",
                      "value": format_literal(as_algnum(target))}
    return {
        "format": "shift-certificate-v1",
        "source": {
            "q": format_literal(cert.source.q),
            "gamma": format_literal(cert.source.gamma),
        },
        "gadget": None if cert.gadget_root is None
        else _tree_to_json(cert.gadget_root),
        "weights": {lab: format_literal(as_algnum(w))
                    for lab, w in cert.weights.items()},
        "target": target_obj,
        "implemented": format_literal(cert.implemented_y),
        "error_exponent": cert.error_exponent,
        "trace": list(cert.trace),
        "theta": cert.theta,
        "meta": {k: v for k, v in cert.meta.items()
                 if isinstance(v, (str, int, bool))},
    }


def certificate_from_json(obj) -> ShiftCertificate:
    if isinstance(obj, str):
        obj = json.loads(obj)
    if obj.get("format") != "shift-certificate-v1":
        raise ShiftError("unknown certificate format")
    q = parse_literal(obj["source"]["q"])
    gamma = parse_literal(obj["source"]["gamma"])
    source = to_xy(q, gamma)
    weights = {lab: parse_literal(lit)
               for lab, lit in obj["weights"].items()}
    root = None if obj["gadget"] is None else _tree_from_json(obj["gadget"])
    tobj = obj["target"]
    if tobj["kind"] == "wrap_limit":
        tq = parse_literal(tobj["q"])
        tg = parse_literal(tobj["gamma"])
        target = WrapLimit(to_xy(tq, tg))
    else:
        target = parse_literal(tobj["value"])
    return ShiftCertificate(
        source=source, gadget_root=root, weights=weights, target_y=target,
        implemented_y=parse_literal(obj["implemented"]),
        error_exponent=obj["error_exponent"],
        trace=tuple(obj.get("trace", ())), theta=bool(obj.get("theta")),
        meta=dict(obj.get("meta", {})))
