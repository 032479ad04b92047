"""Jones polynomial evaluation through the Tutte polynomial.

For an alternating link with Tait graph G, the Jones polynomial at t is a
writhe-dependent prefactor times T(G; -t, -1/t); this module evaluates
the Tutte core exactly at algebraic t and exposes the induced
chromatic-like parameter q(t) = 2 + t + 1/t, which equals
2 - 2 cos(a pi / b) at t = -e^{i a pi / b}.  The prefactor (a power of t
determined by the link diagram) is out of scope here.
"""

from __future__ import annotations

from fractions import Fraction

from .algebraic import (
    AlgNum,
    alg_eq,
    alg_re,
    as_algnum,
    real_sign,
)
from .graph import (
    MultiGraph,
    ParamPoint,
    deletion_contraction_Z,
    to_qgamma,
    tutte_T,
)


class JonesEvalError(ValueError):
    """Evaluation request at a degenerate parameter."""


def _validated_t(t) -> AlgNum:
    t = as_algnum(t)
    if t.is_zero():
        raise JonesEvalError("t = 0: the Tutte substitution x = -t, "
                             "y = -1/t is undefined")
    if alg_eq(t, -1):
        raise JonesEvalError("t = -1 gives x = y = 1, outside the Tutte "
                             "parametrization")
    return t


def jones_point(t) -> ParamPoint:
    """The Tutte-plane point (x, y) = (-t, -1/t) for the Jones variable t."""
    t = _validated_t(t)
    one = AlgNum.from_rational(1)
    return to_qgamma(-t, (one / t) * AlgNum.from_rational(-1))


def induced_q(t) -> AlgNum:
    """q = (x-1)(y-1) at (x, y) = (-t, -1/t), i.e. 2 + t + 1/t."""
    t = _validated_t(t)
    one = AlgNum.from_rational(1)
    return as_algnum(2) + t + one / t


def jones_core(G: MultiGraph, t) -> AlgNum:
    """T(G; -t, -1/t): the Jones polynomial of the link with Tait graph G
    up to the writhe prefactor."""
    t = _validated_t(t)
    one = AlgNum.from_rational(1)
    return tutte_T(G, -t, (one / t) * AlgNum.from_rational(-1))


def special_point_check(t) -> bool:
    """Whether t maps to one of the classically easy Tutte points.

    These are t = 1 and t = -e^{2 pi i/3}, -e^{4 pi i/3} (the sixth roots
    of unity e^{5 pi i/3} and e^{pi i/3})."""
    t = as_algnum(t)
    if alg_eq(t, 1):
        return True
    return (alg_eq(t, AlgNum.root_of_unity(1, 6))
            or alg_eq(t, AlgNum.root_of_unity(5, 6)))


def unit_circle_point(a: int, b: int) -> ParamPoint:
    """The point (x, y) = (e^{-a pi i/b}, e^{a pi i/b}); its q equals
    2 - 2 cos(a pi / b)."""
    if b < 1 or not 0 < a < 2 * b:
        raise JonesEvalError("need 0 < a < 2b")
    if a == b:
        # x = y = -1 is fine, but a = 0 or a = 2b would give x = y = 1
        pass
    y = AlgNum.root_of_unity(a % (2 * b), 2 * b)
    x = y.conj()
    return to_qgamma(x, y)


def cos_q_identity(a: int, b: int) -> tuple:
    """(q, 2 - zeta - zeta^{-1}) for zeta = e^{a pi i/b}; the two entries
    are equal and real, witnessing q = 2 - 2 cos(a pi/b)."""
    point = unit_circle_point(a, b)
    zeta = AlgNum.root_of_unity(a % (2 * b), 2 * b)
    one = AlgNum.from_rational(1)
    rhs = as_algnum(2) - zeta - one / zeta
    return point.q, rhs


def sign_real_part(G: MultiGraph, point: ParamPoint) -> int:
    """Sign of Re Z(G; q, gamma) at the given point (weights all gamma)."""
    table = {lab: point.gamma for lab in set(l for _, _, l in G.edges)}
    Z = deletion_contraction_Z(G.with_weights(table), point.q)
    return real_sign(alg_re(Z))
