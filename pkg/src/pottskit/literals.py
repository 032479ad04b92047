"""Algebraic-number literal grammar shared by the CLI and file formats.

Three forms:
  - ``rat:p/q``                      rational (``/q`` optional)
  - ``gauss:p/q+r/s*i``              Gaussian rational
  - ``alg:{"poly": [c0,...,cd], "rect": ["re_lo", "re_hi", "im_lo", "im_hi"]}``
    general algebraic number: integer defining polynomial (lowest degree
    first) plus an isolating rectangle with rational entries.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction

from .algebraic import AlgNum, GaussRat
from .rect import RatRect

_RAT = r"[+-]?\d+(?:/\d+)?"
_GAUSS_RE = re.compile(rf"^({_RAT})([+-]{{1,2}}\d+(?:/\d+)?)\*i$")


class LiteralError(ValueError):
    """Malformed algebraic-number literal."""


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise LiteralError(f"bad rational {text!r}: {e}") from None


def parse_literal(text: str) -> AlgNum:
    if text.startswith("rat:"):
        return AlgNum.from_rational(parse_rational(text[4:]))
    if text.startswith("gauss:"):
        body = text[6:]
        m = _GAUSS_RE.match(body)
        if not m:
            raise LiteralError(
                f"bad gaussian literal {text!r} (expected p/q+r/s*i)"
            )
        re_part = parse_rational(m.group(1))
        im_text = m.group(2)
        if im_text.startswith("+"):
            im_text = im_text[1:]
        im_part = parse_rational(im_text)
        return AlgNum.from_gauss(GaussRat(re_part, im_part))
    if text.startswith("alg:"):
        try:
            obj = json.loads(text[4:])
        except json.JSONDecodeError as e:
            raise LiteralError(f"bad alg literal JSON: {e}") from None
        return _alg_from_obj(obj)
    raise LiteralError(
        f"unknown literal {text!r} (expected rat:, gauss: or alg: prefix)"
    )


def _alg_from_obj(obj) -> AlgNum:
    if not isinstance(obj, dict) or "poly" not in obj or "rect" not in obj:
        raise LiteralError("alg literal needs 'poly' and 'rect' fields")
    poly = tuple(int(c) for c in obj["poly"])
    rect = obj["rect"]
    if len(rect) != 4:
        raise LiteralError("alg rect needs 4 entries")
    vals = [parse_rational(str(v)) for v in rect]
    box = RatRect.from_bounds(*vals)
    return AlgNum.from_poly_and_rect(poly, box)


def format_literal(a: AlgNum) -> str:
    """Canonical literal for an AlgNum (round-trips through parse_literal)."""
    if a.is_rational():
        return f"rat:{a.as_rational()}"
    g = _as_gauss(a)
    if g is not None:
        sign = "+" if g.im >= 0 else "-"
        return f"gauss:{g.re}{sign}{abs(g.im)}*i"
    poly = a.defining_poly
    box = a.refine(32)
    rect = [str(v) for v in (box.re.lo, box.re.hi, box.im.lo, box.im.hi)]
    return "alg:" + json.dumps({"poly": list(poly), "rect": rect})


def _as_gauss(a: AlgNum) -> GaussRat | None:
    if a.field.poly == (1, 0, 1):
        re_part, im_part = a.coeffs
        if a.field.root_index != _plus_i_index():
            im_part = -im_part
        return GaussRat(re_part, im_part)
    return None


_I_IDX = None


def _plus_i_index() -> int:
    global _I_IDX
    if _I_IDX is None:
        _I_IDX = AlgNum.i_unit().field.root_index
    return _I_IDX
