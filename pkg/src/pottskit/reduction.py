"""Oracle-driven reduction: exact Tutte values from approximate oracles.

The engine recovers the exact algebraic ratio Z_{s|t}/Z_st of a weighted
graph from an oracle that only answers approximate questions about
partition-function values:

- a *norm* oracle returns a rational within a multiplicative factor
  K = 1 + 1/41 of |Z|;
- a *sign* oracle returns the sign of a real Z (unreliable only at 0);
- an *argument* oracle returns an angle within a fixed distance of some
  argument of Z (angles are exchanged in units of pi so everything stays
  rational).

Z of the probe graph H' (a copy of H plus one extra edge between the
terminals carrying weight epsilon - 1) is linear in epsilon, so locating
its zero by interval shrinking pins down the ratio; the ratio is then
reconstructed exactly by lattice reduction from a sufficiently accurate
rational approximation, and a deletion recursion turns ratios into exact
partition-function values.

Probe points are attached to the probe edge as exact rational weights;
realizing them as two-weight theta gadgets (which hits the same values to
any requested accuracy) is covered by the shift calculus and exercised
separately.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .algebraic import (
    AlgNum,
    alg_abs,
    alg_eq,
    as_algnum,
    is_zero,
    real_cmp,
    real_sign,
)
from .graph import (
    MultiGraph,
    brute_force_pair,
    substitute_gadget,
)
from .intpoly import refine_real_root
from .lattice import (
    MinPolyBudget,
    MinPolyRecoveryError,
    minpoly_budget,
    minpoly_from_approx,
    sturm_isolate,
)
from .shifts import PI_UP, ShiftCertificate, _ceil_log2


class ReductionError(ValueError):
    """A precondition of the reduction engine is violated."""


class OracleContractError(ReductionError):
    """The oracle produced answers impossible under its contract."""


# ---------------------------------------------------------------------------
# exact rational evaluation helpers
# ---------------------------------------------------------------------------


def _rational_weights(G: MultiGraph):
    out = {}
    for lab, w in G.weight_table.items():
        w = as_algnum(w)
        if not w.is_rational():
            return None
        out[lab] = w.as_rational()
    return out


def pair_fraction(G: MultiGraph, q: Fraction):
    """(Z_st, Z_{s|t}) over the rationals by subset enumeration."""
    if G.terminals is None:
        raise ReductionError("terminals required")
    weights = _rational_weights(G)
    if weights is None:
        raise ReductionError("pair_fraction needs rational weights")
    q = Fraction(q)
    m = len(G.edges)
    if m > 18:
        raise ReductionError("edge count exceeds the enumeration cap")
    s, t = G.terminals
    n = G.vertex_count
    qpow = [q ** i for i in range(n + 1)]
    ew = [(u, v, weights[lab]) for u, v, lab in G.edges]
    acc = [Fraction(0), Fraction(0)]

    def walk(i, parent, comps, prod):
        if i == m:
            a, b = s, t
            while parent[a] >= 0:
                a = parent[a]
            while parent[b] >= 0:
                b = parent[b]
            acc[0 if a == b else 1] += prod * qpow[comps]
            return
        walk(i + 1, parent, comps, prod)
        u, v, w = ew[i]
        a, b = u, v
        while parent[a] >= 0:
            a = parent[a]
        while parent[b] >= 0:
            b = parent[b]
        if a == b:
            walk(i + 1, parent, comps, prod * w)
        else:
            p2 = list(parent)
            p2[a] = b
            walk(i + 1, p2, comps - 1, prod * w)

    walk(0, [-1] * n, n, Fraction(1))
    return acc[0], acc[1]


def z_fraction(G: MultiGraph, q: Fraction) -> Fraction:
    """Exact rational Z by deletion-contraction (rational weights only)."""
    weights = _rational_weights(G)
    if weights is None:
        raise ReductionError("z_fraction needs rational weights")
    q = Fraction(q)

    def rec(n, edges):
        if not edges:
            return q ** n
        (u, v, w), rest = edges[0], edges[1:]
        if u == v:
            return (1 + w) * rec(n, rest)
        def relab(a):
            if a == v:
                a = u
            return a - 1 if a > v else a
        contracted = tuple((relab(a), relab(b), wt) for a, b, wt in rest)
        return rec(n, rest) + w * rec(n - 1, contracted)

    edges = tuple((u, v, weights[lab]) for u, v, lab in G.edges)
    return rec(G.vertex_count, edges)


def _connected(G: MultiGraph, s: int, t: int) -> bool:
    parent = list(range(G.vertex_count))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v, _ in G.edges:
        parent[find(u)] = find(v)
    return find(s) == find(t)


def _component_count(G: MultiGraph) -> int:
    parent = list(range(G.vertex_count))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    comps = G.vertex_count
    for u, v, _ in G.edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            comps -= 1
    return comps


# ---------------------------------------------------------------------------
# the linear probe f(eps) = B - eps*A
# ---------------------------------------------------------------------------


@dataclass
class LinearProbe:
    """The affine map eps -> Z of H plus an (s,t)-edge of weight eps - 1.

    Z(H') = Z_{s|t}(H)(1 - 1/q) + eps (Z_st(H) + Z_{s|t}(H)/q) = B - eps*A.
    The exact coefficients A and B are carried for the simulated oracle
    and for verification; the recovery algorithm itself only uses the
    structural constants c and r and the oracle's answers.
    """

    H: MultiGraph
    q: Fraction
    gamma: Fraction
    A: Fraction
    B: Fraction
    z_st: Fraction
    z_split: Fraction
    c: Fraction
    r: int

    @classmethod
    def from_graph(cls, H: MultiGraph, q, gamma) -> "LinearProbe":
        q, gamma = Fraction(q), Fraction(gamma)
        if q in (0, 1):
            raise ReductionError("q must avoid {0, 1}")
        if gamma <= 0:
            raise ReductionError("the probe weight gamma must be positive")
        if H.terminals is None:
            raise ReductionError("probe graph needs terminals")
        s, t = H.terminals
        if not _connected(H, s, t):
            raise ReductionError("terminals must be connected")
        table = {lab: gamma for lab in H.weight_table}
        Hw = H.with_weights(table)
        z_st, z_split = pair_fraction(Hw, q)
        B = z_split * (1 - Fraction(1) / q)
        A = -(z_st + z_split / q)
        c = 2 * max(abs(q), 1 / abs(q)) * max(gamma, 1 / gamma)
        r = max(H.vertex_count, len(H.edges))
        return cls(H=Hw, q=q, gamma=gamma, A=A, B=B, z_st=z_st,
                   z_split=z_split, c=c, r=r)

    def f(self, eps) -> Fraction:
        return self.B - Fraction(eps) * self.A

    @property
    def eps_star(self) -> Fraction:
        if self.A == 0:
            raise ReductionError("A = 0: the probe is constant")
        return self.B / self.A

    def margins_ok(self) -> bool:
        """The zero's guaranteed distance from both interval ends."""
        q, c, r = self.q, self.c, self.r
        if abs(self.z_st) < c ** -r or abs(self.z_split) < c ** -r:
            return False
        e = self.eps_star
        return (abs(1 - q - e) >= abs(1 - q) * c ** (-2 * r)
                and abs(e) >= abs(1 - 1 / q) * c ** (-2 * r))


def probe_graph(H: MultiGraph, gamma, eps,
                gadget: Optional[MultiGraph] = None) -> MultiGraph:
    """H with every edge weighted gamma plus an (s,t) probe edge.

    The probe edge carries weight eps - 1 directly, or is replaced by
    `gadget` (whose implemented weight should be eps - 1) when given.
    """
    if H.terminals is None:
        raise ReductionError("probe graph needs terminals")
    s, t = H.terminals
    table = {lab: Fraction(gamma) for lab in H.weight_table}
    table["__probe__"] = Fraction(eps) - 1 if not isinstance(
        eps, AlgNum) else eps - AlgNum.from_rational(1)
    edges = list(H.edges) + [(s, t, "__probe__")]
    Hp = MultiGraph(H.vertex_count, edges, H.terminals, table)
    if gadget is None:
        return Hp
    sub, _factor = substitute_gadget(Hp, "__probe__", gadget)
    return sub


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OracleSpec:
    """Contract of an approximate oracle.

    kind: "factor_K_norm" (rational N with N/K <= |Z| <= K N),
    "sign" (the sign of a real Z), or "distance_rho_arg" (a rational A,
    in units of pi, with |A - a/pi| <= rho_pi for some argument a of Z).
    backing: "honest_exact" answers exactly; "exact_with_noise" perturbs
    within the contract pseudo-randomly by `seed`; "adversarial" always
    uses an extreme allowed factor chosen against the current comparison.
    """

    kind: str = "factor_K_norm"
    K: Fraction = Fraction(42, 41)
    rho_pi: Fraction = Fraction(1, 3)
    backing: str = "honest_exact"
    seed: int = 0

    @property
    def eta(self) -> Fraction:
        return self.K - 1

    def __post_init__(self):
        if self.kind not in ("factor_K_norm", "sign", "distance_rho_arg"):
            raise ReductionError(f"unknown oracle kind {self.kind!r}")
        if self.backing not in ("honest_exact", "exact_with_noise",
                                "adversarial"):
            raise ReductionError(f"unknown backing {self.backing!r}")
        if self.K <= 1:
            raise ReductionError("K must exceed 1")


class SimulatedOracle:
    """Contract-respecting oracle over exact probe evaluations.

    One instance is one sequential conversation: noisy answers consume a
    deterministic pseudo-random stream seeded by the spec.
    """

    def __init__(self, spec: OracleSpec):
        self.spec = spec
        self._rng = random.Random(spec.seed)
        self.query_count = 0
        self._last_mag: Optional[Fraction] = None

    # -- noise ------------------------------------------------------------

    def _factor(self, mag: Fraction) -> Fraction:
        spec = self.spec
        slack = Fraction(1, 1 << 12)
        lo = (1 + slack) / spec.K
        hi = spec.K * (1 - slack)
        if spec.backing == "honest_exact":
            return Fraction(1)
        if spec.backing == "exact_with_noise":
            u = Fraction(self._rng.randrange(1 << 24), 1 << 24)
            return lo + (hi - lo) * u
        # adversarial: inflate small values and deflate large ones so
        # consecutive differences are as misleading as the contract allows
        prev = self._last_mag
        if prev is None or mag <= prev:
            return hi
        return lo

    # -- probe queries ----------------------------------------------------

    def norm_probe(self, probe: LinearProbe, eps) -> Fraction:
        if self.spec.kind != "factor_K_norm":
            raise ReductionError("oracle kind mismatch: need factor_K_norm")
        self.query_count += 1
        z = probe.f(eps)
        mag = abs(z)
        if mag == 0:
            return Fraction(1)  # unreliable by contract
        out = self._factor(mag) * mag
        self._last_mag = mag
        return out

    def sign_probe(self, probe: LinearProbe, eps) -> int:
        if self.spec.kind != "sign":
            raise ReductionError("oracle kind mismatch: need sign")
        self.query_count += 1
        z = probe.f(eps)
        if z > 0:
            return 1
        if z < 0:
            return -1
        # unreliable at an exact zero
        return 1 if self.spec.backing == "honest_exact" else (
            1 if self._rng.random() < 0.5 else -1)

    def norm_value(self, value) -> Fraction:
        """K-approximation of |value| for a full-graph query."""
        if self.spec.kind != "factor_K_norm":
            raise ReductionError("oracle kind mismatch: need factor_K_norm")
        self.query_count += 1
        mag = _abs_to_fraction(value, self.spec.K)
        if mag == 0:
            return Fraction(1)
        out = self._factor(mag) * mag
        self._last_mag = mag
        return out

    def arg_value_pi(self, value) -> Fraction:
        """An angle (in units of pi) within rho_pi of some argument."""
        if self.spec.kind != "distance_rho_arg":
            raise ReductionError("oracle kind mismatch: need "
                                 "distance_rho_arg")
        self.query_count += 1
        a = _arg_pi_exact(value)
        if self.spec.backing == "honest_exact":
            return a
        span = self.spec.rho_pi * Fraction(7, 8)
        u = Fraction(self._rng.randrange(1 << 24), 1 << 24)
        return a + span * (2 * u - 1)


def _abs_to_fraction(value, K: Fraction) -> Fraction:
    """|value| as a rational within the multiplicative slack of K/8."""
    if isinstance(value, Fraction):
        return abs(value)
    v = as_algnum(value)
    if v.is_rational():
        return abs(v.as_rational())
    if v.is_zero():
        return Fraction(0)
    bits = 16
    while True:
        lo, hi = v.enclosure(bits).mag_bounds(bits)
        if lo > 0 and hi / lo < 1 + (K - 1) / 8:
            return (lo + hi) / 2
        bits *= 2
        if bits > 1 << 13:
            raise ReductionError("could not approximate |Z|")


def _arg_pi_exact(value) -> Fraction:
    """Exact argument in units of pi for real values (0 or 1)."""
    if isinstance(value, Fraction):
        if value == 0:
            return Fraction(0)
        return Fraction(0) if value > 0 else Fraction(1)
    v = as_algnum(value)
    if not v.is_real():
        raise ReductionError("the simulated argument oracle handles real "
                             "values only")
    s = real_sign(v)
    return Fraction(0) if s >= 0 else Fraction(1)


# ---------------------------------------------------------------------------
# interval shrinking
# ---------------------------------------------------------------------------


@dataclass
class ShrinkResult:
    lo: Fraction
    hi: Fraction
    rounds: int
    history: list = field(default_factory=list)


def _grid(lo: Fraction, hi: Fraction, p: int):
    """p+1 strictly increasing points from lo to hi with spacing at least
    3(hi-lo)/(4p), snapped to dyadics to keep denominators small."""
    l = hi - lo
    k = max(0, _ceil_log2(Fraction(8 * p) / l))
    scale = 1 << k
    pts = [lo]
    for i in range(1, p):
        target = lo + l * i / p
        snapped = Fraction(round(target * scale), scale)
        snapped = min(max(snapped, lo + l * (4 * i - 1) / (4 * p)),
                      lo + l * (4 * i + 1) / (4 * p))
        pts.append(snapped)
    pts.append(hi)
    for a, b in zip(pts, pts[1:]):
        if not a < b:
            raise ReductionError("internal: grid points not increasing")
    return pts


def _realized_grid(lo, hi, p, realize):
    """Grid points, optionally re-realized (e.g. as implemented weights of
    two-weight gadgets) to accuracy 2^-n with 2^-n <= (hi-lo)/(16p); the
    interior points must stay strictly increasing inside (lo, hi)."""
    pts = _grid(lo, hi, p)
    if realize is None:
        return pts
    bits = max(1, _ceil_log2(Fraction(16 * p) / (hi - lo)))
    out = [pts[0]]
    for t in pts[1:-1]:
        out.append(Fraction(realize(t, bits)))
    out.append(pts[-1])
    for a, b in zip(out, out[1:]):
        if not a < b:
            raise ReductionError(
                "realized query points lost their ordering")
    return out


def shrink_with_sign(oracle: SimulatedOracle, probe: LinearProbe,
                     eps_lo, eps_hi, target_len, sign_lo: int,
                     max_rounds: int = 500000,
                     realize=None) -> ShrinkResult:
    """Shrink [eps_lo, eps_hi] around the zero of the probe using a sign
    oracle; 5 query points per round, contraction at least 1/10.

    `sign_lo` is the known sign of f at the low end (from the regime
    analysis); a sign pattern impossible for a linear function raises
    OracleContractError.
    """
    lo, hi = Fraction(eps_lo), Fraction(eps_hi)
    if not lo < hi:
        raise ReductionError("empty starting interval")
    sign_hi = -sign_lo
    history = []
    rounds = 0
    while hi - lo > target_len:
        rounds += 1
        if rounds > max_rounds:
            raise ReductionError("shrink round cap exceeded")
        pts = _realized_grid(lo, hi, 4, realize)
        answers = [oracle.sign_probe(probe, e) for e in pts]
        new_lo = max([p for p, a in zip(pts, answers) if a == sign_lo],
                     default=lo)
        new_hi = min([p for p, a in zip(pts, answers) if a == sign_hi],
                     default=hi)
        if new_lo > new_hi:
            raise OracleContractError(
                "sign pattern impossible for a linear function")
        if new_lo == new_hi:
            lo = hi = new_lo
            history.append((lo, hi))
            break
        if (new_lo, new_hi) == (lo, hi):
            raise OracleContractError("sign answers made no progress")
        lo, hi = new_lo, new_hi
        history.append((lo, hi))
    return ShrinkResult(lo, hi, rounds, history)


def shrink_with_norm(oracle: SimulatedOracle, probe: LinearProbe,
                     eps_lo, eps_hi, target_len,
                     max_rounds: int = 500000,
                     realize=None) -> ShrinkResult:
    """Shrink [eps_lo, eps_hi] around the zero of the probe using a
    factor-K norm oracle at K = 1 + 1/41.

    Each round evaluates 11 points with spacing at least l/20 and keeps
    the tightest interval certified by the difference signs
    s_i = sign(f-hat(e_i) - f-hat(e_{i+1})): s_i >= 0 forces the zero
    at or above e_i, s_i <= 0 forces it at or below e_{i+1}.  Contraction
    is at least 1/10 per round.
    """
    if oracle.spec.K > Fraction(42, 41):
        raise ReductionError("norm shrinking requires K <= 1 + 1/41")
    lo, hi = Fraction(eps_lo), Fraction(eps_hi)
    if not lo < hi:
        raise ReductionError("empty starting interval")
    history = []
    rounds = 0
    while hi - lo > target_len:
        rounds += 1
        if rounds > max_rounds:
            raise ReductionError("shrink round cap exceeded")
        pts = _realized_grid(lo, hi, 10, realize)
        vals = [oracle.norm_probe(probe, e) for e in pts]
        lo_cands, hi_cands = [lo], [hi]
        for i in range(10):
            d = vals[i] - vals[i + 1]
            if d >= 0:
                lo_cands.append(pts[i])
            if d <= 0:
                hi_cands.append(pts[i + 1])
        new_lo, new_hi = max(lo_cands), min(hi_cands)
        if new_lo > new_hi:
            raise OracleContractError(
                "difference-sign pattern impossible under the norm "
                "contract")
        if new_lo == new_hi:
            lo = hi = new_lo
            history.append((lo, hi))
            break
        if (new_lo, new_hi) == (lo, hi):
            raise OracleContractError("norm answers made no progress")
        lo, hi = new_lo, new_hi
        history.append((lo, hi))
    return ShrinkResult(lo, hi, rounds, history)


# ---------------------------------------------------------------------------
# thickening bookkeeping
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThickeningPlan:
    """Smallest thickening power rho with (gamma+1)^rho - 1 > M(G)."""

    rho: int
    M_of_G: Fraction
    gamma_rho: Fraction

    @classmethod
    def for_graph(cls, q, gamma, G: MultiGraph) -> "ThickeningPlan":
        return cls.for_size(q, gamma,
                            max(G.vertex_count, len(G.edges)))

    @classmethod
    def for_size(cls, q, gamma, r: int) -> "ThickeningPlan":
        q, gamma = Fraction(q), Fraction(gamma)
        if q == 0:
            raise ReductionError("q must be nonzero")
        if gamma <= 0:
            raise ReductionError("the base weight must be positive")
        M = (8 * max(abs(q), 1 / abs(q))) ** max(r, 1)
        rho, g = 1, gamma
        while g <= M:
            rho += 1
            g = (gamma + 1) ** rho - 1
            if rho > 100000:
                raise ReductionError("thickening power ran away")
        return cls(rho=rho, M_of_G=M, gamma_rho=g)


def zero_free_sandwiches(probe: LinearProbe) -> bool:
    """The q < 0 sign sandwiches: gamma^m q - d <= Z_st <= gamma^m q + d
    (negative) and Z_{s|t} within delta of a positive multiple of q^2."""
    q, gamma = probe.q, probe.gamma
    if q >= 0:
        raise ReductionError("the sandwiches apply to q < 0 only")
    m = len(probe.H.edges)
    delta = (2 * max(abs(q), 1 / abs(q))) ** probe.r / gamma
    if delta > Fraction(1, 4):
        return False
    d = delta * gamma ** m * abs(q)
    if not (gamma ** m * q - d <= probe.z_st <= gamma ** m * q + d < 0):
        return False
    return probe.z_split > 0


# ---------------------------------------------------------------------------
# degree/height bounds and the zero lower bound
# ---------------------------------------------------------------------------


def _poly_stats(a) -> tuple:
    """(degree, usual height) of an algebraic number."""
    a = as_algnum(a)
    poly = a.defining_poly
    d = len(poly) - 1
    H = max(abs(int(c)) for c in poly)
    return max(d, 1), max(H, 1)


def ratio_degree_height_bound(q, gamma, n: int, m: int):
    """(d, U): degree and usual-height bounds on Z_{s|t}/Z_st for a graph
    with n vertices and m edges at parameters (q, gamma)."""
    dq, Hq = _poly_stats(q)
    dg, Hg = _poly_stats(gamma)
    d = dq * dg
    U = (Fraction(2) ** (m + 1)
         * Fraction(Hq * (dq + 1)) ** n
         * Fraction(Hg * (dg + 1)) ** m) ** (2 * d)
    return d, U


def lower_bound_constant(q, gamma) -> Fraction:
    """Rational C > 1 with |Z(G; q, gamma)| >= C^{-size(G)} whenever
    Z(G; q, gamma) != 0, for every graph G."""
    dq, Hq = _poly_stats(q)
    dg, Hg = _poly_stats(gamma)
    D = dq * dg
    log2_c = 2 * D * (3 + _ceil_log2(Fraction(Hq * (dq + 1)))
                      + _ceil_log2(Fraction(Hg * (dg + 1))))
    return Fraction(2) ** max(log2_c, 1)


# ---------------------------------------------------------------------------
# exact ratio recovery
# ---------------------------------------------------------------------------


def _pick_root_interval(poly, approx: Fraction, tol: Fraction):
    intervals = sturm_isolate(poly)
    window = (approx - tol, approx + tol)
    hits = [iv for iv in intervals
            if iv[1] >= window[0] and iv[0] <= window[1]]
    while len(hits) > 1:
        hits = [refine_real_root(poly, a, b, tol / 4) for a, b in hits]
        hits = [iv for iv in hits
                if iv[1] >= window[0] and iv[0] <= window[1]]
        tol /= 2
    if not hits:
        raise ReductionError(
            "no isolated real root matches the approximation")
    return hits[0]


def compute_ratio(oracle: SimulatedOracle, H: MultiGraph, rho: int,
                  regime: str, *, q, gamma1, gamma2,
                  degree_bound: Optional[int] = None,
                  height_bound=None, realization: str = "plan") -> AlgNum:
    """Exact ratio Z_{s|t}(H; q, g)/Z_st(H; q, g) for g = (gamma2+1)^rho-1
    from approximate oracle answers.

    The zero of the probe line is located by interval shrinking inside
    the regime's interval (between 0 and 1-q), the correction
    eps-hat*q/(1-q-eps-hat) is formed, and the exact algebraic ratio is
    reconstructed by lattice reduction at the degree/height budget.
    gamma1 is validated against the regime's implementable-weight range.
    """
    q = Fraction(q)
    gamma1 = Fraction(gamma1)
    gamma2 = Fraction(gamma2)
    if regime not in ("q>1", "0<q<1", "q<0"):
        raise ReductionError(f"unknown regime {regime!r}")
    if regime == "q>1" and not q > 1:
        raise ReductionError("regime q>1 needs q > 1")
    if regime == "0<q<1" and not 0 < q < 1:
        raise ReductionError("regime 0<q<1 needs q in (0,1)")
    if regime == "q<0" and not q < 0:
        raise ReductionError("regime q<0 needs q < 0")
    if regime == "q>1":
        if not -2 < gamma1 < -1:
            raise ReductionError("regime q>1 needs gamma1 in (-2,-1)")
    elif not -1 < gamma1 < 0:
        raise ReductionError("this regime needs gamma1 in (-1,0)")
    if gamma2 <= 0:
        raise ReductionError("gamma2 must be positive")
    if rho < 1:
        raise ReductionError("rho must be a positive integer")
    gamma = (gamma2 + 1) ** rho - 1
    probe = LinearProbe.from_graph(H, q, gamma)
    c, r = probe.c, probe.r
    if regime == "q<0":
        plan = ThickeningPlan.for_graph(q, gamma2, H)
        if gamma < plan.M_of_G:
            raise ReductionError(
                "thickening precondition violated: gamma below M(G)")
        if not zero_free_sandwiches(probe):
            raise ReductionError("zero-freeness sandwiches failed")

    cm2r = c ** (-2 * r)
    m0 = abs(1 - 1 / q) * cm2r / 2
    m1 = abs(1 - q) * cm2r / 2
    if q > 1:
        lo, hi = (1 - q) + m1, -m0
        sign_lo = -1          # f(1-q) < 0 in this regime
    else:
        lo, hi = m0, (1 - q) - m1
        # f(0) < 0 for 0 < q < 1; f(0) > 0 for q < 0
        sign_lo = -1 if 0 < q < 1 else 1
    if not lo < hi:
        raise ReductionError("margins swallowed the search interval")

    if degree_bound is None or height_bound is None:
        d_auto, U_auto = ratio_degree_height_bound(
            q, gamma, H.vertex_count, len(H.edges))
        d = degree_bound if degree_bound is not None else d_auto
        if height_bound is not None:
            U = Fraction(height_bound)
        else:
            U = U_auto
            if d == 1:
                # rational parameters: the ratio is a quotient of two
                # integers bounded by 2^m max(|a|,s)^n max(|p|,t)^m after
                # clearing the denominators of q = a/s and gamma = p/t
                nv, m = H.vertex_count, len(H.edges)
                direct = (Fraction(2) ** m
                          * Fraction(max(abs(q.numerator),
                                         q.denominator)) ** nv
                          * Fraction(max(abs(gamma.numerator),
                                         gamma.denominator)) ** m)
                U = min(U, direct)
    else:
        d, U = degree_bound, Fraction(height_bound)
    budget = minpoly_budget(d, U)

    realize = None
    if realization == "gadget":
        realize = _gadget_realizer(q, gamma1, gamma2)
    elif realization != "plan":
        raise ReductionError(f"unknown realization {realization!r}")

    def locate(tol: Fraction):
        # phase 1: reach the guaranteed-denominator zone
        L1 = abs(1 - q) * cm2r / 4
        a, b = lo, hi
        for _ in range(8):
            res = _shrink(oracle, probe, a, b, L1, sign_lo, realize)
            a, b = res.lo, res.hi
            eps_hat = (a + b) / 2
            denom = abs(q - 1 + eps_hat)
            if denom == 0:
                L1 /= 4
                continue
            # |alpha - alpha-bar| <= |q| c^{2r} (b-a) / (2 denom)
            err = abs(q) * c ** (2 * r) * (b - a) / (2 * denom)
            if err <= tol:
                return eps_hat
            L1 = min((b - a) / 2,
                     2 * tol * denom / (abs(q) * c ** (2 * r)))
        raise ReductionError("interval shrinking failed to converge")

    def recover(b: MinPolyBudget):
        eps_hat = locate(b.tolerance)
        alpha_bar = eps_hat * q / (1 - q - eps_hat)
        poly = minpoly_from_approx(alpha_bar, b)
        iv = _pick_root_interval(poly, alpha_bar, b.tolerance)
        from .rect import RatRect
        return AlgNum.from_poly_and_rect(
            tuple(poly), RatRect.from_bounds(iv[0], iv[1], 0, 0))

    try:
        return recover(budget)
    except MinPolyRecoveryError:
        doubled = MinPolyBudget(d, U, 2 * budget.bits)
        return recover(doubled)


def _shrink(oracle, probe, lo, hi, target_len, sign_lo,
            realize=None) -> ShrinkResult:
    if oracle.spec.kind == "sign":
        return shrink_with_sign(oracle, probe, lo, hi, target_len, sign_lo,
                                realize=realize)
    return shrink_with_norm(oracle, probe, lo, hi, target_len,
                            realize=realize)


def _gadget_realizer(q: Fraction, gamma1: Fraction, gamma2: Fraction):
    """Realize probe points as implemented weights of two-weight theta
    gadgets over {gamma1, gamma2}.

    The returned callable maps (target eps, bits) to the implemented
    y-coordinate of a certified gadget within 2^-bits of the target.
    Substituting that gadget for the probe edge multiplies Z by a known
    nonzero factor, which a norm oracle's caller divides out and a sign
    oracle's caller accounts for by its sign, so the information channel
    equals querying at the implemented point itself.
    """
    from .shifts import gj_two_weight_shift

    y1, y2 = gamma1 + 1, gamma2 + 1
    ay1 = abs(y1)
    if not 0 < ay1 < 1:
        raise ReductionError("gadget realization needs |gamma1 + 1| in "
                             "(0, 1)")

    def realize(target: Fraction, bits: int) -> Fraction:
        t = abs(Fraction(target))
        if t == 0:
            raise ReductionError("cannot realize 0 as a gadget weight")
        k = 1
        while not ay1 ** k <= t <= ay1 ** -k:
            k += 1
            if k > 10000:
                raise ReductionError("realization range search ran away")
        cert = gj_two_weight_shift(q, y1, y2, Fraction(target), k, bits)
        return cert.implemented_y.as_rational()

    return realize


# ---------------------------------------------------------------------------
# ratios to exact values
# ---------------------------------------------------------------------------


def _find_non_bridge(G: MultiGraph):
    base = _component_count(G)
    for i, (u, v, lab) in enumerate(G.edges):
        if u == v:
            continue  # loops are stripped separately
        rest = G.edges[:i] + G.edges[i + 1:]
        sub = MultiGraph(G.vertex_count, rest, None, G.weight_table)
        if _component_count(sub) == base:
            return i
    return None


def _forest_Z(G: MultiGraph, q, gamma):
    k = _component_count(G)
    return Fraction(q) ** k * (Fraction(q) + Fraction(gamma)) ** len(G.edges)


def ratio_to_exact(ratio_provider: Callable, G: MultiGraph, *, q,
                   gamma) -> AlgNum:
    """Exact Z(G; q, gamma) from a provider of terminal ratios.

    `ratio_provider(H)` (H carrying terminals) must return the exact
    ratio Z_{s|t}(H)/Z_st(H).  Non-bridge edges are deleted one at a
    time via Z(G) = Z(G-e) (1 + gamma + gamma beta / q)(1+alpha)/(1+beta)
    until a forest remains; a ratio of -1 reveals a Tutte zero of a
    subgraph, which violates zero-freeness and raises an error.
    """
    q, gamma = Fraction(q), Fraction(gamma)
    if q == 0:
        raise ReductionError("q must be nonzero")
    table = {lab: gamma for lab in G.weight_table}
    factor = as_algnum(Fraction(1))
    one = AlgNum.from_rational(1)
    # each loop contributes the exact factor 1 + gamma
    plain = [e for e in G.edges if e[0] != e[1]]
    n_loops = len(G.edges) - len(plain)
    if n_loops:
        factor = factor * as_algnum((1 + gamma) ** n_loops)
    cur = MultiGraph(G.vertex_count, plain, None, table)
    while True:
        i = _find_non_bridge(cur)
        if i is None:
            break
        u, v, _lab = cur.edges[i]
        with_terms = MultiGraph(cur.vertex_count, cur.edges, (u, v),
                                cur.weight_table)
        rest = cur.edges[:i] + cur.edges[i + 1:]
        deleted = MultiGraph(cur.vertex_count, rest, (u, v),
                             cur.weight_table)
        alpha = as_algnum(ratio_provider(with_terms))
        beta = as_algnum(ratio_provider(deleted))
        if alg_eq(beta, -1):
            raise ReductionError(
                f"zero-freeness violated: Z of the graph without edge "
                f"({u},{v}) vanishes")
        qn = as_algnum(q)
        gn = as_algnum(gamma)
        factor = factor * (one + gn + gn * beta / qn) * (one + alpha) / (
            one + beta)
        cur = MultiGraph(cur.vertex_count, rest, None, cur.weight_table)
    return factor * as_algnum(_forest_Z(cur, q, gamma))


# ---------------------------------------------------------------------------
# thickened interpolation
# ---------------------------------------------------------------------------


def thicken_graph(G: MultiGraph, j: int) -> MultiGraph:
    """Replace every edge by j parallel copies (labels get a suffix)."""
    if j < 1:
        raise ReductionError("thickening count must be >= 1")
    edges = []
    table = {}
    for idx, (u, v, lab) in enumerate(G.edges):
        for copy in range(j):
            nl = f"{lab}~{idx}~{copy}"
            table[nl] = G.weight_table[lab]
            edges.append((u, v, nl))
    return MultiGraph(G.vertex_count, edges, G.terminals, table)


def thickened_interpolation(exact_provider: Callable, G: MultiGraph, *,
                            q, gamma2) -> list:
    """Coefficients (low degree first) of the polynomial x -> Z(G; q, x).

    `exact_provider(G_j, rho_j)` must return the exact rational
    Z(G_j; q, (gamma2+1)^{rho_j} - 1) for the j-thickened graph G_j,
    where rho_j is the minimal thickening power for G_j.  Values at
    m + 1 distinct weights gamma_j = (gamma2+1)^{j rho_j} - 1 determine
    the degree-m polynomial by Lagrange interpolation.
    """
    q, gamma2 = Fraction(q), Fraction(gamma2)
    m = len(G.edges)
    xs, ys = [], []
    for j in range(1, m + 2):
        Gj = thicken_graph(G, j)
        plan = ThickeningPlan.for_graph(q, gamma2, Gj)
        val = Fraction(exact_provider(Gj, plan.rho))
        gamma_j = (gamma2 + 1) ** (j * plan.rho) - 1
        xs.append(gamma_j)
        ys.append(val)
    if len(set(xs)) != m + 1:
        raise ReductionError("interpolation points collided")
    # Lagrange interpolation, coefficients accumulated exactly
    coeffs = [Fraction(0)] * (m + 1)
    for i in range(m + 1):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for k in range(m + 1):
            if k == i:
                continue
            denom *= xs[i] - xs[k]
            nxt = [Fraction(0)] * (len(basis) + 1)
            for deg, cc in enumerate(basis):
                nxt[deg] -= cc * xs[k]
                nxt[deg + 1] += cc
            basis = nxt
        scale = ys[i] / denom
        for deg, cc in enumerate(basis):
            coeffs[deg] += cc * scale
    return coeffs


def eval_poly(coeffs, x):
    x = Fraction(x)
    out = Fraction(0)
    for c in reversed(coeffs):
        out = out * x + c
    return out


# ---------------------------------------------------------------------------
# approximate shifts as reductions
# ---------------------------------------------------------------------------


def approx_shift_reduction(shift_producer: Callable, G: MultiGraph, k: int,
                           *, q, gamma2):
    """(H, D, gamma_hat) with |Z(G; q, gamma2) - Z(H; q, source)/D| <=
    2^-k, where H substitutes the shift gadget for every edge of G.

    `shift_producer(j)` must return a ShiftCertificate whose implemented
    weight is within 2^-j of gamma2 (exact certificates qualify).  D is
    (Z_{s|t}(gadget)/q^2)^m; H is planar whenever G and the gadget are.
    """
    q = as_algnum(q)
    gamma2 = as_algnum(gamma2)
    n, m = G.vertex_count, len(G.edges)
    if m == 0:
        return G, AlgNum.from_rational(1), gamma2
    from .shifts import _rat_up_real
    q_up = max(_rat_up_real(alg_abs(q)), Fraction(1))
    g_up = _rat_up_real(alg_abs(gamma2))
    bound = (q_up ** n * Fraction(2) ** m * max(m - 1, 1)
             * (g_up + Fraction(1, 2)) ** max(m - 1, 0))
    j = k + max(_ceil_log2(bound), 0) + 1
    cert = shift_producer(j)
    if not isinstance(cert, ShiftCertificate):
        raise ReductionError("shift producer must return a certificate")
    if cert.error_exponent is not None and cert.error_exponent < j:
        raise ReductionError(
            f"certificate accuracy 2^-{cert.error_exponent} is coarser "
            f"than the requested 2^-{j}")
    gamma_hat = cert.implemented_y - AlgNum.from_rational(1)
    if cert.gadget_root is None:
        raise ReductionError("the shift gadget must have at least one edge")
    gadget = cert.gadget
    from .graph import sp_eval
    pair = sp_eval(gadget, q)
    if is_zero(pair.z_s_split_t):
        raise ReductionError("degenerate gadget: Z_{s|t} = 0")
    d_edge = pair.z_s_split_t / (q * q)
    D = d_edge ** m
    # single plain edge implementing gamma2 exactly: H is G itself
    if cert.gadget_root == ("edge", "e") and alg_eq(gamma_hat, gamma2):
        labels = {lab: gamma_hat for lab in G.weight_table}
        return G.with_weights(labels), D, gamma_hat
    gm = gadget.to_multigraph()
    table = {lab: gamma2 for lab in G.weight_table}
    Gw = G.with_weights(table)
    H = Gw
    for lab in sorted(set(l for _, _, l in G.edges)):
        H, _f = substitute_gadget(H, lab, gm)
    return H, D, gamma_hat


def norm_transfer(oracle: SimulatedOracle, shift_producer: Callable,
                  G: MultiGraph, *, q, gamma1, gamma2,
                  z_of_H: Callable) -> Fraction:
    """Factor-4K approximation of |Z(G; q, gamma2)| from a factor-K
    oracle at the shift source (q, gamma1).

    `z_of_H(gamma_hat)` must return the exact Z(G; q, gamma_hat) (the
    simulated oracle's ground truth for Z(H)/D); the returned rational N
    satisfies N/(4K) <= |Z(G; q, gamma2)| <= 4K N when Z != 0.
    """
    C = lower_bound_constant(q, gamma2)
    size = G.vertex_count + len(G.edges)
    k = max(_ceil_log2(C ** size * 2), 1)
    H, D, gamma_hat = approx_shift_reduction(shift_producer, G, k,
                                             q=q, gamma2=gamma2)
    z_h_over_d = as_algnum(z_of_H(gamma_hat))   # = Z(H)/D exactly
    N = oracle.norm_value(z_h_over_d * D)
    d_abs = _abs_to_fraction(D, Fraction(3, 2))
    # rational D-hat with 1/2 <= |D|/D-hat <= 2
    d_hat = d_abs
    return N / d_hat


def arg_transfer(oracle: SimulatedOracle, shift_producer: Callable,
                 G: MultiGraph, *, q, gamma2,
                 z_of_H: Callable) -> Fraction:
    """Angle (units of pi) within 5/12 of some argument of
    Z(G; q, gamma2), from a distance-pi/3 argument oracle at the source.

    Requires a real D (real q and source weight)."""
    C = lower_bound_constant(q, gamma2)
    size = G.vertex_count + len(G.edges)
    k = max(_ceil_log2(C ** size * 8), 1) + 2
    H, D, gamma_hat = approx_shift_reduction(shift_producer, G, k,
                                             q=q, gamma2=gamma2)
    if not D.is_real():
        raise ReductionError("argument transfer requires a real D")
    z_h_over_d = as_algnum(z_of_H(gamma_hat))
    a1 = oracle.arg_value_pi(z_h_over_d * D)
    a2 = _arg_pi_exact(D)   # 0 or 1, error 0 <= 1/24
    return a1 - a2
