"""End-to-end acceptance checks for the whole package.

Each test here exercises one externally checkable guarantee at desk
scale: exact evaluator agreement, exactness of the shift calculus,
certified approximate shifts with size caps, direction-plan margins,
the partition-function lower bound, minimal-polynomial round trips,
oracle-driven reduction to exact values, the transfer inequalities,
and the Jones specialization.
"""

import math
import random
import time
from fractions import Fraction

import pytest

from pottskit.algebraic import (
    AlgNum,
    alg_eq,
    alg_im,
    alg_re,
    as_algnum,
    real_cmp,
    sigma_eval,
    sigma_plan,
    unit_direction,
)
from pottskit.graph import (
    MultiGraph,
    SPGraph,
    brute_force_Z,
    brute_force_pair,
    deletion_contraction_Z,
    implemented_weight,
    sp_eval,
    theta_sp,
    theta_weight,
    to_xy,
)
from pottskit.lattice import (
    MinPolyBudget,
    MinPolyRecoveryError,
    minpoly_budget,
    minpoly_from_approx,
    sturm_isolate,
)
from pottskit.intpoly import is_irreducible
from pottskit.rect import RatRect
from pottskit import jones as J
from pottskit import reduction as R
from pottskit import shifts as S

from conftest import (
    PARAM_GRID,
    PLANAR_POOL,
    make_graph,
    rand_multigraph,
    rand_sp_tree,
)


# ---------------------------------------------------------------------------
# 1. evaluator equivalence (and the shared instance set for the lower bound)
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def evaluator_records():
    """1000 random multigraphs x 5 parameter pairs, both evaluators.

    Returns (records, elapsed_seconds) where each record is
    (q, gamma, size, Z) with Z = brute_force_Z = deletion_contraction_Z
    (asserted by the consuming test).
    """
    rng = random.Random(20260823)
    t0 = time.monotonic()
    records = []
    for i in range(1000):
        G = rand_multigraph(rng, max_edges=10, weight=Fraction(1))
        q, gamma = PARAM_GRID[i % len(PARAM_GRID)]
        Gw = G.with_weights({lab: gamma for lab in G.weight_table})
        zb = brute_force_Z(Gw, q)
        zd = deletion_contraction_Z(Gw, q)
        size = G.vertex_count + len(G.edges)
        records.append((q, gamma, size, zb, zd))
    elapsed = time.monotonic() - t0
    return records, elapsed


def test_evaluator_equivalence(evaluator_records):
    records, elapsed = evaluator_records
    assert len(records) >= 1000
    for q, gamma, _size, zb, zd in records:
        assert alg_eq(zb, zd)
    # series-parallel evaluator against subset enumeration
    rng = random.Random(99)
    t0 = time.monotonic()
    for i in range(500):
        sp = rand_sp_tree(rng, max_edges=12, weight=Fraction(3))
        q, _ = PARAM_GRID[i % len(PARAM_GRID)]
        a = sp_eval(sp, q)
        b = brute_force_pair(sp.to_multigraph(), q)
        assert alg_eq(a.z_st, b.z_st)
        assert alg_eq(a.z_s_split_t, b.z_s_split_t)
    total = elapsed + (time.monotonic() - t0)
    assert total < 120, f"evaluator equivalence took {total:.1f}s"


# ---------------------------------------------------------------------------
# 2. shift-calculus exactness over the parameter grid
# ---------------------------------------------------------------------------


def _gadget_weight(lengths, point):
    sp = SPGraph(theta_sp(lengths), {"g": point.gamma})
    pair = sp_eval(sp, point.q)
    return implemented_weight(pair, point.q)


def test_shift_calculus_exactness():
    theta_sets = [(1, 2), (2, 2), (3, 1), (2, 2, 2), (1, 1, 2), (4, 3),
                  (5, 2, 1), (8, 7)]
    for q, gamma in PARAM_GRID:
        point = to_xy(as_algnum(q), as_algnum(gamma))
        y = point.y
        for n in range(1, 9):
            # thickening y -> y^n as n parallel edges
            w = _gadget_weight((1,) * n, point)
            assert alg_eq(w + AlgNum.from_rational(1), y ** n)
            # stretching as a length-n path
            assert alg_eq(theta_weight((n,), point), _gadget_weight(
                (n,), point))
        for lengths in theta_sets:
            assert alg_eq(theta_weight(lengths, point),
                          _gadget_weight(lengths, point))


# ---------------------------------------------------------------------------
# 3. certified approximate shifts with fitted size caps
# ---------------------------------------------------------------------------

# size caps fitted to observed growth with ~25% headroom
_CAPS = {
    "greedy": lambda n: 2 * n * n + 20 * n,
    "gj": lambda n: n * n + 25,
    "1mq": lambda n: n + 3,
    "wrap": lambda n: 50 * n + 500,
    "full01": lambda n: 2 * n * n + 80,
    "full0": lambda n: 350 * n * n,
    "fullgt1": lambda n: 25000 * n * n,
    "fullneg": lambda n: 10 * n * n + 250,
    "fullimag": lambda n: 8 * n * n + 120,
}


def _shift_triples():
    Q2 = as_algnum(2)
    Q3 = as_algnum(3)
    I = AlgNum.i_unit()
    one = AlgNum.from_rational(1)
    src = to_xy(Q2, Fraction(-3, 2))
    src_i = to_xy(Q2, as_algnum(2) * I - one)
    p14 = to_xy(Q2, Fraction(-1, 4))
    out = []
    for n in (6, 12, 24):
        out.append(("greedy", n,
                    lambda n=n: S.greedy_real_shift(p14, Fraction(1, 2),
                                                    3, n)))
    gj_cases = [
        (2, Fraction(1, 2), 3, Fraction(5, 4), 2),
        (2, Fraction(-1, 2), 3, Fraction(-5, 4), 2),
        (-1, Fraction(1, 2), 5, Fraction(7, 3), 2),
        (2, Fraction(-1, 2), 3, Fraction(1, 3), 2),
    ]
    for n, case in zip((8, 10, 12, 16), gj_cases):
        out.append(("gj", n,
                    lambda n=n, c=case: S.gj_two_weight_shift(*c, n)))
    pm3 = to_xy(Q2, as_algnum(-3))
    for n in (8, 16, 24):
        out.append(("1mq", n, lambda n=n: S.approx_shift_to_1mq(pm3, n)))
    wrap_a = to_xy(Q2, Q2 / (as_algnum(2) * I - one))
    wrap_b = to_xy(Q3, Q3 / (as_algnum(2)
                             * AlgNum.root_of_unity(1, 3) - one))
    out.append(("wrap", 8,
                lambda: S.wrap_to_unit_interval(wrap_a, 8)[0]))
    out.append(("wrap", 12,
                lambda: S.wrap_to_unit_interval(wrap_b, 12)[0]))
    for n in (8, 16, 24):
        out.append(("full01", n,
                    lambda n=n: S.full_approx_shift(src, Fraction(2, 3), n)))
    # routes through the intermediate point with y = 1/2 (x = 1 - 2q)
    out.append(("full0", 6, lambda: S.full_approx_shift(src, 0, 6)))
    out.append(("fullgt1", 4,
                lambda: S.full_approx_shift(src, Fraction(5, 2), 4)))
    for n in (5, 8):
        out.append(("fullneg", n,
                    lambda n=n: S.full_approx_shift(src, Fraction(-3, 4),
                                                    n)))
    for n in (8, 12):
        out.append(("fullimag", n,
                    lambda n=n: S.full_approx_shift(src_i, Fraction(2, 3),
                                                    n)))
    return out


def test_certified_approximate_shifts():
    triples = _shift_triples()
    assert len(triples) >= 20
    for kind, n, build in triples:
        cert = build()
        assert n <= 24
        res = S.verify_certificate(cert)
        assert res.ok, f"{kind} n={n}: {res.message}"
        if res.error_bound is not None:
            assert res.error_bound <= Fraction(1, 2) ** n, (kind, n)
        cap = _CAPS[kind](n)
        assert cert.size <= cap, (kind, n, cert.size, cap)


# ---------------------------------------------------------------------------
# 4. direction-plan margins
# ---------------------------------------------------------------------------


def test_sigma_plan_margins():
    i = AlgNum.i_unit()
    inv_sqrt2 = None
    bases = [
        AlgNum.root_of_unity(1, 3),
        AlgNum.root_of_unity(2, 3),
        as_algnum(Fraction(3, 5)) + as_algnum(Fraction(4, 5)) * i,
        AlgNum.root_of_unity(1, 8),   # (1 + i)/sqrt 2
    ]
    for base in bases:
        plan = sigma_plan(base)
        assert plan.margin_C > 0
        u1 = unit_direction(base)
        for n in range(1, 101):
            s = sigma_eval(plan, n)
            assert n <= s <= n + plan.bound_k - 1
            w = u1 ** s
            assert real_cmp(alg_re(w), -plan.margin_C) <= 0
            assert real_cmp(alg_im(w), -plan.margin_C) <= 0


# ---------------------------------------------------------------------------
# 5. partition-function lower bound on the shared instance set
# ---------------------------------------------------------------------------


def test_partition_function_lower_bound(evaluator_records):
    records, _ = evaluator_records
    consts = {}
    nonzero = 0
    for q, gamma, size, Z, _zd in records:
        key = (q, id(gamma))
        if key not in consts:
            consts[key] = R.lower_bound_constant(q, gamma)
        C = consts[key]
        if Z.is_zero():
            continue
        nonzero += 1
        bound = Fraction(1) / C ** size
        # Z is real on this grid: |Z| >= bound iff Z^2 >= bound^2
        assert Z.is_real()
        assert real_cmp(Z * Z, bound * bound) >= 0, (q, size)
    assert nonzero > 500


# ---------------------------------------------------------------------------
# 6. minimal-polynomial round trips
# ---------------------------------------------------------------------------


def _random_irreducible(rng):
    while True:
        d = rng.randint(1, 4)
        coeffs = [rng.randint(-50, 50) for _ in range(d)] + [
            rng.randint(1, 50)]
        from pottskit.intpoly import primitive
        poly = primitive(tuple(coeffs))
        if max(abs(c) for c in poly) > 50:
            continue
        if not is_irreducible(poly):
            continue
        ivs = sturm_isolate(poly)
        if ivs:
            return poly, ivs


def test_minpoly_round_trips():
    rng = random.Random(17)
    budget = minpoly_budget(4, 50)
    for _ in range(200):
        poly, ivs = _random_irreducible(rng)
        lo, hi = ivs[rng.randrange(len(ivs))]
        a = AlgNum.from_poly_and_rect(poly, RatRect.from_bounds(lo, hi,
                                                                0, 0))
        box = a.refine(budget.bits + 8)
        approx = (box.re.lo + box.re.hi) / 2
        out = tuple(minpoly_from_approx(approx, budget))
        neg = tuple(-c for c in out)
        assert out == poly or neg == poly, (poly, out)


def test_minpoly_starved_precision_fails_cleanly():
    poly = (1, 0, -4, 0, 1)
    budget = minpoly_budget(4, 50)
    coarse = MinPolyBudget(4, Fraction(4), 12)
    a = AlgNum.from_poly_and_rect(poly, RatRect.from_bounds(0, 1, 0, 0))
    box = a.refine(coarse.bits + 8)
    rough = Fraction(round((box.re.lo + box.re.hi) / 2 * 256), 256)
    with pytest.raises(MinPolyRecoveryError):
        minpoly_from_approx(rough, budget)


# ---------------------------------------------------------------------------
# 7. end-to-end oracle-driven reduction
# ---------------------------------------------------------------------------

_REGIMES = [
    # (q, gamma1, gamma2, regime)
    (Fraction(3), Fraction(-3, 2), Fraction(2), "q>1"),
    (Fraction(1, 2), Fraction(-1, 2), Fraction(1), "0<q<1"),
    (Fraction(-1), Fraction(-1, 2), Fraction(1), "q<0"),
]


def _with_terminals(G):
    return MultiGraph(G.vertex_count, G.edges, (0, 1), G.weight_table)


def _noisy(seed):
    spec = R.OracleSpec(kind="factor_K_norm", K=Fraction(42, 41),
                        backing="exact_with_noise", seed=seed)
    return R.SimulatedOracle(spec)


@pytest.mark.parametrize("q,gamma1,gamma2,regime", _REGIMES)
def test_end_to_end_reduction(q, gamma1, gamma2, regime, planar_pool):
    pool = planar_pool[:30]
    assert len(pool) == 30
    t0 = time.monotonic()
    for i in range(100):
        G = _with_terminals(pool[i % 30])
        rho = (R.ThickeningPlan.for_graph(q, gamma2, G).rho
               if q < 0 else 1)
        gamma = (gamma2 + 1) ** rho - 1

        got = R.compute_ratio(_noisy(i), G, rho, regime, q=q,
                              gamma1=gamma1, gamma2=gamma2)
        z_st, z_split = R.pair_fraction(
            G.with_weights({lab: gamma for lab in G.weight_table}), q)
        assert alg_eq(got, z_split / z_st), (regime, i)

        def provider(H):
            return R.compute_ratio(_noisy(i), H, rho, regime, q=q,
                                   gamma1=gamma1,
                                   gamma2=gamma2).as_rational()

        Z = R.ratio_to_exact(provider, G, q=q, gamma=gamma)
        want = brute_force_Z(
            G.with_weights({lab: gamma for lab in G.weight_table}), q)
        assert alg_eq(Z, want), (regime, i)
    elapsed = time.monotonic() - t0
    assert elapsed < 600, f"regime {regime} took {elapsed:.0f}s"


@pytest.mark.parametrize("q,gamma1,gamma2,regime", _REGIMES)
def test_shrink_rounds_contract_and_contain(q, gamma1, gamma2, regime,
                                            planar_pool):
    for i in range(10):
        G = _with_terminals(planar_pool[i % 30])
        rho = (R.ThickeningPlan.for_graph(q, gamma2, G).rho
               if q < 0 else 1)
        gamma = (gamma2 + 1) ** rho - 1
        probe = R.LinearProbe.from_graph(G, q, gamma)
        e = probe.eps_star
        lo, hi = e - Fraction(1, 2), e + Fraction(1, 3)
        target = (hi - lo) / 10 ** 4
        res = R.shrink_with_norm(_noisy(1000 + i), probe, lo, hi, target)
        assert res.lo <= e <= res.hi
        prev = hi - lo
        for rlo, rhi in res.history:
            assert rlo <= e <= rhi
            assert rhi - rlo <= prev * Fraction(9, 10)
            prev = rhi - rlo


# ---------------------------------------------------------------------------
# 8. transfer inequalities
# ---------------------------------------------------------------------------


def _transfer_instances():
    graphs = [
        make_graph(2, [(0, 1)], terminals=(0, 1)),
        make_graph(3, [(0, 1), (1, 2)], terminals=(0, 2)),
        make_graph(4, [(0, 1), (1, 2), (2, 3)], terminals=(0, 3)),
        make_graph(3, [(0, 1), (1, 2), (2, 0)], terminals=(0, 1)),
        make_graph(2, [(0, 1), (0, 1)], terminals=(0, 1)),
    ]
    params = [(Fraction(2), Fraction(-1, 4)),
              (Fraction(2), Fraction(-2, 3)),
              (Fraction(3), Fraction(-1, 3))]
    out = []
    for i, G in enumerate(graphs):
        for q, g2 in params[:2 if i % 2 else 3]:
            out.append((G, q, g2))
    return out[:10] if len(out) > 10 else out


def _producer(q, j_to_cert_cache={}):
    src = to_xy(as_algnum(q), Fraction(-3, 2))

    def producer_for(gamma2):
        target_y = Fraction(gamma2) + 1

        def producer(j):
            key = (q, gamma2, j)
            if key not in j_to_cert_cache:
                j_to_cert_cache[key] = S.full_approx_shift(src, target_y, j)
            return j_to_cert_cache[key]
        return producer
    return producer_for


def test_transfer_inequality_and_gate():
    instances = _transfer_instances()
    assert len(instances) >= 10
    for G, q, g2 in instances:
        C = R.lower_bound_constant(q, g2)
        size = G.vertex_count + len(G.edges)
        k = max(math.ceil(math.log2(float(C ** size * 2))), 1)
        # lower-bound gate: 2^-k <= C^-size / 2
        assert Fraction(1, 2) ** k <= Fraction(1) / C ** size / 2
        producer = _producer(q)(g2)
        H, D, gamma_hat = R.approx_shift_reduction(producer, G, k,
                                                   q=q, gamma2=g2)
        z_target = R.z_fraction(
            G.with_weights({lab: Fraction(g2)
                            for lab in G.weight_table}), q)
        gh = gamma_hat.as_rational()
        z_hat = R.z_fraction(
            G.with_weights({lab: gh for lab in G.weight_table}), q)
        # Z(H)/D = Z(G; gamma_hat) exactly, so the transfer inequality is
        # |Z(G; gamma2) - Z(G; gamma_hat)| <= 2^-k
        assert abs(z_target - z_hat) <= Fraction(1, 2) ** k, (q, g2, size)


def test_transfer_identity_direct_on_tiny_instances():
    # validate Z(H) = D * Z(G; gamma_hat) by evaluating H itself, using an
    # exact 2-thickening certificate so H stays brute-forceable
    src = to_xy(as_algnum(2), Fraction(-3, 2))
    cert = S.thicken(src, 2)

    def producer(j):
        return cert

    gamma_hat_expected = cert.implemented_y - AlgNum.from_rational(1)
    for G in (make_graph(2, [(0, 1)], terminals=(0, 1)),
              make_graph(3, [(0, 1), (1, 2)], terminals=(0, 2))):
        H, D, gamma_hat = R.approx_shift_reduction(
            producer, G, 1, q=2, gamma2=gamma_hat_expected)
        assert alg_eq(gamma_hat, gamma_hat_expected)
        zH = brute_force_Z(H, Fraction(2))
        zG = brute_force_Z(
            G.with_weights({lab: gamma_hat for lab in G.weight_table}),
            Fraction(2))
        assert alg_eq(zH, D * zG)


def test_norm_and_arg_transfer_contracts():
    q, g2 = Fraction(2), Fraction(-1, 4)
    producer = _producer(q)(g2)
    for G in (make_graph(3, [(0, 1), (1, 2)], terminals=(0, 2)),
              make_graph(3, [(0, 1), (1, 2), (2, 0)], terminals=(0, 1))):
        def z_of_H(gamma_hat, G=G):
            gh = as_algnum(gamma_hat).as_rational()
            return R.z_fraction(
                G.with_weights({lab: gh for lab in G.weight_table}), q)

        spec = R.OracleSpec(kind="factor_K_norm", K=Fraction(42, 41),
                            backing="exact_with_noise", seed=4)
        N = R.norm_transfer(R.SimulatedOracle(spec), producer, G,
                            q=q, gamma1=Fraction(-3, 2), gamma2=g2,
                            z_of_H=z_of_H)
        truth = abs(R.z_fraction(
            G.with_weights({lab: g2 for lab in G.weight_table}), q))
        fourK = 4 * Fraction(42, 41)
        assert truth / fourK <= N <= truth * fourK

        aspec = R.OracleSpec(kind="distance_rho_arg",
                             rho_pi=Fraction(1, 3),
                             backing="exact_with_noise", seed=4)
        A = R.arg_transfer(R.SimulatedOracle(aspec), producer, G,
                           q=q, gamma2=g2, z_of_H=z_of_H)
        true_arg = Fraction(0) if truth == R.z_fraction(
            G.with_weights({lab: g2 for lab in G.weight_table}), q) \
            else Fraction(1)
        d = abs(A - true_arg) % 2
        assert min(d, 2 - d) <= Fraction(5, 12)


# ---------------------------------------------------------------------------
# 9. Jones specialization
# ---------------------------------------------------------------------------


def test_jones_triangle_identity():
    # T(C3; -t, -1/t) and t^2 - t - 1/t are both Laurent polynomials with
    # exponents in [-1, 2]; agreement at 5 distinct points proves the
    # identity
    tri = make_graph(3, [(0, 1), (1, 2), (2, 0)])
    one = AlgNum.from_rational(1)
    points = [as_algnum(v) for v in (2, 3, Fraction(1, 2),
                                     Fraction(-1, 3), 5)]
    from conftest import SQRT2
    points.append(SQRT2)
    for t in points:
        assert alg_eq(J.jones_core(tri, t), t * t - t - one / t)


def test_jones_special_points_and_cos_identity():
    assert J.special_point_check(1)
    assert J.special_point_check(AlgNum.root_of_unity(1, 6))
    assert J.special_point_check(AlgNum.root_of_unity(5, 6))
    assert not J.special_point_check(AlgNum.root_of_unity(1, 4))
    rng = random.Random(5)
    seen = set()
    while len(seen) < 50:
        b = rng.randint(2, 9)
        a = rng.randint(1, 2 * b - 1)
        seen.add((a, b))
    for a, b in sorted(seen):
        lhs, rhs = J.cos_q_identity(a, b)
        assert alg_eq(lhs, rhs)
        assert lhs.is_real()
