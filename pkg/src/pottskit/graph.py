"""Multigraphs, series-parallel decompositions, and exact evaluators.

Three independent exact evaluators of the multivariate partition function
Z(G; q, gamma) = sum over edge subsets A of q^k(A) * prod of gamma_e:
brute-force subset enumeration, deletion-contraction, and the linear-time
series-parallel recurrences.  Isolated vertices count toward k(A).

Also: the terminal-pair split Z = Z_st + Z_{s|t}, implemented weights
w = q*Z_st/Z_{s|t}, theta-graph weights, gadget substitution, and the
(q, gamma) <-> (x, y) coordinate change on the hyperbola (x-1)(y-1) = q.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .algebraic import AlgNum, alg_eq, as_algnum, is_zero
from .literals import format_literal, parse_literal

ENUMERATION_CAP = 1 << 20


@dataclass(frozen=True)
class EvalPair:
    """Terminal split of Z: z_st (terminals joined) + z_s_split_t = Z."""

    z_st: AlgNum
    z_s_split_t: AlgNum

    @property
    def z_tutte(self) -> AlgNum:
        return self.z_st + self.z_s_split_t


class MultiGraph:
    """Multigraph with labeled weighted edges and optional terminals."""

    def __init__(self, vertex_count, edges, terminals=None, weight_table=None):
        self.vertex_count = int(vertex_count)
        self.edges = tuple((int(u), int(v), str(lab)) for u, v, lab in edges)
        self.terminals = None if terminals is None else (
            int(terminals[0]), int(terminals[1]))
        self.weight_table = dict(weight_table or {})
        if self.vertex_count < 0:
            raise ValueError("negative vertex count")
        for u, v, lab in self.edges:
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge ({u},{v}) out of range")
            if lab not in self.weight_table:
                raise ValueError(f"edge label {lab!r} missing from weights")
        if self.terminals is not None:
            s, t = self.terminals
            if s == t:
                raise ValueError("terminals must be distinct")
            if not (0 <= s < self.vertex_count and 0 <= t < self.vertex_count):
                raise ValueError("terminal out of range")

    @property
    def size(self) -> int:
        return self.vertex_count + len(self.edges)

    def weight(self, label) -> AlgNum:
        return as_algnum(self.weight_table[label])

    def with_weights(self, table) -> "MultiGraph":
        return MultiGraph(self.vertex_count, self.edges, self.terminals, table)


class SPGraph:
    """Series-parallel decomposition tree plus the edge weight table.

    Nodes are nested tuples: ("edge", label), ("S", [children]) or
    ("P", [children]).  Series composition chains children terminal to
    terminal; parallel composition identifies both terminals.
    """

    def __init__(self, root, weight_table):
        self.root = _check_sp(root)
        self.weight_table = dict(weight_table)

    def to_multigraph(self) -> MultiGraph:
        edges = []
        counter = [2]  # vertices 0 (s) and 1 (t) reserved

        def build(node, s, t):
            if node[0] == "edge":
                edges.append((s, t, node[1]))
                return
            if node[0] == "P":
                for ch in node[1]:
                    build(ch, s, t)
                return
            mids = []
            for _ in range(len(node[1]) - 1):
                mids.append(counter[0])
                counter[0] += 1
            pts = [s] + mids + [t]
            for ch, a, b in zip(node[1], pts, pts[1:]):
                build(ch, a, b)

        build(self.root, 0, 1)
        return MultiGraph(counter[0], edges, (0, 1), self.weight_table)

    @property
    def edge_count(self) -> int:
        memo: dict = {}

        def count(node):
            hit = memo.get(id(node))
            if hit is not None:
                return hit
            out = 1 if node[0] == "edge" else sum(count(ch) for ch in node[1])
            memo[id(node)] = out
            return out

        return count(self.root)


def _check_sp(node, _memo=None):
    # Memoized on object identity so shared subtrees stay shared objects
    # (downstream evaluation caches on identity too).
    if _memo is None:
        _memo = {}
    cached = _memo.get(id(node))
    if cached is not None:
        return cached
    if not isinstance(node, tuple) or not node:
        raise ValueError(f"bad SP node {node!r}")
    if node[0] == "edge":
        if len(node) != 2:
            raise ValueError("edge node needs exactly a label")
        _memo[id(node)] = node
        return node
    if node[0] in ("S", "P"):
        children = tuple(_check_sp(ch, _memo) for ch in node[1])
        if len(children) < 2:
            raise ValueError(f"{node[0]} node needs >= 2 children")
        out = (node[0], children)
        _memo[id(node)] = out
        return out
    raise ValueError(f"unknown SP node tag {node[0]!r}")


class _DSU:
    __slots__ = ("parent",)

    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True

    def copy(self):
        d = _DSU.__new__(_DSU)
        d.parent = list(self.parent)
        return d


def _q_powers(q: AlgNum, n: int) -> list[AlgNum]:
    pows = [AlgNum.from_rational(1)]
    for _ in range(n):
        pows.append(pows[-1] * q)
    return pows


def brute_force_Z(G: MultiGraph, q) -> AlgNum:
    """Exact Z by enumeration of all edge subsets (cap 2^20 subsets)."""
    return brute_force_pair(G, q, _require_terminals=False).z_tutte


def brute_force_pair(G: MultiGraph, q, _require_terminals=True) -> EvalPair:
    """Exact (Z_st, Z_{s|t}) by subset enumeration."""
    q = as_algnum(q)
    m = len(G.edges)
    if m > 20 or (1 << m) > ENUMERATION_CAP:
        raise ValueError(
            "edge count exceeds the enumeration cap; use "
            "deletion_contraction_Z or sp_eval"
        )
    if _require_terminals and G.terminals is None:
        raise ValueError("terminals required for the pair evaluation")
    s, t = G.terminals if G.terminals is not None else (0, 0)
    n = G.vertex_count
    qpow = _q_powers(q, n)
    weights = [G.weight(lab) for _, _, lab in G.edges]
    zero = AlgNum.from_rational(0)
    acc = [zero, zero]  # joined, split

    def walk(i, dsu, comps, prod):
        if i == m:
            joined = n > 0 and dsu.find(s) == dsu.find(t)
            term = prod * qpow[comps]
            idx = 0 if joined else 1
            acc[idx] = acc[idx] + term
            return
        walk(i + 1, dsu, comps, prod)  # edge excluded
        u, v, _ = G.edges[i]
        d2 = dsu.copy()
        c2 = comps - 1 if d2.union(u, v) else comps
        walk(i + 1, d2, c2, prod * weights[i])

    walk(0, _DSU(n), n, AlgNum.from_rational(1))
    if G.terminals is None:
        # everything lands in one bucket (s == t placeholder): fold together
        return EvalPair(acc[0] + acc[1], zero)
    return EvalPair(acc[0], acc[1])


def deletion_contraction_Z(G: MultiGraph, q) -> AlgNum:
    """Exact Z by deletion-contraction; independent of brute_force_Z.

    Z(G) = Z(G\\e) + gamma_e * Z(G/e); a self-loop contributes the factor
    (1 + gamma_e); the empty graph on n vertices gives q^n.
    """
    q = as_algnum(q)
    one = AlgNum.from_rational(1)

    def rec(n, edges):
        if not edges:
            return q ** n
        (u, v, w), rest = edges[0], edges[1:]
        if u == v:
            return (one + w) * rec(n, rest)
        deleted = rec(n, rest)
        # contract: merge v into u, relabel the remaining endpoints
        def relab(a):
            if a == v:
                a = u
            return a - 1 if a > v else a
        contracted_edges = tuple(
            (relab(a), relab(b), wt) for a, b, wt in rest
        )
        return deleted + w * rec(n - 1, contracted_edges)

    edges = tuple((u, v, G.weight(lab)) for u, v, lab in G.edges)
    return rec(G.vertex_count, edges)


def sp_eval(G: SPGraph, q) -> EvalPair:
    """Exact (Z_st, Z_{s|t}) on a series-parallel decomposition.

    Parallel:  Z_st' = Z_st1 Z_st2 / q + (Z_st1 Z_{s|t}2 + Z_{s|t}1 Z_st2)/q^2
               Z_{s|t}' = Z_{s|t}1 Z_{s|t}2 / q^2
    Series:    Z_st' = Z_st1 Z_st2 / q
               Z_{s|t}' = (Z_st1 Z_{s|t}2 + Z_{s|t}1 Z_st2
                           + Z_{s|t}1 Z_{s|t}2)/q
    Base (one edge): (q*gamma, q^2).
    """
    q = as_algnum(q)
    if is_zero(q):
        raise ValueError("q must be nonzero")
    qq = q * q

    def combine_p(a: EvalPair, b: EvalPair) -> EvalPair:
        z_st = a.z_st * b.z_st / q + (
            a.z_st * b.z_s_split_t + a.z_s_split_t * b.z_st) / qq
        z_sp = a.z_s_split_t * b.z_s_split_t / qq
        return EvalPair(z_st, z_sp)

    def combine_s(a: EvalPair, b: EvalPair) -> EvalPair:
        z_st = a.z_st * b.z_st / q
        z_sp = (a.z_st * b.z_s_split_t + a.z_s_split_t * b.z_st
                + a.z_s_split_t * b.z_s_split_t) / q
        return EvalPair(z_st, z_sp)

    memo: dict = {}

    def rec(node) -> EvalPair:
        # identity-keyed cache: shared subtree objects are evaluated once
        hit = memo.get(id(node))
        if hit is not None:
            return hit
        if node[0] == "edge":
            gamma = as_algnum(G.weight_table[node[1]])
            out = EvalPair(q * gamma, qq)
        else:
            parts = [rec(ch) for ch in node[1]]
            out = parts[0]
            comb = combine_p if node[0] == "P" else combine_s
            for p in parts[1:]:
                out = comb(out, p)
        memo[id(node)] = out
        return out

    return rec(G.root)


def implemented_weight(pair: EvalPair, q) -> AlgNum:
    """w = q * Z_st / Z_{s|t}; errors when Z_{s|t} = 0 (degenerate gadget)."""
    q = as_algnum(q)
    if is_zero(pair.z_s_split_t):
        raise ValueError("Z_{s|t} = 0: gadget implements no weight")
    return q * pair.z_st / pair.z_s_split_t


@dataclass(frozen=True)
class ParamPoint:
    """Point (q, gamma) with its (x, y) hyperbola coordinates.

    Invariants: y = gamma + 1 and (x-1)(y-1) = q exactly.
    """

    q: AlgNum
    gamma: AlgNum
    x: AlgNum
    y: AlgNum

    def __post_init__(self):
        one = AlgNum.from_rational(1)
        if not alg_eq(self.y, self.gamma + one):
            raise ValueError("y != gamma + 1")
        if not alg_eq((self.x - one) * (self.y - one), self.q):
            raise ValueError("(x-1)(y-1) != q")


def to_xy(q, gamma) -> ParamPoint:
    """ParamPoint from (q, gamma); y = gamma+1, x = 1 + q/gamma."""
    q, gamma = as_algnum(q), as_algnum(gamma)
    if is_zero(q):
        raise ValueError("q must be nonzero")
    one = AlgNum.from_rational(1)
    y = gamma + one
    if is_zero(gamma):
        raise ValueError("y = 1 puts x at infinity on the hyperbola")
    x = one + q / gamma
    return ParamPoint(q=q, gamma=gamma, x=x, y=y)


def to_qgamma(x, y) -> ParamPoint:
    """ParamPoint from (x, y): q = (x-1)(y-1), gamma = y - 1."""
    x, y = as_algnum(x), as_algnum(y)
    one = AlgNum.from_rational(1)
    if alg_eq(x, one) or alg_eq(y, one):
        raise ValueError("x = 1 or y = 1 degenerates q")
    q = (x - one) * (y - one)
    return ParamPoint(q=q, gamma=y - one, x=x, y=y)


def theta_weight(lengths, point: ParamPoint) -> AlgNum:
    """Weight of the theta gadget with internal path lengths l_1..l_m:
    prod_j (1 + q/(x^{l_j} - 1)) - 1."""
    one = AlgNum.from_rational(1)
    acc = one
    for l in lengths:
        if l < 1:
            raise ValueError("path lengths must be positive")
        xl = point.x ** int(l)
        if alg_eq(xl, one):
            raise ValueError(f"x^{l} = 1: theta weight undefined")
        acc = acc * (one + point.q / (xl - one))
    return acc - one


def theta_sp(lengths, label="g") -> tuple:
    """SP decomposition tree of the theta gadget (all edges share `label`)."""
    paths = []
    for l in lengths:
        if l == 1:
            paths.append(("edge", label))
        else:
            paths.append(("S", tuple(("edge", label) for _ in range(l))))
    if len(paths) == 1:
        return paths[0]
    return ("P", tuple(paths))


def components(G: MultiGraph) -> int:
    dsu = _DSU(G.vertex_count)
    comps = G.vertex_count
    for u, v, _ in G.edges:
        if dsu.union(u, v):
            comps -= 1
    return comps


def tutte_T(G: MultiGraph, x, y) -> AlgNum:
    """Classical Tutte polynomial T(G; x, y) via the Z specialization:
    T = (x-1)^{-k(G)} (y-1)^{-|V|} * Z(G; (x-1)(y-1), y-1)."""
    x, y = as_algnum(x), as_algnum(y)
    one = AlgNum.from_rational(1)
    if alg_eq(x, one) or alg_eq(y, one):
        raise ValueError("x = 1 or y = 1 degenerates the conversion")
    q = (x - one) * (y - one)
    gamma = y - one
    table = {lab: gamma for lab in set(l for _, _, l in G.edges)}
    Z = deletion_contraction_Z(G.with_weights(table), q)
    k = components(G)
    return Z / ((x - one) ** k * (y - one) ** G.vertex_count)


def substitute_gadget(G: MultiGraph, edge_label, gadget: MultiGraph):
    """Replace every edge labeled `edge_label` by a copy of `gadget`.

    The gadget's terminals are identified with the edge endpoints.  Returns
    (new graph, factor) with Z(new) = factor * Z(G at the implemented
    weight); factor = (Z_{s|t}(gadget)/q^2)^count, with the q-dependence
    deferred: the factor is returned as a function of q.
    """
    if gadget.terminals is None:
        raise ValueError("gadget requires terminals")
    gs, gt = gadget.terminals
    new_edges = []
    weight_table = dict(G.weight_table)
    counter = [G.vertex_count]
    sub_count = 0
    copy_idx = 0
    for u, v, lab in G.edges:
        if lab != edge_label:
            new_edges.append((u, v, lab))
            continue
        sub_count += 1
        vmap = {}
        for w in range(gadget.vertex_count):
            if w == gs:
                vmap[w] = u
            elif w == gt:
                vmap[w] = v
            else:
                vmap[w] = counter[0]
                counter[0] += 1
        for a, b, gl in gadget.edges:
            new_label = f"{edge_label}~{copy_idx}~{gl}"
            weight_table[new_label] = gadget.weight_table[gl]
            new_edges.append((vmap[a], vmap[b], new_label))
        copy_idx += 1
    weight_table = {
        lab: w for lab, w in weight_table.items()
        if lab != edge_label or any(l == lab for _, _, l in new_edges)
    }
    new_graph = MultiGraph(counter[0], new_edges, G.terminals, weight_table)

    def factor(q) -> AlgNum:
        q = as_algnum(q)
        pair = brute_force_pair(gadget, q)
        return (pair.z_s_split_t / (q * q)) ** sub_count

    return new_graph, factor


# ---------------------------------------------------------------------------
# JSON formats
# ---------------------------------------------------------------------------


def graph_from_json(obj) -> MultiGraph:
    if isinstance(obj, str):
        obj = json.loads(obj)
    weights = {
        lab: parse_literal(lit) for lab, lit in obj.get("weights", {}).items()
    }
    return MultiGraph(
        obj["vertices"],
        [(e[0], e[1], e[2]) for e in obj["edges"]],
        obj.get("terminals"),
        weights,
    )


def graph_to_json(G: MultiGraph) -> dict:
    out = {
        "vertices": G.vertex_count,
        "edges": [[u, v, lab] for u, v, lab in G.edges],
        "weights": {
            lab: format_literal(as_algnum(w))
            for lab, w in G.weight_table.items()
        },
    }
    if G.terminals is not None:
        out["terminals"] = list(G.terminals)
    return out


def sp_from_json(obj) -> SPGraph:
    if isinstance(obj, str):
        obj = json.loads(obj)
    weights = {
        lab: parse_literal(lit) for lab, lit in obj.get("weights", {}).items()
    }

    def node(o):
        if "edge" in o:
            return ("edge", o["edge"])
        return (o["op"], tuple(node(ch) for ch in o["children"]))

    return SPGraph(node(obj["tree"]), weights)


def sp_to_json(G: SPGraph) -> dict:
    def node(n):
        if n[0] == "edge":
            return {"edge": n[1]}
        return {"op": n[0], "children": [node(ch) for ch in n[1]]}

    return {
        "tree": node(G.root),
        "weights": {
            lab: format_literal(as_algnum(w))
            for lab, w in G.weight_table.items()
        },
    }
