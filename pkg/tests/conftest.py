import random
from fractions import Fraction

import pytest

from pottskit.graph import MultiGraph, SPGraph
from pottskit.literals import parse_literal

SQRT2 = parse_literal('alg:{"poly": [-2,0,1], "rect": ["1","2","0","0"]}')
SQRT3 = parse_literal('alg:{"poly": [-3,0,1], "rect": ["1","2","0","0"]}')

# five (q, gamma) pairs spanning negative, fractional and quadratic values
PARAM_GRID = [
    (Fraction(-1), Fraction(2)),
    (Fraction(1, 2), Fraction(1)),
    (Fraction(2), SQRT2),
    (Fraction(3), Fraction(-1, 4)),
    (Fraction(5, 2), SQRT3 - 1),
]


def make_graph(n, pairs, terminals=None, weight=Fraction(1)):
    edges = [(u, v, f"e{i}") for i, (u, v) in enumerate(pairs)]
    return MultiGraph(n, edges, terminals,
                      {lab: weight for _, _, lab in edges})


def rand_multigraph(rng: random.Random, max_edges=10,
                    weight=Fraction(1)) -> MultiGraph:
    m = rng.randint(1, max_edges)
    n = rng.randint(2, 6)
    pairs = [(rng.randrange(n), rng.randrange(n)) for _ in range(m)]
    return make_graph(n, pairs, weight=weight)


def rand_sp_tree(rng: random.Random, max_edges=12,
                 weight=Fraction(3)) -> SPGraph:
    budget = rng.randint(1, max_edges)

    def build(k):
        if k == 1:
            return ("edge", "g")
        a = rng.randint(1, k - 1)
        op = "S" if rng.random() < 0.5 else "P"
        return (op, (build(a), build(k - a)))

    return SPGraph(build(budget), {"g": weight})


def _planar_pool():
    """30+ distinct connected planar multigraphs with at most 9 edges."""
    pool = []

    def add(n, pairs):
        pool.append(make_graph(n, pairs))

    add(2, [(0, 1)])                                        # edge
    add(3, [(0, 1), (1, 2)])                                # path-2
    add(4, [(0, 1), (1, 2), (2, 3)])                        # path-3
    add(5, [(0, 1), (1, 2), (2, 3), (3, 4)])                # path-4
    add(3, [(0, 1), (1, 2), (2, 0)])                        # C3
    add(4, [(0, 1), (1, 2), (2, 3), (3, 0)])                # C4
    add(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])        # C5
    add(2, [(0, 1), (0, 1)])                                # double edge
    add(2, [(0, 1), (0, 1), (0, 1)])                        # triple edge
    add(3, [(0, 1), (1, 2), (2, 0), (0, 1)])                # C3 + parallel
    add(4, [(0, 1), (1, 2), (2, 0), (2, 3)])                # C3 + pendant
    add(4, [(0, 1), (0, 2), (0, 3)])                        # star
    add(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)])        # C4 + chord
    add(4, [(0, 1), (1, 2), (2, 0), (0, 3), (1, 3), (2, 3)])  # K4
    add(5, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)])  # bowtie
    add(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)])  # C6
    add(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)])  # K4 drawn on C4
    add(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)])  # house
    add(6, [(0, 1), (1, 2), (2, 3), (3, 0), (2, 4), (4, 5),
            (5, 3)])                                        # two squares
    add(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)])        # path-5
    add(3, [(0, 1), (0, 1), (1, 2), (1, 2), (2, 0), (2, 0)])  # doubled C3
    add(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 1)])        # C4 + parallel
    add(7, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)])  # spider
    add(5, [(0, 1), (1, 2), (2, 0), (0, 3), (1, 4)])        # C3 + 2 pendants
    add(4, [(0, 1), (0, 2), (2, 1), (0, 3), (3, 1)])        # theta(1,2,2)
    add(5, [(0, 2), (2, 1), (0, 3), (3, 1), (0, 4), (4, 1)])  # theta(2,2,2)
    add(4, [(0, 1), (1, 2), (2, 0), (0, 3), (1, 3), (2, 3),
            (0, 1)])                                        # K4 + parallel
    add(6, [(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4),
            (2, 5)])                                        # 2x3 grid
    add(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3),
            (0, 3), (1, 4), (2, 5)])                        # prism (9 edges)
    add(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2),
            (0, 3)])                                        # fan on C5
    add(5, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3),
            (0, 4), (1, 4)])                                # W4 wheel (8)
    add(3, [(0, 0), (0, 1), (1, 2), (2, 0)])                # C3 + loop
    return pool


PLANAR_POOL = _planar_pool()


@pytest.fixture(scope="session")
def planar_pool():
    return PLANAR_POOL
