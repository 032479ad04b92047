"""Exact Tutte/Potts partition-function machinery.

Exact algebraic-number arithmetic, partition-function evaluators for
multigraphs and series-parallel decompositions, a certified shift compiler
for series-parallel/theta gadgets, LLL-based minimal-polynomial recovery,
and oracle-driven reductions that recover exact values from approximate
norm/sign oracles.
"""

__version__ = "0.1.0"
