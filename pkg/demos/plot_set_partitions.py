"""
Distinct-index sums by set partitions
=====================================

A sum over ordered tuples of distinct indices equals a signed sum, over
set partitions of the slots, of unconstrained sums.
"""

import itertools

import numpy as np

from wavica import count_matching, falling_factorial, set_partitions

rng = np.random.default_rng(0)
m, n = 4, 6
v = rng.normal(size=(m, n))

brute = sum(np.prod([v[s, i] for s, i in enumerate(t)]) for t in itertools.permutations(range(n), m))
expanded = sum(
    p.mobius_weight * np.prod([np.prod(v[list(B)], axis=0).sum() for B in p.blocks])
    for p in set_partitions(m)
)
print(f"brute {brute:.12f}  partitions {expanded:.12f}  ({len(set_partitions(m))} partitions)")

# Pairs of ordered 2-tuples out of 3 indices sharing b indices
print([count_matching(3, 2, b) for b in range(3)], "total", falling_factorial(3, 2) ** 2)
