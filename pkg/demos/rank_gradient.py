"""Rank gradient of free groups along abelian towers.

For a wedge of d circles the cover of index n is a graph with free
fundamental group of rank (d-1)n + 1, so (d(G_i) - 1)/index is d - 1.
"""
from towerlab.complexes import wedge_of_circles
from towerlab.groups import make_builtin_tower
from towerlab.lab import rank_gradient

for d, depth in ((1, 6), (2, 4), (3, 3)):
    C = wedge_of_circles(d)
    rep = rank_gradient(C, make_builtin_tower(C.model, "abelian", depth, 2))
    print(f"wedge of {d} circles: limit estimate {rep.limit_estimate}, reference {rep.reference}")
    for row in rep.rows:
        print(f"  index {row.index:4d}  d(G_i) = {row.d_estimate:4d}  gradient {row.gradient}  "
              f"b1 mod p {row.b1_modp}")
