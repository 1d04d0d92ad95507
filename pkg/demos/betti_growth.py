"""Betti numbers of finite covers, divided by the covering degree.

Three towers: the wedge of two circles (normalized b1 tends to 1), the
2-torus (everything tends to 0) and the lls complex, where rational and
mod-2 Betti numbers have different limits.
"""
from towerlab.complexes import lls_example, torus, wedge_of_circles
from towerlab.groups import make_builtin_tower
from towerlab.reduction import betti_table

C = wedge_of_circles(2)
tower = make_builtin_tower(C.model, "abelian", 5, 2)
table = betti_table(C, tower)
print("wedge of two circles, degree 1")
for lv, norm in zip(table.levels, table.normalized_column(1)):
    print(f"  index {lv.index:5d}  b1 = {lv.rational[1]:5d}  b1/index = {norm}")

T = torus(2)
tower = make_builtin_tower(T.model, "abelian", 4, 2)
table = betti_table(T, tower)
print("2-torus")
for lv in table.levels:
    print(f"  index {lv.index:4d}  b = {lv.rational}  normalized = {[str(x) for x in lv.normalized()]}")

L = lls_example(2, 2)
tower = make_builtin_tower(L.model, "abelian", 6, 2)
table = betti_table(L, tower, primes=[2])
print("lls complex, degree 2: over Q and over F2")
for lv in table.levels:
    print(f"  index {lv.index:3d}  b2(Q) = {lv.rational[2]}  b2(F2) = {lv.modp[2][2]}")
