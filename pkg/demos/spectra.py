"""Spectral measures of finite covers and their moments.

Normalized eigenvalue counts of the circle Laplacian on the m-cycle. The
zero atom is the exact kernel dimension. Moments agree exactly with the
l2 moments once m is larger than the walk length.
"""
from towerlab.complexes import circle, complex_laplacian
from towerlab.groups import FREE_ABELIAN, GroupModelSpec, abelian_quotient
from towerlab.spectral import l2_moment, level_measure, moment_convergence_report

delta = complex_laplacian(circle(), 0)
Z = GroupModelSpec(FREE_ABELIAN, 1)

mu = level_measure(delta, abelian_quotient(Z, [8]))
print("m = 8: zero atom", mu.zero_multiplicity)
for x, w in mu.atoms:
    print(f"  eigenvalue {x:.6f}  mass {w:.4f}")
print("histogram (bin_left, bin_right, mass):")
for row in mu.histogram(4):
    print("  " + "  ".join(f"{v:.3f}" for v in row))

tower = [abelian_quotient(Z, [m]) for m in (2, 4, 8, 16)]
report = moment_convergence_report(delta, tower, 4)
print("l2 moments:", [str(l2_moment(delta, k)) for k in range(1, 5)])
print("levels where finite and l2 moments differ:")
for row in report.disagreements():
    print(f"  m = {row.index:2d}  k = {row.k}  finite {row.exact}  l2 {row.l2}")
print("exact agreement from m =", tower[report.agreement_level - 1].order)
