"""Error exponent of Betti numbers along p-adic analytic towers.

A synthetic sequence beta*index + c*p^(i(d-1)) has error exponent 1 - 1/d.
On the lls complex with F2 coefficients the residuals vanish.
"""
from fractions import Fraction

from towerlab.complexes import lls_example
from towerlab.groupring import GF
from towerlab.groups import make_builtin_tower
from towerlab.padic import PadicTowerMeta, padic_fit
from towerlab.reduction import betti

p, d = 3, 2
idx = [p ** (d * i) for i in range(1, 7)]
seq = [Fraction(1, 2) * n + 5 * p ** (i * (d - 1)) for i, n in enumerate(idx, start=1)]
rep = padic_fit(seq, PadicTowerMeta(p, d, idx))
print(f"synthetic p={p} d={d}: beta estimate {rep.beta_estimate}, exponent {rep.fitted_exponent:.4f}, "
      f"bound {rep.bound}, ok={rep.ok}")

C = lls_example(2, 2)
tower = make_builtin_tower(C.model, "abelian", 6, 2)
rep = padic_fit([betti(C, q, GF(2))[2] for q in tower], PadicTowerMeta(2, 1, tower.orders))
print("lls residuals", [str(r) for r in rep.residuals], "exponent", rep.fitted_exponent)
