"""Mod-p Betti numbers along p-power towers never grow after normalizing.

At each step of ratio p the covering deck transformation sigma turns the
mod-p boundary maps into matrices over R = F_p[tau]/(tau^p). Their diagonal
form gives image and kernel dimensions, which are checked against the flat
ranks.
"""
from towerlab.lab import shipped_examples
from towerlab.localring import as_local_matrix, local_diagonalize, local_dims, monotone_harness

for ex in shipped_examples():
    if ex.label not in ("circle", "torus2-refined", "lls22"):
        continue
    for q in range(len(ex.complex.ranks)):
        rep = monotone_harness(ex.complex, ex.tower, q, ex.p)
        seq = " ".join(str(r.normalized) for r in rep.rows)
        steps = sum(r.local_check is not None for r in rep.rows)
        print(f"{ex.label:15s} q={q} p={ex.p}  {seq}  local checks {steps}  ok={rep.ok}")

M = as_local_matrix([[(0, 1), 1], [0, (0, 1)]], 2)
form = local_diagonalize(M, 2)
dims = local_dims(form)
print("diagonal form exponents", form.exponents, "image", dims.im_dim, "image mod tau", dims.bar_im_dim)
