"""Integral determinant certificates for the circle Laplacian.

Over the cyclic cover of order m the Laplacian is the m-cycle graph
Laplacian. The lowest nonzero coefficient of its characteristic polynomial
is an integer (here m^2), so the normalized log determinant is >= 0.
"""
import math

from towerlab.complexes import circle, complex_laplacian
from towerlab.groups import FREE_ABELIAN, GroupModelSpec, abelian_quotient
from towerlab.spectral import fk_certificate

delta = complex_laplacian(circle(), 0)
Z = GroupModelSpec(FREE_ABELIAN, 1)
for m in (2, 3, 5, 8, 16, 32, 64):
    cert = fk_certificate(delta, abelian_quotient(Z, [m]))
    print(f"m = {m:2d}  lowest coefficient {cert.char_poly_low_coeff:6d}  "
          f"log det / m = {cert.log_normalized_det:.6f}  (2 ln m / m = {2 * math.log(m) / m:.6f})")
