import cmath
import math
from fractions import Fraction
from math import comb

import numpy as np
import pytest

from towerlab.complexes import circle, complex_laplacian, lls_example, torus, wedge_of_circles
from towerlab.exact import charpoly_interpolation
from towerlab.groupring import kappa_bound
from towerlab.groups import FREE_ABELIAN, GroupModelSpec, abelian_quotient, make_builtin_tower
from towerlab.reduction import reduce_matrix
from towerlab.spectral import (
    SpectralError,
    SpectralMeasure,
    exact_moment,
    fk_certificate,
    kazhdan_report,
    l2_moment,
    level_measure,
    moment_convergence_report,
    spectral_measure,
)

Z1 = GroupModelSpec(FREE_ABELIAN, 1)
DELTA = complex_laplacian(circle(), 0)


def cyclic(m):
    return abelian_quotient(Z1, [m])


def circle_moment_oracle(m, k):
    """tr(Delta^k)/m on the m-cycle: closed walks of (2 - t - 1/t)^k, i.e. the
    coefficients of t^s with m | s."""
    return sum((-1) ** (s % 2) * comb(2 * k, k + s) for s in range(-k, k + 1) if s % m == 0)


def test_circle_spectrum_z4():
    mu = level_measure(DELTA, cyclic(4))
    assert mu.zero_multiplicity == Fraction(1, 4)
    assert [(round(x, 9), w) for x, w in mu.atoms] == [(2.0, 0.5), (4.0, 0.25)]
    assert mu.total_mass == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("m", [3, 5, 8, 12])
def test_circle_spectrum_is_fourier(m):
    mu = level_measure(DELTA, cyclic(m), normalized=False)
    expected = sorted(2 - 2 * math.cos(2 * math.pi * j / m) for j in range(1, m))
    got = sorted(x for x, w in mu.atoms for _ in range(round(w)))
    assert np.allclose(got, expected, atol=1e-9)
    assert mu.zero_multiplicity == 1


def test_moments_match_exact_traces():
    for C, q in ((torus(2), abelian_quotient(GroupModelSpec(FREE_ABELIAN, 2), [3, 4])), (circle(), cyclic(7)),
                 (lls_example(2, 2), cyclic(4))):
        for k in range(len(C.ranks)):
            D = complex_laplacian(C, k)
            mu = level_measure(D, q)
            for j in range(1, 5):
                assert mu.moment(j) == pytest.approx(float(exact_moment(D, q, j)), abs=1e-6)


def test_mass_conservation_and_support_bound():
    for C, q in ((torus(2), abelian_quotient(GroupModelSpec(FREE_ABELIAN, 2), [4, 4])),
                 (wedge_of_circles(2), abelian_quotient(GroupModelSpec("free", 2), [4, 2]))):
        for k in range(len(C.ranks)):
            D = complex_laplacian(C, k)
            mu = level_measure(D, q)
            assert mu.total_mass == pytest.approx(C.ranks[k], abs=1e-9)
            assert all(x <= float(kappa_bound(D)) + 1e-9 for x, _ in mu.atoms)
            hist = mu.histogram(10)
            assert sum(mass for _, _, mass in hist) == pytest.approx(C.ranks[k], abs=1e-9)


def test_exact_kernel_overrides_float_noise():
    A = np.diag([0.0, 1e-13, 2.0])
    mu = spectral_measure(A, 1)
    assert mu.zero_multiplicity == 1
    assert len(mu.atoms) == 1 and mu.atoms[0][1] == 2
    with pytest.raises(SpectralError):
        spectral_measure(np.array([[0.0, 1.0], [0.0, 0.0]]), 0)
    with pytest.raises(SpectralError):
        spectral_measure(np.eye(2), 3)


def test_l2_moments_of_circle_are_central_binomials():
    for k in range(1, 7):
        assert l2_moment(DELTA, k) == comb(2 * k, k)


def test_exact_moments_against_walk_oracle():
    for m in range(2, 16):
        for k in range(1, 7):
            assert exact_moment(DELTA, cyclic(m), k) == circle_moment_oracle(m, k)


def test_moment_report_records_small_level_disagreement():
    report = moment_convergence_report(DELTA, [cyclic(m) for m in (2, 4, 8)], 3)
    bad = {(r.index, r.k): (r.exact, r.l2) for r in report.disagreements()}
    assert bad[(2, 2)] == (8, 6)
    assert bad[(2, 3)] == (32, 20)
    assert report.agreement_level == 2


def test_point_measures_converge_weakly_without_kernel_convergence():
    # delta_{1/i} -> delta_0 weakly: every moment converges, yet the mass at 0
    # stays 0 along the sequence and jumps to 1 in the limit
    limit = SpectralMeasure([], Fraction(1), Fraction(1), Fraction(1), 1)
    seq = [SpectralMeasure([(1 / i, 1.0)], Fraction(0), Fraction(1), Fraction(1), 1) for i in (10, 100, 1000)]
    for k in (1, 2, 3):
        gaps = [abs(mu.moment(k) - limit.moment(k)) for mu in seq]
        assert gaps == sorted(gaps, reverse=True) and gaps[-1] <= 1e-3
    assert all(mu.zero_multiplicity == 0 for mu in seq)
    assert limit.zero_multiplicity == 1


def cyclotomic_oracle(m):
    return round(abs(math.prod((1 - cmath.exp(2j * math.pi * k / m)) * (1 - cmath.exp(-2j * math.pi * k / m))
                               for k in range(1, m))))


def test_fk_certificate_circle():
    for m in range(2, 25):
        cert = fk_certificate(DELTA, cyclic(m))
        assert abs(cert.char_poly_low_coeff) == m * m == cyclotomic_oracle(m)
        assert cert.kernel_dim == 1
        assert cert.log_normalized_det == pytest.approx(2 * math.log(m) / m)
    for m in range(2, 8):
        flat = reduce_matrix(DELTA, cyclic(m)).to_lists()
        low = next(c for c in charpoly_interpolation(flat) if c)
        assert abs(low) == m * m


def test_fk_certificate_nonnegative_and_degenerate():
    T = torus(2)
    q = abelian_quotient(T.model, [3, 3])
    for k in range(3):
        cert = fk_certificate(complex_laplacian(T, k), q)
        assert cert.log_normalized_det >= 0
    zero = complex_laplacian(lls_example(3, 2), 2)
    cert = fk_certificate(zero, cyclic(2))
    assert cert.degenerate and cert.char_poly_low_coeff == 1


def test_kazhdan_report_wedge():
    C = wedge_of_circles(2)
    tower = make_builtin_tower(C.model, "abelian", 3, 2)
    rows = kazhdan_report(C, tower, 1, Fraction(1))
    assert [r.gap for r in rows] == [Fraction(1, 4), Fraction(1, 16), Fraction(1, 64)]
    assert all(r.above_reference for r in rows)
