"""Spectral measures of reduced Laplacians, moments and determinant certificates.

The mass at 0 is always the exact kernel dimension obtained from exact rank
computations; floating point eigenvalues only place the positive atoms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .complexes import ChainComplexSpec, wedge_rank
from .exact import charpoly
from .groupring import INTEGERS, QQ, GroupRingMatrix, kappa_bound, vn_trace
from .groups import FiniteQuotient, Tower
from .reduction import FlatMatrix, betti, reduce_matrix


class SpectralError(ValueError):
    pass


@dataclass
class SpectralMeasure:
    atoms: list[tuple[float, float]]
    zero_multiplicity: Fraction
    normalization: Fraction
    support_bound: Fraction
    dimension: int

    @property
    def total_mass(self) -> float:
        return float(self.zero_multiplicity) + sum(w for _, w in self.atoms)

    def moment(self, k: int) -> float:
        if k == 0:
            return self.total_mass
        return sum(x**k * w for x, w in self.atoms)

    def log_determinant(self) -> float:
        """``log det`` of the measure: integral of ``log t`` over ``(0, inf)``."""
        return sum(math.log(x) * w for x, w in self.atoms)

    def histogram(self, bins: int = 20) -> list[tuple[float, float, float]]:
        hi = float(self.support_bound) or 1.0
        edges = np.linspace(0.0, hi, bins + 1)
        mass = np.zeros(bins)
        mass[0] += float(self.zero_multiplicity)
        for x, w in self.atoms:
            k = min(int(np.searchsorted(edges, x, side="right")) - 1, bins - 1)
            mass[max(k, 0)] += w
        return [(float(edges[k]), float(edges[k + 1]), float(mass[k])) for k in range(bins)]


def spectral_measure(
    M: FlatMatrix | np.ndarray,
    exact_kernel_dim: int,
    normalization: Fraction = Fraction(1),
    support_bound: Fraction | None = None,
    tol: float = 1e-9,
) -> SpectralMeasure:
    dense = M.to_dense(float) if isinstance(M, FlatMatrix) else np.asarray(M, dtype=float)
    n = dense.shape[0]
    if dense.shape != (n, n):
        raise SpectralError("spectral measure needs a square matrix")
    scale = max(1.0, float(np.abs(dense).max()) if n else 1.0)
    if n and np.abs(dense - dense.T).max() > tol * scale:
        raise SpectralError("matrix is not symmetric")
    if not 0 <= exact_kernel_dim <= n:
        raise SpectralError(f"kernel dimension {exact_kernel_dim} outside 0..{n}")
    normalization = Fraction(normalization)
    if support_bound is None:
        support_bound = Fraction(float(np.abs(dense).sum(axis=1).max()) if n else 0)
    try:
        eig = np.sort(np.linalg.eigvalsh(dense)) if n else np.zeros(0)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigensolver failed: {exc}") from exc

    positive = eig[exact_kernel_dim:]
    threshold = math.sqrt(tol) * scale
    above = positive[positive > threshold]
    floor = above.min() if above.size else threshold
    # eigenvalues near 0 beyond the exact kernel count belong to the smallest
    # positive cluster
    positive = np.where(positive > threshold, positive, floor)

    atoms: list[tuple[float, float]] = []
    w = float(normalization)
    for x in map(float, positive):
        if atoms and abs(x - atoms[-1][0]) <= tol * scale * 10:
            v, c = atoms[-1]
            atoms[-1] = ((v * c + x * w) / (c + w), c + w)
        else:
            atoms.append((x, w))
    return SpectralMeasure(atoms, exact_kernel_dim * normalization, normalization, Fraction(support_bound), n)


def level_measure(Delta: GroupRingMatrix, q: FiniteQuotient, normalized: bool = True) -> SpectralMeasure:
    """Spectral measure of ``r(Delta)`` at one level, normalized by the index."""
    flat = reduce_matrix(Delta, q)
    kernel = flat.rows - flat.rank()
    norm = Fraction(1, q.order) if normalized else Fraction(1)
    return spectral_measure(flat, kernel, norm, kappa_bound(Delta))


def exact_moment(Delta: GroupRingMatrix, q: FiniteQuotient, k: int) -> Fraction:
    """``tr(r(Delta)^k) / [G:G_i]`` in exact integer arithmetic."""
    if Delta.ring.kind != INTEGERS or k < 1:
        raise ValueError("exact_moment needs an integral matrix and k >= 1")
    flat = reduce_matrix(Delta, q)
    return Fraction(flat.power(k).trace(), q.order)


def l2_moment(Delta: GroupRingMatrix, k: int) -> Fraction:
    if k < 1:
        raise ValueError("k must be >= 1")
    return Fraction(vn_trace(Delta.power(k)))


@dataclass
class MomentRow:
    level: int
    index: int
    k: int
    exact: Fraction
    l2: Fraction

    @property
    def difference(self) -> Fraction:
        return self.exact - self.l2


@dataclass
class MomentReport:
    rows: list[MomentRow]
    agreement_level: int | None

    def disagreements(self) -> list[MomentRow]:
        return [r for r in self.rows if r.difference]


def moment_convergence_report(Delta: GroupRingMatrix, tower, k_max: int) -> MomentReport:
    """Exact finite moments against L2 moments, level by level.

    ``agreement_level`` is the first level from which every ``k <= k_max``
    agrees exactly (None if the last level still disagrees).
    """
    quotients = tower.quotients if isinstance(tower, Tower) else list(tower)
    l2 = [l2_moment(Delta, k) for k in range(1, k_max + 1)]
    rows = []
    agree = []
    for i, q in enumerate(quotients, start=1):
        flat = reduce_matrix(Delta, q)
        power = flat
        ok = True
        for k in range(1, k_max + 1):
            if k > 1:
                power = power @ flat
            ex = Fraction(power.trace(), q.order)
            rows.append(MomentRow(i, q.order, k, ex, l2[k - 1]))
            ok &= ex == l2[k - 1]
        agree.append(ok)
    level = None
    for i in range(len(agree), 0, -1):
        if not agree[i - 1]:
            break
        level = i
    return MomentReport(rows, level)


@dataclass
class FKCertificate:
    char_poly_low_coeff: int
    index: int
    log_normalized_det: float
    degenerate: bool = False
    kernel_dim: int = 0


def fk_certificate(Delta: GroupRingMatrix, q: FiniteQuotient) -> FKCertificate:
    """Lowest nonzero coefficient of the characteristic polynomial of ``r(Delta)``.

    Up to sign it is the product of the nonzero eigenvalues, i.e. the
    ``[G:G_i]``-th power of the determinant of the normalized measure.  Being
    a nonzero integer, the normalized log determinant is nonnegative.
    """
    if Delta.ring.kind != INTEGERS:
        raise ValueError("fk_certificate needs an integral matrix")
    flat = reduce_matrix(Delta, q)
    if flat.is_zero():
        return FKCertificate(1, q.order, 0.0, degenerate=True, kernel_dim=flat.rows)
    coeffs = charpoly(flat.to_lists())
    kernel = next(k for k, c in enumerate(coeffs) if c)
    c = coeffs[kernel]
    if not isinstance(c, int) or c == 0:
        raise ArithmeticError("lowest coefficient is not a nonzero integer")
    log_det = math.log(abs(c)) / q.order
    return FKCertificate(c, q.order, log_det, False, kernel)


@dataclass
class KazhdanRow:
    level: int
    index: int
    normalized: Fraction
    reference: Fraction | None

    @property
    def gap(self) -> Fraction | None:
        return None if self.reference is None else self.normalized - self.reference

    @property
    def above_reference(self) -> bool | None:
        return None if self.reference is None else self.normalized >= self.reference


def reference_l2_betti(C: ChainComplexSpec, q: int) -> Fraction | None:
    """Known L2 Betti numbers of the built-in complexes."""
    d = wedge_rank(C)
    if d is not None:
        return Fraction(d - 1) if q == 1 else Fraction(0)
    if C.name in ("circle", "torus", "lls"):
        return Fraction(0)
    return None


def kazhdan_report(C: ChainComplexSpec, tower, q: int, reference: Fraction | None = None) -> list[KazhdanRow]:
    quotients = tower.quotients if isinstance(tower, Tower) else list(tower)
    rows = []
    for i, quo in enumerate(quotients, start=1):
        b = betti(C, quo, QQ)[q]
        rows.append(KazhdanRow(i, quo.order, Fraction(b, quo.order), reference))
    return rows
