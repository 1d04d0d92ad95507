"""Reduction of group ring matrices modulo finite quotients.

A ``rows x cols`` group ring matrix becomes a ``rows*m x cols*m`` flat matrix:
block ``(i, j)`` is ``sum_g c_g P_g`` where ``P_g`` is the permutation matrix
of ``quotient_image(g)`` (``P_g[x, g(x)] = 1``).  Flat index of point ``x`` in
block row ``i`` is ``i*m + x``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .complexes import ChainComplexSpec
from .exact import rank_mod_p, rational_rank, smith_normal_form
from .groupring import (
    GF,
    INTEGERS,
    PRIME_FIELD,
    QQ,
    RATIONALS,
    ZZ,
    CoefficientRing,
    GroupRingMatrix,
)
from .groups import FiniteQuotient, Tower, quotient_image


class FlatMatrix:
    """Sparse matrix over Z, Q or F_p (rows stored as ``{col: value}``)."""

    def __init__(self, rows: int, cols: int, ring: CoefficientRing, entries: dict | None = None):
        self.rows = rows
        self.cols = cols
        self.ring = ring
        self.entries: dict[int, dict[int, object]] = {}
        for i, row in (entries or {}).items():
            r = {j: ring.normalize(v) for j, v in row.items()}
            r = {j: v for j, v in r.items() if v != 0}
            if r:
                self.entries[i] = r

    @property
    def shape(self):
        return self.rows, self.cols

    def nnz(self) -> int:
        return sum(len(r) for r in self.entries.values())

    def to_dense(self, dtype=object) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=dtype)
        for i, row in self.entries.items():
            for j, v in row.items():
                out[i, j] = v
        return out

    def to_lists(self) -> list[list]:
        out = [[0] * self.cols for _ in range(self.rows)]
        for i, row in self.entries.items():
            for j, v in row.items():
                out[i][j] = v
        return out

    def transpose(self) -> "FlatMatrix":
        t: dict[int, dict[int, object]] = {}
        for i, row in self.entries.items():
            for j, v in row.items():
                t.setdefault(j, {})[i] = v
        return FlatMatrix(self.cols, self.rows, self.ring, t)

    def __matmul__(self, other: "FlatMatrix") -> "FlatMatrix":
        if self.cols != other.rows or self.ring != other.ring:
            raise ValueError("incompatible flat matrices")
        out: dict[int, dict[int, object]] = {}
        for i, row in self.entries.items():
            acc: dict[int, object] = {}
            for k, a in row.items():
                brow = other.entries.get(k)
                if not brow:
                    continue
                for j, b in brow.items():
                    acc[j] = acc.get(j, 0) + a * b
            out[i] = acc
        return FlatMatrix(self.rows, other.cols, self.ring, out)

    def __eq__(self, other):
        if not isinstance(other, FlatMatrix):
            return NotImplemented
        return self.shape == other.shape and self.ring == other.ring and self.entries == other.entries

    def is_zero(self) -> bool:
        return not self.entries

    def trace(self):
        if self.rows != self.cols:
            raise ValueError("trace of a non-square matrix")
        return self.ring.normalize(sum((row.get(i, 0) for i, row in self.entries.items()), 0))

    def is_symmetric(self) -> bool:
        return self.entries == self.transpose().entries

    def rank(self, rng: random.Random | None = None) -> int:
        if not self.entries:
            return 0
        if self.ring.kind == PRIME_FIELD:
            return rank_mod_p(self.entries, self.ring.p)
        if self.ring.kind == INTEGERS:
            return rational_rank(self.entries, rng)
        # rationals: clear denominators row by row
        cleared = {}
        for i, row in self.entries.items():
            den = 1
            for v in row.values():
                den = den * Fraction(v).denominator // np.gcd(den, Fraction(v).denominator)
            cleared[i] = {j: int(Fraction(v) * den) for j, v in row.items()}
        return rational_rank(cleared, rng)

    def power(self, k: int) -> "FlatMatrix":
        out = FlatMatrix(self.rows, self.cols, self.ring, {i: {i: 1} for i in range(self.rows)})
        for _ in range(k):
            out = out @ self
        return out


def reduce_matrix(A: GroupRingMatrix, q: FiniteQuotient, target: CoefficientRing | None = None) -> FlatMatrix:
    target = target or A.ring
    if not A.ring.maps_to(target):
        raise ValueError(f"no coefficient map {A.ring} -> {target}")
    m = q.order
    cache: dict = {}
    out: dict[int, dict[int, object]] = {}
    for i, row in enumerate(A.entries):
        for j, a in enumerate(row):
            for g, c in a.terms.items():
                perm = cache.get(g)
                if perm is None:
                    perm = cache[g] = quotient_image(g, q)
                c = target.coerce(c)
                for x in range(m):
                    r = out.setdefault(i * m + x, {})
                    col = j * m + perm[x]
                    r[col] = r.get(col, 0) + c
    return FlatMatrix(A.rows * m, A.cols * m, target, out)


def _rank_ring(field: CoefficientRing) -> CoefficientRing:
    if field.kind == RATIONALS:
        return QQ
    if field.kind != PRIME_FIELD:
        raise ValueError(f"Betti numbers need a field, got {field}")
    return field


def boundary_ranks(C: ChainComplexSpec, q: FiniteQuotient, field: CoefficientRing, rng=None) -> dict[int, int]:
    """Rank of every flat boundary ``A_k`` (``k = 1..top_degree``)."""
    field = _rank_ring(field)
    ring = ZZ if field.kind == RATIONALS and C.coefficients.kind == INTEGERS else field
    return {k: reduce_matrix(A, q, ring).rank(rng) for k, A in sorted(C.boundaries.items())}


def betti(C: ChainComplexSpec, q: FiniteQuotient, field: CoefficientRing, rng=None) -> list[int]:
    """``b_k = n_k m - rank A_k - rank A_{k+1}`` for every degree ``k``."""
    ranks = boundary_ranks(C, q, field, rng)
    m = q.order
    return [n * m - ranks.get(k, 0) - ranks.get(k + 1, 0) for k, n in enumerate(C.ranks)]


def torsion_counts(C: ChainComplexSpec, q: FiniteQuotient, p: int) -> list[int]:
    """``t_k(p)``: elementary divisors of flat ``A_{k+1}`` divisible by ``p``."""
    if C.coefficients.kind != INTEGERS:
        raise ValueError("torsion counts need an integral complex")
    out = []
    for k in range(len(C.ranks)):
        A = C.boundary(k + 1)
        if A is None:
            out.append(0)
            continue
        divs = smith_normal_form(reduce_matrix(A, q).entries)
        out.append(sum(1 for d in divs if d % p == 0))
    return out


def finite_trace(A: GroupRingMatrix, q: FiniteQuotient):
    """Trace of ``r(A)`` two ways: from the flat matrix, and as ``m`` times the
    coefficients of diagonal terms lying in the kernel."""
    if A.rows != A.cols:
        raise ValueError("finite_trace needs a square matrix")
    flat = reduce_matrix(A, q).trace()
    ident = tuple(range(q.order))
    kernel_sum = 0
    for i in range(A.rows):
        for g, c in A.entries[i][i].terms.items():
            if quotient_image(g, q) == ident:
                kernel_sum += c
    return flat, A.ring.normalize(q.order * kernel_sum)


@dataclass
class BettiLevel:
    level: int
    index: int
    rational: list[int]
    modp: dict[int, list[int]] = field(default_factory=dict)

    def normalized(self, p: int | None = None) -> list[Fraction]:
        values = self.rational if p is None else self.modp[p]
        return [Fraction(b, self.index) for b in values]


@dataclass
class BettiTable:
    degrees: list[int]
    primes: list[int]
    levels: list[BettiLevel]

    def column(self, q: int, p: int | None = None) -> list[int]:
        return [(lv.rational if p is None else lv.modp[p])[q] for lv in self.levels]

    def normalized_column(self, q: int, p: int | None = None) -> list[Fraction]:
        return [Fraction(b, lv.index) for b, lv in zip(self.column(q, p), self.levels)]


def betti_table(
    C: ChainComplexSpec, tower: Tower, primes=(), rational: bool = True, rng: random.Random | None = None
) -> BettiTable:
    rng = rng or random.Random(0)
    levels = []
    for i, q in enumerate(tower.quotients, start=1):
        rat = betti(C, q, QQ, rng) if rational else []
        modp = {p: betti(C, q, GF(p)) for p in primes}
        levels.append(BettiLevel(i, q.order, rat, modp))
    return BettiTable(list(range(len(C.ranks))), list(primes), levels)
