"""Exact matrices over group rings Z[G], Q[G] and F_p[G].

Boundary maps act on row vectors from the right: ``d(v) = v A``.  The chain
condition therefore reads ``A_{q+1} A_q = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import sympy

from .groups import GroupElement, GroupModelSpec, ModelMismatch

INTEGERS = "integers"
RATIONALS = "rationals"
PRIME_FIELD = "prime_field"


@dataclass(frozen=True)
class CoefficientRing:
    kind: str
    p: int | None = None

    def __post_init__(self):
        if self.kind not in (INTEGERS, RATIONALS, PRIME_FIELD):
            raise ValueError(f"unknown coefficient ring {self.kind!r}")
        if self.kind == PRIME_FIELD:
            if self.p is None or not sympy.isprime(self.p):
                raise ValueError(f"prime_field needs a prime, got {self.p}")
        elif self.p is not None:
            raise ValueError(f"{self.kind} takes no modulus")

    def coerce(self, c):
        if self.kind == INTEGERS:
            if isinstance(c, Fraction):
                if c.denominator != 1:
                    raise ValueError(f"{c} is not an integer")
                return int(c.numerator)
            if int(c) != c:
                raise ValueError(f"{c} is not an integer")
            return int(c)
        if self.kind == RATIONALS:
            return Fraction(c)
        c = Fraction(c)
        if c.denominator % self.p == 0:
            raise ValueError(f"{c} has no image in F_{self.p}")
        return c.numerator * pow(c.denominator, -1, self.p) % self.p

    def normalize(self, c):
        if self.kind == PRIME_FIELD:
            return c % self.p
        return c

    def maps_to(self, other: "CoefficientRing") -> bool:
        if self == other:
            return True
        if self.kind == INTEGERS:
            return True
        return self.kind == RATIONALS and other.kind == PRIME_FIELD

    @property
    def label(self) -> str:
        return {INTEGERS: "Z", RATIONALS: "Q"}.get(self.kind) or f"F{self.p}"

    def __str__(self):
        return self.label


ZZ = CoefficientRing(INTEGERS)
QQ = CoefficientRing(RATIONALS)


def GF(p: int) -> CoefficientRing:
    return CoefficientRing(PRIME_FIELD, p)


def ring_from_label(label: str) -> CoefficientRing:
    if label in ("Z", "integers"):
        return ZZ
    if label in ("Q", "rationals"):
        return QQ
    if label.startswith("F"):
        return GF(int(label[1:].lstrip("_")))
    raise ValueError(f"unknown coefficient ring {label!r}")


class GroupRingElement:
    """Finite sum ``sum c_g g`` with nonzero coefficients only."""

    __slots__ = ("model", "ring", "terms")

    def __init__(self, model: GroupModelSpec, ring: CoefficientRing, terms: Mapping | Iterable = ()):
        self.model = model
        self.ring = ring
        acc: dict[GroupElement, object] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for g, c in items:
            if g.model != model:
                raise ModelMismatch(f"term {g} does not belong to {model}")
            acc[g] = acc.get(g, 0) + ring.coerce(c)
        self.terms = {g: ring.normalize(c) for g, c in acc.items() if ring.normalize(c) != 0}

    @classmethod
    def zero(cls, model, ring):
        return cls(model, ring)

    @classmethod
    def scalar(cls, model, ring, c):
        return cls(model, ring, [(model.identity(), c)])

    def _check(self, other):
        if self.model != other.model or self.ring != other.ring:
            raise ModelMismatch("group ring elements over different models or rings")

    def __add__(self, other):
        self._check(other)
        terms = dict(self.terms)
        for g, c in other.terms.items():
            terms[g] = terms.get(g, 0) + c
        return GroupRingElement(self.model, self.ring, terms)

    def __neg__(self):
        return GroupRingElement(self.model, self.ring, {g: -c for g, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, GroupRingElement):
            return GroupRingElement(self.model, self.ring, {g: c * other for g, c in self.terms.items()})
        self._check(other)
        acc: dict[GroupElement, object] = {}
        for g, c in self.terms.items():
            for h, d in other.terms.items():
                gh = g * h
                acc[gh] = acc.get(gh, 0) + c * d
        return GroupRingElement(self.model, self.ring, acc)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        return self.model == other.model and self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash((self.model, self.ring, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def star(self) -> "GroupRingElement":
        return GroupRingElement(self.model, self.ring, {g.inverse(): c for g, c in self.terms.items()})

    def identity_coefficient(self):
        return self.terms.get(self.model.identity(), 0)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for g, c in sorted(self.terms.items(), key=lambda t: (t[0].word_length(), str(t[0]))):
            parts.append(f"{c}" if g.is_identity() else f"{c}*{g}")
        return " + ".join(parts)


class GroupRingMatrix:
    """``rows x cols`` matrix of group ring elements; zero-size shapes allowed."""

    def __init__(self, model: GroupModelSpec, ring: CoefficientRing, entries, rows=None, cols=None):
        self.model = model
        self.ring = ring
        entries = [list(r) for r in entries]
        self.rows = len(entries) if rows is None else rows
        self.cols = (len(entries[0]) if entries else 0) if cols is None else cols
        if len(entries) != self.rows and not (self.rows and not entries):
            raise ValueError("row count does not match entries")
        if not entries:
            entries = [[] for _ in range(self.rows)]
        grid = []
        for r in entries:
            if not r:
                r = [GroupRingElement.zero(model, ring)] * self.cols
            if len(r) != self.cols:
                raise ValueError("ragged group ring matrix")
            row = []
            for a in r:
                if not isinstance(a, GroupRingElement):
                    a = GroupRingElement.scalar(model, ring, a)
                if a.model != model or a.ring != ring:
                    raise ModelMismatch("matrix entries must share model and coefficient ring")
                row.append(a)
            grid.append(tuple(row))
        self.entries = tuple(grid)

    @classmethod
    def zeros(cls, model, ring, rows, cols):
        z = GroupRingElement.zero(model, ring)
        return cls(model, ring, [[z] * cols for _ in range(rows)], rows, cols)

    @classmethod
    def identity(cls, model, ring, n):
        one = GroupRingElement.scalar(model, ring, 1)
        z = GroupRingElement.zero(model, ring)
        return cls(model, ring, [[one if i == j else z for j in range(n)] for i in range(n)], n, n)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij) -> GroupRingElement:
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other):
        if not isinstance(other, GroupRingMatrix):
            return NotImplemented
        return (
            self.model == other.model
            and self.ring == other.ring
            and self.shape == other.shape
            and self.entries == other.entries
        )

    def __add__(self, other):
        _check_compatible(self, other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return GroupRingMatrix(
            self.model,
            self.ring,
            [[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)],
            self.rows,
            self.cols,
        )

    def __matmul__(self, other):
        return mat_mul(self, other)

    def is_zero(self) -> bool:
        return not any(a for row in self.entries for a in row)

    def support(self) -> set[GroupElement]:
        return {g for row in self.entries for a in row for g in a.terms}

    def power(self, k: int) -> "GroupRingMatrix":
        if self.rows != self.cols or k < 0:
            raise ValueError("power needs a square matrix and k >= 0")
        out = GroupRingMatrix.identity(self.model, self.ring, self.rows)
        for _ in range(k):
            out = mat_mul(out, self)
        return out

    def __repr__(self):
        return f"GroupRingMatrix({self.rows}x{self.cols} over {self.ring}[{self.model}], {list(map(list, self.entries))})"


def _check_compatible(A: GroupRingMatrix, B: GroupRingMatrix):
    if A.model != B.model or A.ring != B.ring:
        raise ModelMismatch("matrices over different group rings")


def star(A: GroupRingMatrix) -> GroupRingMatrix:
    return GroupRingMatrix(
        A.model, A.ring, [[A.entries[i][j].star() for i in range(A.rows)] for j in range(A.cols)], A.cols, A.rows
    )


def mat_mul(A: GroupRingMatrix, B: GroupRingMatrix) -> GroupRingMatrix:
    _check_compatible(A, B)
    if A.cols != B.rows:
        raise ValueError(f"cannot multiply {A.shape} by {B.shape}")
    out = []
    for i in range(A.rows):
        row = []
        for j in range(B.cols):
            acc: dict[GroupElement, object] = {}
            for k in range(A.cols):
                a, b = A.entries[i][k], B.entries[k][j]
                if not a or not b:
                    continue
                for g, c in a.terms.items():
                    for h, d in b.terms.items():
                        gh = g * h
                        acc[gh] = acc.get(gh, 0) + c * d
            row.append(GroupRingElement(A.model, A.ring, acc))
        out.append(row)
    return GroupRingMatrix(A.model, A.ring, out, A.rows, B.cols)


def kappa_bound(A: GroupRingMatrix) -> Fraction:
    """Sum of absolute values of all coefficients; bounds ``||rho(A)||`` for
    every unitary representation ``rho``."""
    if A.ring.kind == PRIME_FIELD:
        raise ValueError("kappa_bound needs integer or rational coefficients")
    return Fraction(sum(abs(c) for row in A.entries for a in row for c in a.terms.values()))


def vn_trace(A: GroupRingMatrix):
    """Von Neumann trace: identity coefficients summed along the diagonal."""
    if A.rows != A.cols:
        raise ValueError("vn_trace needs a square matrix")
    return A.ring.normalize(sum((A.entries[i][i].identity_coefficient() for i in range(A.rows)), 0))


def laplacian(A_q: GroupRingMatrix | None, A_q1: GroupRingMatrix | None) -> GroupRingMatrix:
    """``A_q A_q^* + A_{q+1}^* A_{q+1}``, an absent boundary contributing zero."""
    if A_q is None and A_q1 is None:
        raise ValueError("laplacian needs at least one boundary matrix")
    terms = []
    if A_q is not None:
        terms.append(mat_mul(A_q, star(A_q)))
    if A_q1 is not None:
        if A_q is not None and A_q1.cols != A_q.rows:
            raise ValueError(f"incompatible boundaries {A_q1.shape} and {A_q.shape}")
        terms.append(mat_mul(star(A_q1), A_q1))
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out
