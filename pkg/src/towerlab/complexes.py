"""Finite free chain complexes over group rings and the built-in examples."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

from .groupring import (
    PRIME_FIELD,
    ZZ,
    CoefficientRing,
    GroupRingElement,
    GroupRingMatrix,
    laplacian,
    mat_mul,
)
from .groups import FREE, FREE_ABELIAN, GroupModelSpec


@dataclass
class ChainComplexSpec:
    """``... -> R[G]^{n_q} --A_q--> R[G]^{n_{q-1}} -> ...`` with ``A_q`` of shape
    ``n_q x n_{q-1}``; ``boundaries[q]`` for ``1 <= q <= top_degree``."""

    model: GroupModelSpec
    coefficients: CoefficientRing
    ranks: tuple[int, ...]
    boundaries: dict[int, GroupRingMatrix]
    name: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.ranks = tuple(int(n) for n in self.ranks)
        for q in range(1, self.top_degree + 1):
            if q not in self.boundaries:
                self.boundaries[q] = GroupRingMatrix.zeros(
                    self.model, self.coefficients, self.ranks[q], self.ranks[q - 1]
                )
        for q, A in self.boundaries.items():
            if not 1 <= q <= self.top_degree:
                raise ValueError(f"boundary in degree {q} outside 1..{self.top_degree}")
            if A.shape != (self.ranks[q], self.ranks[q - 1]):
                raise ValueError(
                    f"boundary A_{q} has shape {A.shape}, expected {(self.ranks[q], self.ranks[q - 1])}"
                )
            if A.model != self.model or A.ring != self.coefficients:
                raise ValueError(f"boundary A_{q} is over the wrong group ring")

    @property
    def top_degree(self) -> int:
        return len(self.ranks) - 1

    def boundary(self, q: int) -> GroupRingMatrix | None:
        """``A_q``, or None outside ``1..top_degree``."""
        return self.boundaries.get(q)

    def euler_characteristic(self) -> int:
        return sum((-1) ** q * n for q, n in enumerate(self.ranks))

    def __eq__(self, other):
        if not isinstance(other, ChainComplexSpec):
            return NotImplemented
        return (
            self.model == other.model
            and self.coefficients == other.coefficients
            and self.ranks == other.ranks
            and all(self.boundaries[q] == other.boundaries[q] for q in self.boundaries)
        )


@dataclass
class ComplexReport:
    ok: bool
    degree: int | None = None
    entry: tuple[int, int] | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def validate(C: ChainComplexSpec) -> ComplexReport:
    for q in range(1, C.top_degree):
        prod = mat_mul(C.boundaries[q + 1], C.boundaries[q])
        for i, row in enumerate(prod.entries):
            for j, a in enumerate(row):
                if a:
                    return ComplexReport(False, q + 1, (i, j), f"A_{q + 1} A_{q} has entry ({i},{j}) = {a!r}")
    return ComplexReport(True)


def _elt(model, ring, terms):
    return GroupRingElement(model, ring, terms)


def circle() -> ChainComplexSpec:
    model = GroupModelSpec(FREE_ABELIAN, 1)
    t = model.generator(0)
    A1 = GroupRingMatrix(model, ZZ, [[_elt(model, ZZ, [(t, 1), (model.identity(), -1)])]])
    return ChainComplexSpec(model, ZZ, (1, 1), {1: A1}, "circle", {})


def wedge_of_circles(d: int) -> ChainComplexSpec:
    if d < 1:
        raise ValueError("wedge_of_circles needs d >= 1")
    model = GroupModelSpec(FREE, d)
    one = model.identity()
    A1 = GroupRingMatrix(model, ZZ, [[_elt(model, ZZ, [(x, 1), (one, -1)])] for x in model.gens()])
    return ChainComplexSpec(model, ZZ, (1, d), {1: A1}, "wedge", {"d": d})


def torus(n: int) -> ChainComplexSpec:
    """Koszul resolution of Z over Z[Z^n].

    Basis of ``C_q`` is the sorted ``q``-subsets ``S`` of ``{0..n-1}``;
    ``d(e_S) = sum_j (-1)^j (t_{s_j} - 1) e_{S - s_j}`` with ``j`` 0-based.
    """
    if n < 1:
        raise ValueError("torus needs n >= 1")
    model = GroupModelSpec(FREE_ABELIAN, n)
    one = model.identity()
    subsets = [list(itertools.combinations(range(n), q)) for q in range(n + 1)]
    boundaries = {}
    for q in range(1, n + 1):
        index = {S: i for i, S in enumerate(subsets[q - 1])}
        rows = []
        for S in subsets[q]:
            row = [GroupRingElement.zero(model, ZZ)] * len(subsets[q - 1])
            for j, s in enumerate(S):
                sign = -1 if j % 2 else 1
                face = S[:j] + S[j + 1 :]
                row[index[face]] = _elt(model, ZZ, [(model.generator(s), sign), (one, -sign)])
            rows.append(row)
        boundaries[q] = GroupRingMatrix(model, ZZ, rows, len(subsets[q]), len(subsets[q - 1]))
    return ChainComplexSpec(model, ZZ, tuple(comb(n, q) for q in range(n + 1)), boundaries, "torus", {"n": n})


def lls_example(d: int, p: int) -> ChainComplexSpec:
    """Circle wedged with a Moore space: cells in degrees 0, 1, d, d+1 over
    Z[Z], the top cell attached by a degree ``p`` map."""
    if d < 2:
        raise ValueError("lls_example needs d >= 2")
    model = GroupModelSpec(FREE_ABELIAN, 1)
    t = model.generator(0)
    one = model.identity()
    ranks = [0] * (d + 2)
    for q in (0, 1, d, d + 1):
        ranks[q] = 1
    boundaries = {
        1: GroupRingMatrix(model, ZZ, [[_elt(model, ZZ, [(t, 1), (one, -1)])]]),
        d + 1: GroupRingMatrix(model, ZZ, [[_elt(model, ZZ, [(one, p)])]]),
    }
    return ChainComplexSpec(model, ZZ, tuple(ranks), boundaries, "lls", {"d": d, "p": p})


BUILTINS = {
    "circle": circle,
    "wedge": wedge_of_circles,
    "wedge_of_circles": wedge_of_circles,
    "torus": torus,
    "lls": lls_example,
    "lls_example": lls_example,
}


def builtin_complex(name: str, *params) -> ChainComplexSpec:
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown builtin complex {name!r}; choose from {sorted(BUILTINS)}") from None
    return factory(*params)


def complex_laplacian(C: ChainComplexSpec, q: int) -> GroupRingMatrix:
    if not 0 <= q <= C.top_degree:
        raise ValueError(f"degree {q} outside 0..{C.top_degree}")
    if C.coefficients.kind == PRIME_FIELD:
        raise ValueError("Laplacians need integer or rational coefficients")
    return laplacian(C.boundary(q), C.boundary(q + 1))


def wedge_rank(C: ChainComplexSpec) -> int | None:
    """``d`` if ``C`` is the standard complex of a wedge of ``d`` circles."""
    if C.model.kind != FREE or C.ranks != (1, C.model.rank):
        return None
    one = C.model.identity()
    A = C.boundaries[1]
    for j, x in enumerate(C.model.gens()):
        if A[j, 0] != _elt(C.model, C.coefficients, [(x, 1), (one, -1)]):
            return None
    return C.model.rank
