"""Group models with exact normal forms, finite quotients and towers.

Only three models ship: free groups, free abelian groups and the integral
Heisenberg group.  A finite quotient ``G -> Q`` is given by the right regular
action of ``Q`` on ``{0, ..., m-1}``: one permutation per generator, point 0
being the identity coset.  Normal subgroups are never stored; they exist only
as kernels of such quotients.

Permutations are tuples ``s`` with ``s[x]`` the image of ``x``.  Products are
read left to right: ``perm_mul(s, t)`` applies ``s`` first, then ``t``.  With
this convention ``quotient_image(a * b) == perm_mul(quotient_image(a),
quotient_image(b))``.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

FREE = "free"
FREE_ABELIAN = "free_abelian"
HEISENBERG = "heisenberg"
MODEL_KINDS = (FREE, FREE_ABELIAN, HEISENBERG)


class ModelMismatch(ValueError):
    pass


@dataclass(frozen=True)
class GroupModelSpec:
    kind: str
    rank: int = 1

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown group model {self.kind!r}")
        if self.kind == HEISENBERG:
            object.__setattr__(self, "rank", 3)
        elif self.rank < 1:
            raise ValueError("rank must be >= 1")

    @property
    def ngens(self) -> int:
        return self.rank

    def identity(self) -> "GroupElement":
        if self.kind == FREE:
            return GroupElement(self, ())
        if self.kind == FREE_ABELIAN:
            return GroupElement(self, (0,) * self.rank)
        return GroupElement(self, (0, 0, 0))

    def generator(self, j: int, power: int = 1) -> "GroupElement":
        if not 0 <= j < self.ngens:
            raise IndexError(f"generator g{j} out of range for {self}")
        if self.kind == FREE:
            word = (j + 1,) * power if power > 0 else (-(j + 1),) * (-power)
            return GroupElement(self, word)
        if self.kind == FREE_ABELIAN:
            v = [0] * self.rank
            v[j] = power
            return GroupElement(self, tuple(v))
        triple = [0, 0, 0]
        triple[(0, 1, 2)[j]] = power
        return GroupElement(self, tuple(triple))

    def gens(self) -> list["GroupElement"]:
        return [self.generator(j) for j in range(self.ngens)]

    def from_word(self, word: Sequence[tuple[int, int]]) -> "GroupElement":
        """Evaluate a word given as ``(generator index, exponent)`` pairs."""
        g = self.identity()
        for j, e in word:
            g = g * self.generator(j, e)
        return g

    def __str__(self):
        if self.kind == HEISENBERG:
            return "H3(Z)"
        if self.kind == FREE:
            return f"F{self.rank}"
        return f"Z^{self.rank}"


def _free_reduce(letters) -> tuple[int, ...]:
    out: list[int] = []
    for a in letters:
        if out and out[-1] == -a:
            out.pop()
        else:
            out.append(a)
    return tuple(out)


@dataclass(frozen=True)
class GroupElement:
    """Element of a built-in group model in normal form.

    ``normal_form`` is a freely reduced tuple of signed generator indices
    (``k`` for ``g_{k-1}``, ``-k`` for its inverse) for free groups, the
    exponent vector for free abelian groups, and ``(a, b, c)`` standing for
    the unitriangular matrix ``[[1, a, c], [0, 1, b], [0, 0, 1]]`` for the
    Heisenberg group.
    """

    model: GroupModelSpec
    normal_form: tuple

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)

    def inverse(self) -> "GroupElement":
        kind = self.model.kind
        nf = self.normal_form
        if kind == FREE:
            return GroupElement(self.model, tuple(-a for a in reversed(nf)))
        if kind == FREE_ABELIAN:
            return GroupElement(self.model, tuple(-a for a in nf))
        a, b, c = nf
        return GroupElement(self.model, (-a, -b, a * b - c))

    def is_identity(self) -> bool:
        return self == self.model.identity()

    def word(self) -> list[tuple[int, int]]:
        """A word ``[(generator, exponent), ...]`` evaluating to this element."""
        kind = self.model.kind
        nf = self.normal_form
        if kind == FREE:
            word: list[tuple[int, int]] = []
            for a in nf:
                j, e = abs(a) - 1, (1 if a > 0 else -1)
                if word and word[-1][0] == j:
                    word[-1] = (j, word[-1][1] + e)
                else:
                    word.append((j, e))
            return word
        if kind == FREE_ABELIAN:
            return [(j, e) for j, e in enumerate(nf) if e]
        # (a, b, c) = z^(c - ab) x^a y^b
        a, b, c = nf
        return [(j, e) for j, e in ((2, c - a * b), (0, a), (1, b)) if e]

    def word_length(self) -> int:
        return sum(abs(e) for _, e in self.word())

    def __str__(self):
        w = self.word()
        if not w:
            return "1"
        return " ".join(f"g{j}" if e == 1 else f"g{j}^{e}" for j, e in w)


def multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    if a.model != b.model:
        raise ModelMismatch(f"cannot multiply elements of {a.model} and {b.model}")
    kind = a.model.kind
    x, y = a.normal_form, b.normal_form
    if kind == FREE:
        return GroupElement(a.model, _free_reduce(x + y))
    if kind == FREE_ABELIAN:
        return GroupElement(a.model, tuple(s + t for s, t in zip(x, y)))
    return GroupElement(a.model, (x[0] + y[0], x[1] + y[1], x[2] + y[2] + x[0] * y[1]))


# ---------------------------------------------------------------------------
# permutations


def perm_identity(m: int) -> tuple[int, ...]:
    return tuple(range(m))


def perm_mul(s, t) -> tuple[int, ...]:
    """``s`` followed by ``t``."""
    return tuple(t[x] for x in s)


def perm_inverse(s) -> tuple[int, ...]:
    inv = [0] * len(s)
    for x, y in enumerate(s):
        inv[y] = x
    return tuple(inv)


def perm_pow(s, e: int) -> tuple[int, ...]:
    if e < 0:
        s, e = perm_inverse(s), -e
    result = perm_identity(len(s))
    base = tuple(s)
    while e:
        if e & 1:
            result = perm_mul(result, base)
        base = perm_mul(base, base)
        e >>= 1
    return result


def perm_order(s) -> int:
    order = 1
    seen = [False] * len(s)
    for x in range(len(s)):
        if seen[x]:
            continue
        n, y = 0, x
        while not seen[y]:
            seen[y] = True
            y = s[y]
            n += 1
        order = order * n // np.gcd(order, n)
    return int(order)


# ---------------------------------------------------------------------------
# finite quotients


@dataclass(frozen=True)
class FiniteQuotient:
    generator_images: tuple[tuple[int, ...], ...]
    order: int
    label: str = ""

    def __post_init__(self):
        imgs = tuple(tuple(int(x) for x in s) for s in self.generator_images)
        object.__setattr__(self, "generator_images", imgs)

    @property
    def ngens(self) -> int:
        return len(self.generator_images)

    def transversal(self) -> list[list[tuple[int, int]]]:
        """For every point ``x`` a word (generator, +-1 letters) moving 0 to ``x``."""
        m = self.order
        inv = [perm_inverse(s) for s in self.generator_images]
        words: list = [None] * m
        words[0] = []
        queue = deque([0])
        while queue:
            x = queue.popleft()
            for j, s in enumerate(self.generator_images):
                for e, perm in ((1, s), (-1, inv[j])):
                    y = perm[x]
                    if words[y] is None:
                        words[y] = words[x] + [(j, e)]
                        queue.append(y)
        if any(w is None for w in words):
            raise ValueError(f"quotient {self.label!r} is not transitive")
        return words

    def word_image(self, word) -> tuple[int, ...]:
        perm = perm_identity(self.order)
        for j, e in word:
            perm = perm_mul(perm, perm_pow(self.generator_images[j], e))
        return perm


def quotient_image(g: GroupElement, q: FiniteQuotient) -> tuple[int, ...]:
    if g.model.ngens != q.ngens:
        raise ModelMismatch(
            f"element of {g.model} has {g.model.ngens} generators, quotient has {q.ngens}"
        )
    return q.word_image(g.word())


def deck_transformation(q: FiniteQuotient, point: int) -> tuple[int, ...]:
    """Left multiplication by the quotient element sending 0 to ``point``.

    It commutes with every generator permutation, so it acts on reduced
    chain complexes by deck transformations.
    """
    words = q.transversal()
    inv = [perm_inverse(s) for s in q.generator_images]
    out = []
    for w in words:
        x = point
        for j, e in w:
            x = (q.generator_images[j] if e > 0 else inv[j])[x]
        out.append(x)
    return tuple(out)


@dataclass
class ValidationReport:
    ok: bool
    reason: str = ""
    size: int = 0

    def __bool__(self):
        return self.ok


def validate_quotient(q: FiniteQuotient) -> ValidationReport:
    m = q.order
    if m < 1:
        return ValidationReport(False, "order must be positive")
    for j, s in enumerate(q.generator_images):
        if sorted(s) != list(range(m)):
            return ValidationReport(False, f"generator g{j} is not a permutation of {m} points")
    gens = [np.asarray(s, dtype=np.int64) for s in q.generator_images]

    seen = np.zeros(m, dtype=bool)
    seen[0] = True
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = int(s[x])
                if not seen[y]:
                    seen[y] = True
                    nxt.append(y)
        frontier = nxt
    if not seen.all():
        return ValidationReport(False, "not transitive")

    ident = np.arange(m, dtype=np.int64)
    elements = {ident.tobytes()}
    queue = deque([ident])
    while queue:
        s = queue.popleft()
        for t in gens:
            u = t[s]
            key = u.tobytes()
            if key in elements:
                continue
            if np.any(u == ident):
                return ValidationReport(
                    False, "non-identity element fixes a point", len(elements) + 1
                )
            elements.add(key)
            if len(elements) > m:
                return ValidationReport(False, f"generated group has more than {m} elements", len(elements))
            queue.append(u)
    if len(elements) != m:
        return ValidationReport(False, f"generated group has {len(elements)} elements, expected {m}", len(elements))
    return ValidationReport(True, "", m)


# ---------------------------------------------------------------------------
# towers


@dataclass(frozen=True)
class Tower:
    """Finite quotients of increasing order.

    ``maps[i]`` sends the points of level ``i + 1`` onto those of level ``i``.
    """

    quotients: tuple[FiniteQuotient, ...]
    maps: tuple[tuple[int, ...], ...] | None = None
    p_step_refinement: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "quotients", tuple(self.quotients))
        if self.maps is not None:
            object.__setattr__(self, "maps", tuple(tuple(int(x) for x in f) for f in self.maps))

    @property
    def orders(self) -> list[int]:
        return [q.order for q in self.quotients]

    def __len__(self):
        return len(self.quotients)

    def __iter__(self):
        return iter(self.quotients)

    def __getitem__(self, i):
        return self.quotients[i]


def validate_tower(tower: Tower) -> ValidationReport:
    for i, q in enumerate(tower.quotients):
        rep = validate_quotient(q)
        if not rep:
            return ValidationReport(False, f"level {i + 1}: {rep.reason}")
    orders = tower.orders
    for i in range(len(orders) - 1):
        if orders[i + 1] <= orders[i]:
            return ValidationReport(False, f"level {i + 2}: orders must increase strictly")
    if tower.maps is None:
        return ValidationReport(True)
    if len(tower.maps) != len(orders) - 1:
        return ValidationReport(False, "need one compatibility map per consecutive pair of levels")
    for i, f in enumerate(tower.maps):
        lo, hi = tower.quotients[i], tower.quotients[i + 1]
        if hi.order % lo.order:
            return ValidationReport(False, f"level {i + 2}: order {hi.order} not divisible by {lo.order}")
        if len(f) != hi.order or f[0] != 0 or any(not 0 <= y < lo.order for y in f):
            return ValidationReport(False, f"map {i + 1}: malformed")
        for j, (s_hi, s_lo) in enumerate(zip(hi.generator_images, lo.generator_images)):
            if any(f[s_hi[x]] != s_lo[f[x]] for x in range(hi.order)):
                return ValidationReport(False, f"map {i + 1}: does not commute with generator g{j}")
    return ValidationReport(True)


def kernel_element_of_order_p(tower: Tower, level: int, p: int) -> tuple[int, ...]:
    """A deck transformation of order ``p`` at ``level`` (1-based) that lies in
    the kernel of the map to the previous level (or anywhere, at level 1)."""
    q = tower.quotients[level - 1]
    if level == 1:
        fiber = list(range(1, q.order))
    else:
        f = tower.maps[level - 2]
        fiber = [x for x in range(1, q.order) if f[x] == 0]
    for x in fiber:
        sigma = deck_transformation(q, x)
        n = perm_order(sigma)
        if n % p == 0:
            return perm_pow(sigma, n // p)
    raise ValueError(f"no element of order {p} in the kernel at level {level}")


def abelian_quotient(model: GroupModelSpec, moduli: Sequence[int], label: str = "") -> FiniteQuotient:
    """Abelianize and reduce generator ``j`` modulo ``moduli[j]``.

    Points are mixed-radix vectors, first coordinate fastest.
    """
    if model.kind == HEISENBERG:
        raise ValueError("abelian quotients of the Heisenberg group are not regular on Z^3 moduli")
    moduli = [int(n) for n in moduli]
    if len(moduli) != model.ngens or any(n < 1 for n in moduli):
        raise ValueError(f"need {model.ngens} positive moduli, got {moduli}")
    m = int(np.prod(moduli))
    points = np.arange(m)
    coords = []
    stride = 1
    for n in moduli:
        coords.append((points // stride) % n)
        stride *= n
    images = []
    stride = 1
    for j, n in enumerate(moduli):
        shifted = points + (((coords[j] + 1) % n) - coords[j]) * stride
        images.append(tuple(int(x) for x in shifted))
        stride *= n
    return FiniteQuotient(tuple(images), m, label or "x".join(f"Z/{n}" for n in moduli))


def abelian_reduction_map(moduli_hi: Sequence[int], moduli_lo: Sequence[int]) -> tuple[int, ...]:
    for a, b in zip(moduli_hi, moduli_lo):
        if a % b:
            raise ValueError(f"moduli {moduli_lo} do not divide {moduli_hi}")
    ranges = [range(n) for n in moduli_hi]
    out = []
    for v in itertools.product(*reversed(ranges)):
        v = v[::-1]
        idx, stride = 0, 1
        for x, n in zip(v, moduli_lo):
            idx += (x % n) * stride
            stride *= n
        out.append(idx)
    return tuple(out)


def heisenberg_quotient(n: int, label: str = "") -> FiniteQuotient:
    """H3(Z/n) acting on itself by right multiplication; point a + n*b + n^2*c."""
    m = n ** 3
    pts = np.arange(m)
    a, b, c = pts % n, (pts // n) % n, pts // (n * n)

    def index(a, b, c):
        return tuple(int(v) for v in (a % n) + n * (b % n) + n * n * (c % n))

    x = index(a + 1, b, c)
    y = index(a, b + 1, c + a)
    z = index(a, b, c + 1)
    return FiniteQuotient((x, y, z), m, label or f"H3(Z/{n})")


def heisenberg_reduction_map(n_hi: int, n_lo: int) -> tuple[int, ...]:
    pts = np.arange(n_hi ** 3)
    a, b, c = pts % n_hi, (pts // n_hi) % n_hi, pts // (n_hi * n_hi)
    return tuple(int(v) for v in (a % n_lo) + n_lo * (b % n_lo) + n_lo * n_lo * (c % n_lo))


def abelian_tower(model: GroupModelSpec, moduli_list: Sequence[Sequence[int]]) -> Tower:
    """Tower of abelian quotients; maps are attached when successive moduli divide."""
    qs = [abelian_quotient(model, mod) for mod in moduli_list]
    maps = []
    for lo, hi in zip(moduli_list, moduli_list[1:]):
        if any(a % b for a, b in zip(hi, lo)):
            maps = None
            break
        maps.append(abelian_reduction_map(hi, lo))
    return Tower(tuple(qs), None if maps is None else tuple(maps))


def make_builtin_tower(
    model: GroupModelSpec, family: str, depth: int, p: int, p_step_refinement: bool = False
) -> Tower:
    """Congruence towers of depth ``depth`` for prime ``p``.

    ``family`` is ``"abelian"`` (free abelian groups, and free groups through
    their abelianization) or ``"heisenberg"``.  Level ``k`` reduces modulo
    ``p^k``.  With ``p_step_refinement`` the abelian tower is refined so that
    consecutive indices differ by exactly ``p``.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if family == "abelian" and model.kind in (FREE, FREE_ABELIAN):
        n = model.ngens
        if p_step_refinement:
            moduli_list = []
            for k in range(depth):
                for j in range(n):
                    moduli_list.append([p ** (k + 1)] * (j + 1) + [p ** k] * (n - j - 1))
        else:
            moduli_list = [[p ** k] * n for k in range(1, depth + 1)]
        t = abelian_tower(model, moduli_list)
        return Tower(t.quotients, t.maps, p_step_refinement, {"family": family, "p": p, "depth": depth})
    if family == "heisenberg" and model.kind == HEISENBERG:
        if p_step_refinement:
            raise ValueError("p-step refinement is only available for the abelian family")
        qs = tuple(heisenberg_quotient(p ** k) for k in range(1, depth + 1))
        maps = tuple(heisenberg_reduction_map(p ** (k + 1), p ** k) for k in range(1, depth))
        return Tower(qs, maps, False, {"family": family, "p": p, "depth": depth})
    raise ValueError(f"family {family!r} is not available for the {model.kind} model")
