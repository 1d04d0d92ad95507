"""Exact linear algebra on sparse integer matrices.

Sparse matrices are ``dict[row, dict[col, value]]``.  Everything here is exact:
ranks over prime fields by sparse elimination, ranks over Q by agreement of
two random primes above 2**60 (with a fraction-free Bareiss oracle), Smith
normal forms by unimodular sparse elimination, and characteristic polynomials
by multimodular Hessenberg reduction (with a determinant-interpolation
oracle).
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Sequence

import numpy as np
import sympy

Sparse = Mapping[int, Mapping[int, int]]


def _rows_of(M) -> Iterable[Mapping[int, int]]:
    if isinstance(M, Mapping):
        return M.values()
    return (row if isinstance(row, Mapping) else {j: v for j, v in enumerate(row) if v} for row in M)


def rank_mod_p(M, p: int) -> int:
    """Rank over F_p by row insertion into an echelon basis."""
    pivots: dict[int, dict[int, int]] = {}
    for row in _rows_of(M):
        r = {j: int(v) % p for j, v in row.items() if v % p}
        while r:
            c = min(r)
            piv = pivots.get(c)
            if piv is None:
                inv = pow(r[c], -1, p)
                pivots[c] = {j: v * inv % p for j, v in r.items()}
                break
            f = r[c]
            for j, v in piv.items():
                w = (r.get(j, 0) - f * v) % p
                if w:
                    r[j] = w
                else:
                    r.pop(j, None)
    return len(pivots)


def random_large_primes(rng: random.Random, count: int = 2, bits: int = 61) -> list[int]:
    out: list[int] = []
    while len(out) < count:
        q = sympy.nextprime(rng.randrange(2**bits, 2 ** (bits + 1)))
        if q not in out:
            out.append(int(q))
    return out


def rational_rank(M, rng: random.Random | None = None) -> int:
    """Rank over Q of an integer matrix.

    Computed modulo two random primes > 2**60.  Since ``rank_p <= rank_Q``
    with equality for all but finitely many ``p``, two agreeing primes are
    accepted; on disagreement further primes are drawn until the largest
    value seen is confirmed by a second prime.
    """
    rng = rng or random.Random(0)
    if isinstance(M, Mapping):
        rows = list(M.values())
    else:
        rows = list(_rows_of(M))
    ranks = [rank_mod_p(rows, p) for p in random_large_primes(rng, 2)]
    while True:
        best = max(ranks)
        if ranks.count(best) >= 2:
            return best
        ranks.append(rank_mod_p(rows, random_large_primes(rng, 1)[0]))


def to_dense(M: Sparse, nrows: int, ncols: int) -> list[list[int]]:
    out = [[0] * ncols for _ in range(nrows)]
    for i, row in M.items():
        for j, v in row.items():
            out[i][j] = v
    return out


def bareiss_rank(A: Sequence[Sequence]) -> int:
    """Exact rank by fraction-free elimination (slow reference path)."""
    M = [[Fraction(x) for x in row] for row in A]
    if M and any(x.denominator != 1 for row in M for x in row):
        lcm = 1
        for row in M:
            for x in row:
                lcm = lcm * x.denominator // gcd(lcm, x.denominator)
        M = [[int(x * lcm) for x in row] for row in M]
    else:
        M = [[int(x) for x in row] for row in M]
    nrows = len(M)
    ncols = len(M[0]) if M else 0
    rank, prev = 0, 1
    for c in range(ncols):
        piv = next((i for i in range(rank, nrows) if M[i][c]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for i in range(rank + 1, nrows):
            for j in range(c + 1, ncols):
                M[i][j] = (M[rank][c] * M[i][j] - M[i][c] * M[rank][j]) // prev
            M[i][c] = 0
        prev = M[rank][c]
        rank += 1
        if rank == nrows:
            break
    return rank


def bareiss_det(A: Sequence[Sequence[int]]) -> int:
    M = [[int(x) for x in row] for row in A]
    n = len(M)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k]), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


# ---------------------------------------------------------------------------
# Smith normal form


def _normalize_divisors(diag: list[int]) -> list[int]:
    """Turn a diagonal into its divisibility chain via (gcd, lcm) exchanges."""
    ones = [d for d in diag if d == 1]
    rest = [d for d in diag if d != 1]
    for i in range(len(rest)):
        for j in range(i + 1, len(rest)):
            a, b = rest[i], rest[j]
            g = gcd(a, b)
            rest[i], rest[j] = g, a // g * b
    return ones + sorted(rest)


def smith_normal_form(M: Sparse | Sequence[Sequence[int]]) -> list[int]:
    """Nonzero elementary divisors ``d_1 | d_2 | ...`` of an integer matrix."""
    rows: dict[int, dict[int, int]] = {}
    for i, row in enumerate(_rows_of(M)):
        r = {j: int(v) for j, v in row.items() if v}
        if r:
            rows[i] = r
    cols: dict[int, set[int]] = {}
    for i, r in rows.items():
        for j in r:
            cols.setdefault(j, set()).add(i)

    def set_entry(i, j, v):
        r = rows[i]
        if v:
            r[j] = v
            cols.setdefault(j, set()).add(i)
        else:
            r.pop(j, None)
            s = cols.get(j)
            if s is not None:
                s.discard(i)
                if not s:
                    del cols[j]

    def eliminate(pi, pj):
        """Pivot divides its row and column: clear both, drop them."""
        d = rows[pi][pj]
        prow = rows[pi]
        for i in list(cols[pj]):
            if i == pi:
                continue
            f = rows[i][pj] // d
            for j, v in prow.items():
                set_entry(i, j, rows[i].get(j, 0) - f * v)
            if not rows[i]:
                del rows[i]
        for j in list(prow):
            s = cols[j]
            s.discard(pi)
            if not s:
                del cols[j]
        del rows[pi]
        return abs(d)

    divisors: list[int] = []
    # Unit pivots first: they contribute 1 and keep the matrix sparse.
    work = sorted(rows)
    while work:
        nxt = set()
        for i in work:
            r = rows.get(i)
            if not r:
                continue
            units = [j for j, v in r.items() if v in (1, -1)]
            if not units:
                continue
            j = min(units, key=lambda c: (len(cols[c]), c))
            touched = cols[j] - {i}
            divisors.append(eliminate(i, j))
            nxt |= touched
        work = sorted(nxt)

    while rows:
        i, j = min(
            ((i, j) for i, r in rows.items() for j in r),
            key=lambda ij: (abs(rows[ij[0]][ij[1]]), len(rows[ij[0]]) + len(cols[ij[1]]), ij),
        )
        d = rows[i][j]
        bad_row = next((k for k in sorted(cols[j]) if rows[k][j] % d), None)
        if bad_row is not None:
            f = rows[bad_row][j] // d
            for c, v in list(rows[i].items()):
                set_entry(bad_row, c, rows[bad_row].get(c, 0) - f * v)
            if not rows[bad_row]:
                del rows[bad_row]
            continue
        bad_col = next((c for c in sorted(rows[i]) if rows[i][c] % d), None)
        if bad_col is not None:
            f = rows[i][bad_col] // d
            for k in list(cols[j]):
                set_entry(k, bad_col, rows[k].get(bad_col, 0) - f * rows[k][j])
                if not rows[k]:
                    del rows[k]
            continue
        divisors.append(eliminate(i, j))
    return _normalize_divisors(divisors)


# ---------------------------------------------------------------------------
# characteristic polynomials

_SMALL_PRIME_CEILING = 2**24


def _hessenberg_charpoly_mod(A: np.ndarray, p: int) -> np.ndarray:
    """Coefficients (constant term first) of det(xI - A) over F_p."""
    H = A % p
    n = H.shape[0]
    for j in range(n - 2):
        nz = np.nonzero(H[j + 1 :, j])[0]
        if nz.size == 0:
            continue
        piv = j + 1 + nz[0]
        if piv != j + 1:
            H[[j + 1, piv], :] = H[[piv, j + 1], :]
            H[:, [j + 1, piv]] = H[:, [piv, j + 1]]
        inv = pow(int(H[j + 1, j]), -1, p)
        u = H[j + 2 :, j] * inv % p
        if not u.any():
            continue
        H[j + 2 :, :] = (H[j + 2 :, :] - np.outer(u, H[j + 1, :]) % p) % p
        H[:, j + 1] = (H[:, j + 1] + H[:, j + 2 :] @ u) % p
    P = [np.zeros(n + 1, dtype=np.int64)]
    P[0][0] = 1
    for k in range(1, n + 1):
        shifted = np.roll(P[k - 1], 1)
        shifted[0] = 0
        acc = (shifted - H[k - 1, k - 1] * P[k - 1]) % p
        prod = 1
        for i in range(k - 1, 0, -1):
            prod = prod * int(H[i, i - 1]) % p
            if prod == 0:
                break
            term = int(H[i - 1, k - 1]) * prod % p
            if term:
                acc = (acc - term * P[i - 1]) % p
        P.append(acc)
    return P[n]


def _coefficient_bound_bits(A: Sequence[Sequence[int]]) -> int:
    n = len(A)
    r2 = max([1] + [sum(int(x) * int(x) for x in row) for row in A])
    # every coefficient is a sum of at most 2^n principal minors, each at
    # most R^n by Hadamard
    return n + (n * r2.bit_length() + 1) // 2 + 2


def charpoly(A: Sequence[Sequence[int]]) -> list[int]:
    """Exact integer coefficients of det(xI - A), constant term first."""
    n = len(A)
    if n == 0:
        return [1]
    dense = np.array([[int(x) for x in row] for row in A], dtype=object)
    need = _coefficient_bound_bits(A) + 1
    residues, moduli = [], []
    bits = 0.0
    q = _SMALL_PRIME_CEILING
    while bits < need:
        q = int(sympy.prevprime(q))
        residues.append(_hessenberg_charpoly_mod((dense % q).astype(np.int64), q))
        moduli.append(q)
        bits += math.log2(q)
    modulus = math.prod(moduli)
    coeffs = []
    for k in range(n + 1):
        x = 0
        for r, m in zip(residues, moduli):
            mm = modulus // m
            x += int(r[k]) * mm * pow(mm, -1, m)
        x %= modulus
        if x > modulus // 2:
            x -= modulus
        coeffs.append(x)
    return coeffs


def charpoly_interpolation(A: Sequence[Sequence[int]]) -> list[int]:
    """Reference path: exact determinants at x = 0..n, Newton interpolation."""
    n = len(A)
    xs = list(range(n + 1))
    ys = [
        Fraction(bareiss_det([[(x if i == j else 0) - int(A[i][j]) for j in range(n)] for i in range(n)]))
        for x in xs
    ]
    coef = list(ys)
    for level in range(1, n + 1):
        for i in range(n, level - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - level])
    poly = [Fraction(0)] * (n + 1)
    for k in range(n, -1, -1):
        # poly = poly * (x - xs[k]) + coef[k]
        new = [Fraction(0)] * (n + 1)
        for d in range(n):
            new[d + 1] += poly[d]
        for d in range(n + 1):
            new[d] -= xs[k] * poly[d]
        new[0] += coef[k]
        poly = new
    if any(c.denominator != 1 for c in poly):
        raise ArithmeticError("interpolated characteristic polynomial is not integral")
    return [int(c) for c in poly]
