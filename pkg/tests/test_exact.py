import random

import pytest
import sympy
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from towerlab.exact import (
    bareiss_det,
    bareiss_rank,
    charpoly,
    charpoly_interpolation,
    rank_mod_p,
    rational_rank,
    smith_normal_form,
)


def random_int_matrix(rng, rows, cols, lo=-3, hi=3, density=0.6):
    return [[rng.randint(lo, hi) if rng.random() < density else 0 for _ in range(cols)] for _ in range(rows)]


def low_rank_matrix(rng, rows, cols, rank):
    L = random_int_matrix(rng, rows, rank, density=1)
    R = random_int_matrix(rng, rank, cols, density=1)
    return [[sum(L[i][k] * R[k][j] for k in range(rank)) for j in range(cols)] for i in range(rows)]


def test_rational_rank_matches_bareiss():
    rng = random.Random(21)
    for _ in range(60):
        r, c = rng.randint(1, 8), rng.randint(1, 8)
        A = low_rank_matrix(rng, r, c, rng.randint(0, min(r, c))) if rng.random() < 0.5 else random_int_matrix(rng, r, c)
        assert rational_rank(A, random.Random(0)) == bareiss_rank(A) == sympy.Matrix(A).rank()


def test_rank_mod_p_against_dense_elimination():
    rng = random.Random(22)
    for _ in range(80):
        p = rng.choice([2, 3, 5])
        A = random_int_matrix(rng, rng.randint(1, 6), rng.randint(1, 6))
        assert rank_mod_p(A, p) == _rank_mod_p_oracle(A, p), (A, p)


def _rank_mod_p_oracle(A, p):
    M = [[x % p for x in row] for row in A]
    rank = 0
    cols = len(M[0]) if M else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(M)) if M[i][c]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][c], -1, p)
        M[rank] = [x * inv % p for x in M[rank]]
        for i in range(len(M)):
            if i != rank and M[i][c]:
                f = M[i][c]
                M[i] = [(x - f * y) % p for x, y in zip(M[i], M[rank])]
        rank += 1
    return rank


def test_rank_mod_p_detects_torsion():
    assert rank_mod_p([[2]], 2) == 0
    assert rational_rank([[2]]) == 1
    assert rank_mod_p({0: {0: 1, 1: 1}, 1: {0: 1, 1: 1}}, 7) == 1


def test_bareiss_det_matches_sympy():
    rng = random.Random(23)
    for _ in range(40):
        n = rng.randint(1, 6)
        A = random_int_matrix(rng, n, n, -5, 5)
        assert bareiss_det(A) == sympy.Matrix(A).det()


def test_smith_normal_form_matches_sympy():
    rng = random.Random(24)
    for _ in range(50):
        r, c = rng.randint(1, 6), rng.randint(1, 6)
        A = random_int_matrix(rng, r, c, -6, 6)
        D = sympy_snf(sympy.Matrix(A), domain=sympy.ZZ)
        expected = [abs(int(D[i, i])) for i in range(min(r, c)) if D[i, i] != 0]
        assert smith_normal_form(A) == sorted(expected, key=lambda d: (d != 1, d)), A


def test_smith_normal_form_examples():
    assert smith_normal_form([[2, 0], [0, 3]]) == [1, 6]
    assert smith_normal_form([[2, 4], [6, 8]]) == [2, 4]
    assert smith_normal_form([[0, 0]]) == []


def test_charpoly_two_routes_agree():
    rng = random.Random(25)
    for case in range(50):
        n = rng.randint(1, 7)
        A = random_int_matrix(rng, n, n, -4, 4)
        if case % 3 == 0:
            A = [[A[i][j] + A[j][i] for j in range(n)] for i in range(n)]
        got = charpoly(A)
        assert got == charpoly_interpolation(A)
        x = sympy.symbols("x")
        expected = sympy.Poly(sympy.Matrix(A).charpoly(x).as_expr(), x).all_coeffs()[::-1]
        assert got == [int(c) for c in expected]


def test_charpoly_large_entries():
    A = [[10**12, 1], [1, -(10**12)]]
    assert charpoly(A) == [-(10**24) - 1, 0, 1]


@pytest.mark.parametrize("n", [0, 1])
def test_charpoly_small(n):
    A = [[5]] if n else []
    assert charpoly(A) == ([-5, 1] if n else [1])
