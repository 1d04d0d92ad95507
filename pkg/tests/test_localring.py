import itertools
import random
from fractions import Fraction

import numpy as np
import pytest

from towerlab.complexes import circle, lls_example, torus
from towerlab.exact import rank_mod_p
from towerlab.groupring import GF
from towerlab.groups import FREE_ABELIAN, GroupModelSpec, abelian_tower, kernel_element_of_order_p, make_builtin_tower
from towerlab.localring import (
    LocalDiagonalForm,
    LocalRingElement,
    as_local_matrix,
    check_diagonal_form,
    is_invertible,
    dims_from_exponents,
    local_diagonalize,
    local_dims,
    local_exponents,
    local_identity,
    local_matmul,
    monotone_harness,
    regroup_as_local,
)
from towerlab.reduction import reduce_matrix

CASES = [(p, n) for p in (2, 3, 5) for n in (2, 3)]


def random_local_matrix(rng, p, rows, cols):
    M = np.zeros((rows, cols, p), dtype=np.int64)
    for i in range(rows):
        for j in range(cols):
            v = rng.randrange(p + 1)
            for k in range(v, p):
                M[i, j, k] = rng.randrange(p)
            if v < p:
                M[i, j, v] = rng.randrange(1, p)
    return M


def random_invertible(rng, p, n):
    while True:
        U = np.array([[[rng.randrange(p) for _ in range(p)] for _ in range(n)] for _ in range(n)], dtype=np.int64)
        if is_invertible(U, p):
            return U


def poly_mul(a, b, p):
    out = [0] * p
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            if i + j < p:
                out[i + j] = (out[i + j] + x * y) % p
    return tuple(out)


def brute_force_dims(M, p):
    """|image| and |kernel| of v -> v M by enumerating all of R^rows."""
    rows, cols = M.shape[:2]
    elements = list(itertools.product(range(p), repeat=p))
    images = set()
    kernel = 0
    for v in itertools.product(elements, repeat=rows):
        w = []
        for j in range(cols):
            acc = (0,) * p
            for i in range(rows):
                prod = poly_mul(v[i], tuple(M[i, j]), p)
                acc = tuple((x + y) % p for x, y in zip(acc, prod))
            w.append(acc)
        w = tuple(w)
        images.add(w)
        kernel += not any(any(c) for c in w)
    return round(np.log(len(images)) / np.log(p)), round(np.log(kernel) / np.log(p))


def test_local_ring_element_arithmetic():
    p = 3
    tau = LocalRingElement.tau_power(p, 1)
    one = LocalRingElement.tau_power(p, 0)
    assert (tau * tau * tau).is_zero()
    u = one + tau
    assert (u * u.inverse()) == one
    k, unit = (tau * tau * u).factor()
    assert k == 2 and unit.is_unit()
    assert (LocalRingElement.tau_power(p, k) * unit) == tau * tau * u
    with pytest.raises(ZeroDivisionError):
        tau.inverse()


def test_diagonalize_examples():
    p = 2
    M = as_local_matrix([[(0, 1), 1], [0, (0, 1)]], p)
    form = local_diagonalize(M, p)
    assert form.exponents == [0, 2]
    assert check_diagonal_form(M, form)
    dims = local_dims(form)
    assert (dims.im_dim, dims.ker_dim, dims.bar_im_dim, dims.bar_ker_dim) == (2, 2, 1, 1)
    assert local_diagonalize(local_identity(3, 5), 5).exponents == [0, 0, 0]
    D = as_local_matrix([[(0, 1, 0), 0], [0, (0, 0, 1)]], 3)
    form = local_diagonalize(D, 3)
    assert form.exponents == [1, 2]
    assert (local_dims(form).im_dim, local_dims(form).ker_dim) == (3, 3)
    zero = np.zeros((2, 3, 3), dtype=np.int64)
    assert local_diagonalize(zero, 3).exponents == [3, 3]


def test_dims_match_brute_force_enumeration():
    rng = random.Random(31)
    for p in (2, 3):
        for _ in range(6 if p == 3 else 20):
            M = random_local_matrix(rng, p, 2, 2)
            dims = local_dims(local_diagonalize(M, p))
            assert brute_force_dims(M, p) == (dims.im_dim, dims.ker_dim)


def test_dims_match_flat_rank():
    rng = random.Random(32)
    for p, n in CASES:
        for _ in range(10):
            M = random_local_matrix(rng, p, n, n + 1)
            # flatten with basis 1, tau, .., tau^(p-1): row (i, a) is tau^a e_i M
            flat = []
            for i in range(n):
                for a in range(p):
                    row = []
                    for j in range(n + 1):
                        shifted = [0] * a + list(M[i, j, : p - a])
                        row.extend(shifted)
                    flat.append(row)
            assert rank_mod_p(flat, p) == local_dims(local_diagonalize(M, p)).im_dim


@pytest.mark.parametrize("p,n", CASES)
def test_seeded_diagonalization_and_inequalities(p, n):
    rng = random.Random(1000 * p + n)
    for _ in range(100):
        M = random_local_matrix(rng, p, n, n)
        form = local_diagonalize(M, p)
        assert check_diagonal_form(M, form)
        dims = local_dims(form)
        assert dims.im_dim >= p * dims.bar_im_dim
        assert dims.ker_dim <= p * dims.bar_ker_dim
        P, Q = random_invertible(rng, p, n), random_invertible(rng, p, n)
        moved = local_matmul(local_matmul(P, M, p), Q, p)
        assert local_diagonalize(moved, p).exponents == form.exponents


def test_check_diagonal_form_rejects_wrong_data():
    p = 2
    M = as_local_matrix([[(0, 1), 1], [0, (0, 1)]], p)
    form = local_diagonalize(M, p)
    bad = LocalDiagonalForm(p, [0, 1], form.U, form.V, form.D, form.shape)
    assert not check_diagonal_form(M, bad)


def test_regroup_circle():
    C = circle()
    tower = abelian_tower(C.model, [[2]])
    sigma = kernel_element_of_order_p(tower, 1, 2)
    flat = reduce_matrix(C.boundaries[1], tower[0], GF(2))
    R = regroup_as_local(flat, 2, sigma, 2)
    assert R.tolist() == [[[0, 1]]]
    assert local_diagonalize(R, 2).exponents == [1]
    assert flat.rank() == local_dims(local_diagonalize(R, 2)).im_dim == 1


def test_regroup_torus_matches_flat_ranks():
    T = torus(2)
    tower = make_builtin_tower(T.model, "abelian", 2, 2)
    sigma = kernel_element_of_order_p(tower, 2, 2)
    q = tower[1]
    for k in (1, 2):
        flat = reduce_matrix(T.boundaries[k], q, GF(2))
        R = regroup_as_local(flat, q.order, sigma, 2)
        assert flat.rank() == local_dims(local_diagonalize(R, 2)).im_dim


def test_regroup_rejects_bad_sigma():
    C = circle()
    tower = abelian_tower(C.model, [[4]])
    flat = reduce_matrix(C.boundaries[1], tower[0], GF(2))
    with pytest.raises(ValueError):
        regroup_as_local(flat, 4, (0, 1, 3, 2), 2)
    with pytest.raises(ValueError):
        regroup_as_local(flat, 4, (1, 2, 3, 0), 2)


def test_harness_examples():
    rep = monotone_harness(torus(2), make_builtin_tower(torus(2).model, "abelian", 3, 2), 1, 2)
    assert [r.normalized for r in rep.rows] == [Fraction(2, 4), Fraction(2, 16), Fraction(2, 64)]
    assert rep.ok
    C = lls_example(2, 2)
    rep = monotone_harness(C, make_builtin_tower(C.model, "abelian", 3, 2), 2, 2)
    assert [r.normalized for r in rep.rows] == [1, 1, 1] and rep.ok
    assert all(r.local_check for r in rep.rows[1:])
    rep = monotone_harness(circle(), make_builtin_tower(circle().model, "abelian", 3, 3), 1, 3)
    assert [r.normalized for r in rep.rows] == [Fraction(1, 3), Fraction(1, 9), Fraction(1, 27)]


def test_harness_refined_torus_runs_local_checks():
    T = torus(2)
    tower = make_builtin_tower(T.model, "abelian", 2, 2, p_step_refinement=True)
    for q in range(3):
        rep = monotone_harness(T, tower, q, 2)
        assert rep.ok
        assert all(r.local_check for r in rep.rows[1:])


def test_harness_rejects_non_p_power_steps():
    model = GroupModelSpec(FREE_ABELIAN, 1)
    tower = abelian_tower(model, [[2], [6]])
    with pytest.raises(ValueError):
        monotone_harness(circle(), tower, 1, 2)


def test_sparse_exponents_match_dense_diagonalization():
    rng = random.Random(33)
    for p, n in CASES:
        for _ in range(50):
            M = random_local_matrix(rng, p, n, rng.randint(1, n + 2))
            assert local_exponents(M, p) == local_diagonalize(M, p).exponents
    T = torus(2)
    tower = make_builtin_tower(T.model, "abelian", 3, 2, p_step_refinement=True)
    for level in (1, 2):
        sigma = kernel_element_of_order_p(tower, level + 1, 2)
        q = tower[level]
        for k in (1, 2):
            R = regroup_as_local(reduce_matrix(T.boundaries[k], q, GF(2)), q.order, sigma, 2)
            exps = local_exponents(R, 2)
            assert exps == local_diagonalize(R, 2).exponents
            assert dims_from_exponents(exps, R.shape[0], 2) == local_dims(local_diagonalize(R, 2))
