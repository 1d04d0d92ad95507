import random
from fractions import Fraction

import pytest

from towerlab.complexes import circle, complex_laplacian, lls_example, torus, wedge_of_circles
from towerlab.groupring import GF, QQ, ZZ, GroupRingElement, GroupRingMatrix
from towerlab.groups import (
    FREE,
    FREE_ABELIAN,
    GroupModelSpec,
    abelian_quotient,
    heisenberg_quotient,
    make_builtin_tower,
)
from towerlab.reduction import betti, betti_table, finite_trace, reduce_matrix, torsion_counts


def graph_betti(q, d):
    """Betti numbers of the covering graph by union-find: vertices are the
    points, each generator contributes the edges x -- g(x)."""
    parent = list(range(q.order))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for s in q.generator_images:
        for x in range(q.order):
            parent[find(x)] = find(s[x])
    components = len({find(x) for x in range(q.order)})
    return [components, d * q.order - q.order + components]


def test_reduce_circle_boundary():
    q = abelian_quotient(GroupModelSpec(FREE_ABELIAN, 1), [3])
    flat = reduce_matrix(circle().boundaries[1], q)
    assert flat.to_lists() == [[-1, 1, 0], [0, -1, 1], [1, 0, -1]]
    assert flat.rank() == 2
    assert reduce_matrix(circle().boundaries[1], q, GF(2)).ring == GF(2)
    with pytest.raises(ValueError):
        reduce_matrix(GroupRingMatrix(circle().model, GF(2), [[1]]), q, QQ)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_wedge_betti_matches_covering_graph(d):
    C = wedge_of_circles(d)
    model = GroupModelSpec(FREE, d)
    for moduli in ([2] * d, [3] * d, [4] + [1] * (d - 1), [2, 3, 5][:d]):
        q = abelian_quotient(model, moduli)
        expected = graph_betti(q, d)
        assert betti(C, q, QQ) == expected
        assert betti(C, q, GF(2)) == expected


def test_torus_betti_at_every_level():
    T = torus(2)
    tower = make_builtin_tower(T.model, "abelian", 3, 2)
    for q in tower:
        assert betti(T, q, QQ) == [1, 2, 1]
        assert betti(T, q, GF(2)) == [1, 2, 1]
        assert betti(T, q, GF(3)) == [1, 2, 1]
    assert betti(torus(3), abelian_quotient(GroupModelSpec(FREE_ABELIAN, 3), [2, 2, 2]), QQ) == [1, 3, 3, 1]


def test_lls_mod_p_versus_rational():
    C = lls_example(2, 2)
    for k in range(1, 5):
        q = abelian_quotient(C.model, [2**k])
        m = q.order
        assert betti(C, q, QQ) == [1, 1, 0, 0]
        assert betti(C, q, GF(2)) == [1, 1, m, m]
        assert betti(C, q, GF(3)) == [1, 1, 0, 0]
        assert torsion_counts(C, q, 2) == [0, 0, m, 0]


def test_universal_coefficients_on_random_quotients():
    for C in (torus(2), lls_example(2, 2), lls_example(2, 3), wedge_of_circles(2)):
        for moduli in ([2] * C.model.ngens, [6] * C.model.ngens):
            q = abelian_quotient(C.model, moduli)
            rat = betti(C, q, QQ)
            for p in (2, 3):
                t = torsion_counts(C, q, p)
                modp = betti(C, q, GF(p))
                assert modp == [rat[k] + t[k] + (t[k - 1] if k else 0) for k in range(len(rat))]


def test_euler_characteristic_is_multiplicative():
    rng = random.Random(3)
    for C in (torus(2), wedge_of_circles(3), lls_example(2, 2)):
        q = abelian_quotient(C.model, [rng.choice([2, 3, 4]) for _ in range(C.model.ngens)])
        for field in (QQ, GF(2), GF(5)):
            b = betti(C, q, field)
            assert sum((-1) ** k * x for k, x in enumerate(b)) == C.euler_characteristic() * q.order


def test_finite_trace_two_ways():
    rng = random.Random(5)
    H = GroupModelSpec("heisenberg")
    for model, q in ((H, heisenberg_quotient(2)), (GroupModelSpec(FREE, 2), abelian_quotient(GroupModelSpec(FREE, 2), [2, 3]))):
        for _ in range(20):
            terms = []
            for _ in range(4):
                word = [(rng.randrange(model.ngens), rng.choice([-2, -1, 1, 2])) for _ in range(rng.randrange(4))]
                terms.append((model.from_word(word), rng.randint(-3, 3)))
            A = GroupRingMatrix(model, ZZ, [[GroupRingElement(model, ZZ, terms)]])
            flat, kernel = finite_trace(A, q)
            assert flat == kernel


def test_laplacian_kernel_is_betti():
    T = torus(2)
    q = abelian_quotient(T.model, [2, 4])
    b = betti(T, q, QQ)
    for k in range(3):
        flat = reduce_matrix(complex_laplacian(T, k), q)
        assert flat.is_symmetric()
        assert flat.rows - flat.rank() == b[k]


def test_betti_table_normalized_columns():
    C = wedge_of_circles(2)
    tower = make_builtin_tower(C.model, "abelian", 3, 2)
    table = betti_table(C, tower, primes=(2, 3))
    assert table.normalized_column(1) == [Fraction(5, 4), Fraction(17, 16), Fraction(65, 64)]
    assert table.column(1, 3) == [5, 17, 65]
    assert table.levels[0].normalized() == [Fraction(1, 4), Fraction(5, 4)]
