import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import assume, given, settings, strategies as st
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from freebound.boundary import (
    ClopenSet,
    act,
    basis_letter_of,
    complement,
    omega,
    push_forward,
    refine,
    theta_set,
)
from freebound.errors import InputError
from freebound.ktheory import (
    DiagonalKTheory,
    FGAbelianWithUnit,
    InvariantTriple,
    ck_matrix,
    connecting_divisors,
    k0_of_automorphism,
    k0_of_diagonal,
    k1_rank_of_diagonal,
    pair_iso,
    relation_matrix,
    skyscraper_invariant,
    tower_invariant,
    triple_iso,
)
from freebound.subgrp import cyclic_kernel, from_permutations
from freebound.supernat import SN
from freebound.words import (
    Conjugation,
    Inversion,
    Permutation,
    Transvection,
    alphabet,
    inverse_letters,
    mul_letters,
    power_letters,
    reduce_letters,
)


def sympy_group(graph):
    """Oracle: (free rank, torsion) of coker(I - A^t) from sympy's SNF."""
    rel = relation_matrix(graph)
    d = sympy_snf(sympy.Matrix(rel), domain=sympy.ZZ)
    diag = [abs(int(d[i, i])) for i in range(len(rel))]
    return diag.count(0), sorted(x for x in diag if x > 1)


def test_ck_matrix_shape():
    a = ck_matrix(cyclic_kernel(2, 1, 1))
    order = alphabet(2)
    assert a == [[0 if t == -s else 1 for t in order] for s in order]
    a = ck_matrix(cyclic_kernel(2, 1, 2))
    assert len(a) == 8 and all(sum(r) == 3 for r in a)
    assert all(sum(a[i][j] for i in range(8)) == 3 for j in range(8))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_boundary_k_theory(n):
    k0 = k0_of_diagonal(cyclic_kernel(n, 1, 1))
    torsion = [n - 1] if n > 2 else []
    assert (k0.free_rank, k0.torsion, k0.unit_order) == (n, torsion, n - 1)
    assert k1_rank_of_diagonal(cyclic_kernel(n, 1, 1)) == n


@pytest.mark.parametrize("n,k", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_cyclic_kernels(n, k):
    g = cyclic_kernel(n, 1, k)
    m = k * (n - 1) + 1
    k0 = k0_of_diagonal(g)
    assert (k0.free_rank, k0.torsion) == (m, [m - 1])
    assert k0.unit_order == n - 1
    assert k1_rank_of_diagonal(g) == m
    assert sympy_group(g) == (m, [m - 1])


@st.composite
def transitive_graphs(draw, max_n=3, max_index=4):
    n = draw(st.integers(2, max_n))
    size = draw(st.integers(1, max_index))
    perms = [draw(st.permutations(range(size))) for _ in range(n)]
    try:
        return from_permutations(n, perms)
    except InputError:
        assume(False)


@settings(max_examples=40, deadline=None)
@given(transitive_graphs())
def test_rank_formula_against_sympy(g):
    m = g.index * (g.n - 1) + 1
    free, torsion = sympy_group(g)
    k0 = k0_of_diagonal(g)
    assert (k0.free_rank, k0.torsion) == (free, torsion)
    assert free == m and torsion == ([m - 1] if m > 2 else [])
    assert k0.unit_order == g.n - 1


def test_class_generators_and_unit():
    g = cyclic_kernel(2, 1, 2)
    kt = DiagonalKTheory.of(g)
    for s in alphabet(2):
        for x in range(2):
            v = kt.class_of(omega(2, s), x)
            assert sum(v) == 1
    assert kt.class_over_all_cosets(ClopenSet.full(2)) == kt.unit_vector()
    with pytest.raises(InputError):
        kt.class_of(omega(2, 1), 2)


clopens = st.lists(st.lists(st.sampled_from([1, -1, 2, -2]), max_size=3), max_size=4).map(
    lambda ps: ClopenSet(2, frozenset(reduce_letters(p) for p in ps))
)


KT = DiagonalKTheory.of(cyclic_kernel(2, 1, 3))


@settings(max_examples=60, deadline=None)
@given(clopens, st.integers(0, 2), st.lists(st.sampled_from([1, -1, 2, -2]), max_size=4))
def test_class_refinement_twist_and_additivity(c, x, g):
    g = reduce_letters(g)
    ck = KT.cokernel
    v = KT.class_of(c, x)
    deeper = ClopenSet(2, frozenset(refine(c, c.depth + 1)))
    assert ck.equal(KT.class_of(deeper, x), v)
    # class(g.C, g.x) = class(C, x)
    assert ck.equal(KT.class_of(act(g, c), KT.graph.act_left(g, x)), v)
    total = [a + b for a, b in zip(v, KT.class_of(complement(c), x))]
    assert ck.equal(total, KT.class_of(ClopenSet.full(2), x))


@pytest.mark.parametrize("n,k", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_connecting_identities(n, k):
    g = cyclic_kernel(n, 1, k)
    kt = DiagonalKTheory.of(g)
    ck = kt.cokernel
    r = kt.class_of(ClopenSet.full(n), 0)

    def q(w):
        return kt.class_of(theta_set(g, basis_letter_of(g, w)), 0)

    for w in g.basis():
        assert ck.equal([a + b for a, b in zip(q(w), q(inverse_letters(w)))], r)
    assert ck.equal(kt.unit_vector(), [k * a for a in r])
    p_s = kt.class_over_all_cosets(omega(n, 1))
    shift = k * (k - 1) * (n - 1) // 2
    assert ck.equal(p_s, [k * a + shift * b for a, b in zip(q(power_letters((1,), k)), r)])
    for t in alphabet(n):
        if abs(t) == 1:
            continue
        total = [0] * kt.size
        for l in range(k):
            v = mul_letters(mul_letters(power_letters((1,), l), (t,)), power_letters((-1,), l))
            total = [a + b for a, b in zip(total, q(v))]
        assert ck.equal(kt.class_over_all_cosets(omega(n, t)), total)


def test_automorphism_examples():
    assert k0_of_automorphism([Transvection(1, 2)], 2) == [[1, -1, 0], [0, 1, 0], [0, 0, 0]]
    # conjugating by s_2 with power -1 moves [p_{s_2}] to [p_{s_2}] + [1]
    m = k0_of_automorphism([Conjugation(1, 2, -1)], 3)
    assert [row[1] for row in m] == [0, 1, 0, 1]
    assert k0_of_automorphism([], 3) == [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    m = k0_of_automorphism([Inversion(2)], 3)
    assert [row[1] for row in m] == [0, -1, 0, 1]


def test_conjugation_formula_matches_elementary_moves():
    for n in (2, 3, 4):
        for power in (-2, -1, 1, 3):
            mv = Conjugation(2, 1, power)
            assert k0_of_automorphism([mv], n) == k0_of_automorphism(mv.elementary(), n)


def test_automorphism_matches_push_forward():
    """The induced map agrees with the K_0 class of the pushed-forward clopen set."""
    rng = random.Random(11)
    for n in (2, 3, 4):
        kt = DiagonalKTheory.of(cyclic_kernel(n, 1, 1))
        pool = [Transvection(1, 2), Transvection(2, -1), Inversion(1), Inversion(2),
                Conjugation(1, 2, 1), Conjugation(2, 1, -2),
                Permutation(tuple(range(2, n + 1)) + (1,))]
        if n > 2:
            pool += [Transvection(3, -1), Conjugation(3, 2, 1)]
        gens = [kt.class_of(omega(n, i), 0) for i in range(1, n + 1)]
        for _ in range(30):
            moves = [rng.choice(pool) for _ in range(rng.randint(0, 3))]
            m = k0_of_automorphism(moves, n)
            for j in range(n):
                image = kt.class_of(push_forward(moves, omega(n, j + 1)), 0)
                predicted = [m[n][j]] * kt.size
                for i in range(n):
                    predicted = [a + m[i][j] * b for a, b in zip(predicted, gens[i])]
                assert kt.cokernel.equal(image, predicted), (moves, j)


def test_connecting_divisors():
    assert connecting_divisors(2, 2).divisors == [1, 2]
    assert connecting_divisors(3, 2).divisors == [1, 1, 2]
    assert connecting_divisors(2, 3).divisors == [1, 3]
    assert connecting_divisors(3, 3).divisors == [1, 1, 3]
    with pytest.raises(InputError):
        connecting_divisors(2, 1)


def test_pair_iso():
    a = FGAbelianWithUnit(2, [2], [0, 0], [1])
    b = FGAbelianWithUnit(2, [2], [0, 0], [1])
    c = FGAbelianWithUnit(2, [2], [0, 0], [0])
    assert pair_iso(a, b) and not pair_iso(a, c)
    with pytest.raises(InputError):
        pair_iso(FGAbelianWithUnit(1, [], [1], []), a)


def test_tower_invariant_examples():
    t = tower_invariant(3, [SN.parse("2^inf")])
    assert t.torsion == SN.parse("2^inf") and t.unit == Fraction(1, 2)
    assert (t.free_rank, t.k1_rank) == ("inf", "inf")
    assert tower_invariant(2, [SN.parse("2^inf")]).unit == 0
    t = tower_invariant(3, [SN.parse("2^inf"), SN.parse("3^inf")])
    assert t.torsion == SN.parse("2^inf*3^inf")
    with pytest.raises(InputError):
        tower_invariant(2, [SN.parse("2^inf")] * 3)
    with pytest.raises(InputError):
        tower_invariant(2, [SN.parse("6")])
    assert t.to_json()["unit"] == "1/2"


def test_skyscraper():
    t = tower_invariant(3, [SN.parse("2^inf")])
    assert skyscraper_invariant(t, 2).unit == 0
    assert skyscraper_invariant(t, 1) == t
    t4 = tower_invariant(4, [SN.parse("3^inf")])
    assert skyscraper_invariant(t4, 2).unit == Fraction(2, 3)


def test_triple_iso():
    a = tower_invariant(2, [SN.parse("2^inf*3"), SN.parse("5^inf")])
    b = tower_invariant(2, [SN.parse("2^inf"), SN.parse("3*5^inf")])
    assert triple_iso(a, b)
    c = tower_invariant(2, [SN.parse("2^inf"), SN.parse("5^inf")])
    assert not triple_iso(a, c)
    with pytest.raises(InputError):
        InvariantTriple((), 1, SN.parse("2^inf"), Fraction(1, 3), 1)
