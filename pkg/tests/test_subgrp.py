
import pytest
from hypothesis import given, settings, strategies as st

from freebound.errors import InputError, ResourceCapError
from freebound.subgrp import (
    SchreierGraph,
    abelian_quotient_graph,
    cyclic_kernel,
    evaluate_basis_word,
    from_permutations,
    generates_graph_subgroup,
    mod_q_abelian_kernel,
    rewrite_in_basis,
    schreier_basis,
    stallings_fold,
)
from freebound.words import parse, reduce_letters, reduced_words, render


def basis_set(g):
    return {render(w) for w in g.basis()}


def same_subgroup(g, h):
    return g.index == h.index and generates_graph_subgroup(g.basis(), h)


def test_from_permutations_examples():
    g = from_permutations(2, [[1, 0], [0, 1]])
    assert g.index == 2 and g.rank == 3
    g = from_permutations(2, [[0], [0]])
    assert g.index == 1 and basis_set(g) == {"a", "b"}
    g = from_permutations(2, [[1, 2, 0], [1, 2, 0]])
    assert g.index == 3 and g.rank == 4


def test_non_transitive_lists_orbit():
    with pytest.raises(InputError, match=r"\[0, 1\]"):
        from_permutations(2, [[1, 0, 2], [0, 1, 2]])
    with pytest.raises(InputError):
        from_permutations(2, [[0, 0], [0, 1]])


def test_cyclic_kernel_examples():
    assert basis_set(cyclic_kernel(2, 1, 2)) == {"aa", "b", "abA"}
    assert cyclic_kernel(2, 1, 1).index == 1
    assert basis_set(cyclic_kernel(3, 1, 2)) == {"aa", "b", "abA", "c", "acA"}


def test_transversal_reaches_vertex():
    g = from_permutations(3, [[1, 2, 0, 4, 3], [3, 1, 2, 0, 4], [0, 2, 1, 3, 4]])
    for v, t in enumerate(g.transversal):
        assert g.walk(0, t) == v
    assert g.transversal[0] == ()


def test_mod_q_kernel_examples():
    whole = cyclic_kernel(2, 1, 1)
    k2 = mod_q_abelian_kernel(whole, 2)
    assert (k2.index, k2.rank) == (4, 5)
    k3 = mod_q_abelian_kernel(whole, 3)
    assert (k3.index, k3.rank) == (9, 10)
    # oracle: the kernel of F_2 -> Z_3^2 built by direct coset enumeration
    assert same_subgroup(k3, abelian_quotient_graph(2, [3, 3]))
    assert same_subgroup(k2, abelian_quotient_graph(2, [2, 2]))
    with pytest.raises(ResourceCapError):
        mod_q_abelian_kernel(whole, 3, cap=8)
    with pytest.raises(InputError):
        mod_q_abelian_kernel(whole, 4)


def test_rank_one_ambient_rejected():
    with pytest.raises(InputError):
        SchreierGraph(1, ((0,),))


def test_mod_q_kernel_of_a_subgroup_multiplies_index():
    g = cyclic_kernel(2, 1, 2)
    k = mod_q_abelian_kernel(g, 2)
    assert k.index == 2 * 2**3
    assert all(g.contains(w) for w in k.basis())


def test_rewrite_examples():
    g = cyclic_kernel(2, 1, 2)
    basis = [render(w) for w in g.basis()]
    aa = basis.index("aa") + 1
    assert rewrite_in_basis(g, parse("aa")) == (aa,)
    assert rewrite_in_basis(g, parse("a")) is None
    aba, b = basis.index("abA") + 1, basis.index("b") + 1
    assert rewrite_in_basis(g, parse("abAb")) == (aba, b)


def test_abelian_quotient_single_coordinate_matches_cyclic_kernel():
    for n, k in ((2, 4), (3, 3)):
        assert abelian_quotient_graph(n, [k]) == cyclic_kernel(n, 1, k)


def test_stallings_fold_recognises_bases():
    assert stallings_fold([parse("aa"), parse("b"), parse("abA")], 2).betti == 3
    # {ab, ba, a} generates F_2 but is not a basis
    assert stallings_fold([parse("ab"), parse("ba"), parse("a")], 2).betti == 2
    assert schreier_basis(cyclic_kernel(3, 2, 3)).verified


def test_json_roundtrip():
    g = from_permutations(2, [[1, 2, 0], [0, 2, 1]])
    assert SchreierGraph.from_json(g.to_json()) == g
    with pytest.raises(InputError):
        SchreierGraph.from_json({"n": 2, "edges": [[0, 0]], "tree": [[0, 1]]})


# --- properties ----------------------------------------------------------------


@st.composite
def transitive_actions(draw, max_points=7, max_rank=3):
    n = draw(st.integers(2, max_rank))
    size = draw(st.integers(1, max_points))
    while True:
        perms = [draw(st.permutations(list(range(size)))) for _ in range(n)]
        try:
            return from_permutations(n, perms)
        except InputError:
            continue


@settings(max_examples=150, deadline=None)
@given(transitive_actions())
def test_schreier_rank_formula(g):
    assert g.rank == g.index * (g.n - 1) + 1
    basis = g.basis()
    assert all(g.contains(w) for w in basis)
    b = schreier_basis(g)
    assert b.verified
    assert generates_graph_subgroup(basis, g)


@settings(max_examples=100, deadline=None)
@given(transitive_actions(max_points=5), st.data())
def test_rewrite_roundtrip(g, data):
    # words in the subgroup: products of random basis elements
    basis = g.basis()
    picks = data.draw(st.lists(st.integers(1, len(basis)).flatmap(
        lambda i: st.sampled_from([i, -i])), max_size=6))
    w = evaluate_basis_word(g, picks)
    u = rewrite_in_basis(g, w)
    assert u == reduce_letters(picks)
    assert evaluate_basis_word(g, u) == w
    assert reduce_letters(u) == u


def test_rewrite_detects_non_members():
    g = from_permutations(2, [[1, 2, 0], [0, 2, 1]])
    for L in range(4):
        for w in reduced_words(2, L):
            u = rewrite_in_basis(g, w)
            assert (u is None) == (not g.contains(w))
            if u is not None:
                assert evaluate_basis_word(g, u) == w
