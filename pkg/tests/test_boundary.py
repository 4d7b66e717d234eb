import random

import pytest
from hypothesis import given, settings, strategies as st

from freebound.boundary import (
    ClopenSet,
    EventuallyPeriodicPoint,
    PreconditionError,
    act,
    act_point,
    basis_letter_of,
    complement,
    contraction_exponent,
    difference,
    fixed_points,
    intersect,
    is_subset,
    member,
    omega,
    omega_in_basis,
    push_forward,
    theta_partition,
    theta_set,
    union,
)
from freebound.errors import InputError
from freebound.subgrp import cyclic_kernel, from_permutations, rewrite_in_basis
from freebound.words import (
    Conjugation,
    Inversion,
    Permutation,
    Transvection,
    apply_moves,
    inverse_letters,
    mul_letters,
    parse,
    reduce_letters,
)

A, B = 1, 2


def cyl(*texts, n=2):
    return ClopenSet(n, frozenset(parse(t) for t in texts))


def test_boolean_examples():
    assert complement(omega(2, A)) == cyl("A", "b", "B")
    assert intersect(omega(2, A), omega(2, B)).is_empty()
    assert cyl("a", "A", "b", "B").is_full()
    assert ClopenSet.full(2).to_json() == {"n": 2, "prefixes": "ALL"}
    assert ClopenSet.from_json({"n": 2, "prefixes": "ALL"}).is_full()
    # sibling merge happens at every depth
    assert cyl("ab", "aa", "aB") == omega(2, A)


def test_rank_mismatch_and_bad_prefix():
    with pytest.raises(InputError):
        union(omega(2, A), omega(3, A))
    with pytest.raises(InputError):
        ClopenSet(2, frozenset({(1, -1)}))


def test_act_examples():
    assert act(parse("a"), omega(2, -A)) == complement(omega(2, A))
    assert act(parse("b"), omega(2, A)) == cyl("ba")


def test_transvection_omega_identities():
    for n in (2, 3, 4):
        psi = [Transvection(1, 2)]
        s2_omega_s1 = act((2,), omega(n, 1))
        assert omega_in_basis(psi, n, 1) == s2_omega_s1
        assert omega_in_basis(psi, n, 2) == difference(omega(n, 2), s2_omega_s1)
        for i in range(3, n + 1):
            assert omega_in_basis(psi, n, i) == omega(n, i)


def test_theta_examples():
    g = cyclic_kernel(2, 1, 2)
    part = theta_partition(g)
    b = basis_letter_of(g, parse("b"))
    assert part[b] == omega(2, B)
    pieces = [part[basis_letter_of(g, parse(w))] for w in ("aa", "abA", "aBA")]
    assert union(union(pieces[0], pieces[1]), pieces[2]) == omega(2, A)
    assert all(intersect(x, y).is_empty() for i, x in enumerate(pieces) for y in pieces[i + 1:])
    whole = cyclic_kernel(2, 1, 1)
    assert theta_set(whole, basis_letter_of(whole, parse("a"))) == omega(2, A)


def first_basis_letter_by_rewriting(graph, x):
    """Oracle: close a long prefix to the basepoint and rewrite it."""
    v = graph.walk(0, x)
    loop = mul_letters(x, inverse_letters(graph.transversal[v]))
    return rewrite_in_basis(graph, loop)[0]


def test_theta_matches_rewriting_oracle():
    rng = random.Random(5)
    graphs = [
        cyclic_kernel(2, 1, 3),
        from_permutations(2, [[1, 2, 0], [0, 2, 1]]),
        from_permutations(3, [[1, 0, 2, 3], [0, 2, 1, 3], [0, 1, 3, 2]]),
    ]
    for g in graphs:
        part = theta_partition(g)
        assert part.max_depth <= part.depth_bound
        for _ in range(300):
            x = reduce_letters(rng.choice([1, -1, 2, -2, 3, -3][: 2 * g.n]) for _ in range(40))
            if len(x) < 3 * g.index:
                continue
            b = first_basis_letter_by_rewriting(g, x)
            pt = EventuallyPeriodicPoint(x, x[-1:])
            hits = [c for c, s in part.sets.items() if member(pt, s)]
            assert hits == [b]


def test_fixed_points_examples():
    plus, minus = fixed_points(parse("a"))
    assert (plus.head, plus.cycle, minus.cycle) == ((), (A,), (-A,))
    plus, _ = fixed_points(parse("ab"))
    assert plus.cycle == (A, B)
    plus, minus = fixed_points(parse("baB"))
    assert (plus.head, plus.cycle) == ((B,), (A,))
    assert act_point(parse("baB"), plus) == plus
    assert act_point(parse("baB"), minus) == minus
    with pytest.raises(InputError):
        fixed_points(())


def test_contraction_examples():
    # a.(complement of [A]) = [aa] u [ab] u [aB], already inside [a]
    assert contraction_exponent(parse("a"), omega(2, A), omega(2, -A)) == 1
    assert contraction_exponent(parse("a"), ClopenSet.full(2), omega(2, -A)) == 1
    with pytest.raises(InputError):
        contraction_exponent((), omega(2, A), omega(2, -A))
    with pytest.raises(PreconditionError):
        contraction_exponent(parse("a"), omega(2, B), omega(2, -A))
    # the worst point outside [AAA] is AAb..., which needs a^5 to land in [aaa]
    u, v = cyl("aaa"), cyl("AAA")
    assert contraction_exponent(parse("a"), u, v) == 5
    assert not member(act_point(parse("aaaa"), EventuallyPeriodicPoint(parse("AA"), (B,))), u)
    assert contraction_exponent(parse("a"), u, v, cap=4) is None


# --- properties ----------------------------------------------------------------

N = 2
letters = st.sampled_from([1, -1, 2, -2])
words = st.lists(letters, max_size=6).map(reduce_letters)
nonempty_words = st.lists(letters, min_size=1, max_size=4).map(reduce_letters).filter(bool)
clopens = st.lists(st.lists(letters, min_size=0, max_size=4).map(reduce_letters), max_size=5).map(
    lambda ps: ClopenSet(N, frozenset(ps))
)


@st.composite
def points(draw):
    head = draw(words)
    cycle = draw(nonempty_words)
    try:
        return EventuallyPeriodicPoint(head, cycle)
    except InputError:
        return EventuallyPeriodicPoint(head if head else (), (head[-1],) if head else (1,))


@given(clopens, clopens, points())
def test_boolean_ops_agree_with_membership(c, d, p):
    assert member(p, union(c, d)) == (member(p, c) or member(p, d))
    assert member(p, intersect(c, d)) == (member(p, c) and member(p, d))
    assert member(p, complement(c)) != member(p, c)
    assert complement(complement(c)) == c
    assert union(c, complement(c)).is_full()
    assert is_subset(intersect(c, d), c)


@given(clopens, clopens, clopens)
def test_boolean_algebra_laws(a, b, c):
    assert intersect(a, union(b, c)) == union(intersect(a, b), intersect(a, c))
    assert complement(union(a, b)) == intersect(complement(a), complement(b))
    assert union(a, b) == union(b, a)


@given(words, words, clopens, points())
def test_action_equivariance(g, h, c, p):
    assert act(inverse_letters(g), act(g, c)) == c
    assert act(mul_letters(g, h), c) == act(g, act(h, c))
    assert member(act_point(g, p), act(g, c)) == member(p, c)


def image_point(moves, p):
    """Oracle for the boundary map of an automorphism on a periodic point."""
    head = apply_moves(moves, p.head)
    cyc = apply_moves(moves, p.cycle)
    k = 0
    while cyc[k] == -cyc[len(cyc) - 1 - k]:
        k += 1
    conj, core = cyc[:k], cyc[k: len(cyc) - k]
    return act_point(mul_letters(head, conj), EventuallyPeriodicPoint((), core))


moves3 = st.lists(
    st.one_of(
        st.sampled_from([Transvection(1, 2), Transvection(2, -1), Transvection(1, -2)]),
        st.sampled_from([Inversion(1), Permutation((2, 1)), Conjugation(2, 1, -1)]),
    ),
    max_size=3,
)


@settings(max_examples=80, deadline=None)
@given(moves3, clopens, points())
def test_push_forward_matches_pointwise_image(ms, c, p):
    image = push_forward(ms, c)
    assert member(image_point(ms, p), image) == member(p, c)
