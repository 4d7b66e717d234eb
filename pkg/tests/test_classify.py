import random

import pytest

from freebound.classify import CONDITIONS, GammaSpec, classify_gammas, invariant_iso
from freebound.errors import InputError
from freebound.ktheory import triple_iso
from freebound.supernat import INF, SN, sn_mul, verify_witness

P = SN.parse


def spec(n, *ns):
    return GammaSpec(n, tuple(P(s) for s in ns))


def test_spec_validation():
    with pytest.raises(InputError):
        spec(2, "6")
    with pytest.raises(InputError):
        spec(2, "2^inf", "3^inf", "5^inf")
    with pytest.raises(InputError):
        GammaSpec.from_json({"n": 2})
    assert GammaSpec.from_json({"n": 2, "Ns": ["2^inf*3"]}) == spec(2, "2^inf*3")


def test_invariant_iso_examples():
    assert invariant_iso(spec(2, "2^inf"), spec(2, "2^inf*4")) is not None
    assert invariant_iso(spec(2, "2^inf"), spec(3, "2^inf")) is None
    w = invariant_iso(spec(2, "2^inf*3", "5^inf"), spec(2, "2^inf", "3*5^inf"))
    assert w.to_json() == {"sigma": [1, 2], "n": [1, 3], "m": [3, 1]}


def test_classify_examples():
    v = classify_gammas(spec(2, "2^inf"), spec(2, "2^inf*3"))
    assert not v.equivalent and v.witness is None
    assert "torsion" in v.distinguisher and "3" in v.distinguisher
    a = spec(3, "2^inf", "3^inf")
    v = classify_gammas(a, a)
    assert v.equivalent and v.witness.sigma == (0, 1)
    v = classify_gammas(a, spec(3, "3^inf", "2^inf"))
    assert v.equivalent and v.witness.sigma == (1, 0)
    assert set(v.witness.n_multipliers) == {1}
    v = classify_gammas(spec(2, "2^inf"), spec(3, "2^inf"))
    assert "rank" in v.distinguisher


def test_verdict_json():
    out = classify_gammas(spec(2, "2^inf"), spec(2, "3^inf")).to_json()
    assert len(out["conditions"]) == len(CONDITIONS) == 7
    assert {c["holds"] for c in out["conditions"]} == {False}
    assert all(c["citation"] for c in out["conditions"])
    assert out["distinguisher"]


def test_product_constraint_distinguisher():
    # each type pairs with one on the other side, but the multiplier products cannot match
    v = classify_gammas(spec(2, "2^inf*3", "5^inf"), spec(2, "2^inf", "5^inf"))
    assert not v.equivalent


PRIMES = (2, 3, 5)


def random_sn(rng):
    exps = {p: rng.choice([0, 0, 1, 2, INF]) for p in PRIMES}
    exps[rng.choice(PRIMES)] = INF
    return SN.of(exps)


def random_spec(rng):
    n = rng.randint(2, 3)
    k = rng.randint(1, n)
    return GammaSpec(n, tuple(random_sn(rng) for _ in range(k)))


def rescalings(rng, rep, count=2):
    """Specs equivalent to each other: rep scaled by multiplier vectors that
    share one product, each then permuted."""
    factors = [rng.choice(PRIMES) for _ in range(rng.randint(0, 3))]
    out = []
    for _ in range(count):
        mult = [1] * rep.k
        for f in factors:
            mult[rng.randrange(rep.k)] *= f
        ns = [sn_mul(m, s) for m, s in zip(mult, rep.ns)]
        rng.shuffle(ns)
        out.append(GammaSpec(rep.n, tuple(ns)))
    return out


def test_randomized_agreement_with_k_theory():
    """10^4 pairs: the decision agrees with the symbolic K-theory comparison."""
    rng = random.Random(2024)
    equivalent = 0
    for _ in range(10_000):
        if rng.random() < 0.4:
            a, b = rescalings(rng, random_spec(rng))
        else:
            a, b = random_spec(rng), random_spec(rng)
        v = classify_gammas(a, b)
        assert v.equivalent == (invariant_iso(a, b) is not None)
        assert v.equivalent == triple_iso(a.invariant(), b.invariant()), (a, b)
        if v.equivalent:
            equivalent += 1
            assert verify_witness(a.ns, b.ns, v.witness)
        assert classify_gammas(b, a).equivalent == v.equivalent
    assert equivalent > 1000


def test_reflexive_and_transitive():
    rng = random.Random(7)
    for _ in range(500):
        rep = random_spec(rng)
        assert classify_gammas(rep, rep).equivalent
        a, b, c = rescalings(rng, rep, 3)
        assert classify_gammas(a, b).equivalent and classify_gammas(b, c).equivalent
        assert classify_gammas(a, c).equivalent
