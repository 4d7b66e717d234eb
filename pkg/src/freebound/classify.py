"""Deciding isomorphism within the family of boundary-odometer products.

A system is given by a rank n and infinite supernatural numbers N_1..N_k
(k <= n): the boundary action of F_n times odometers of types N_j, the j-th
one driven by the exponent sum of the generator s_j.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import InputError
from .ktheory import InvariantTriple, tower_invariant, triple_iso
from .supernat import SN, SeqEquivWitness, lambda_iso, seq_equiv, upsilon_iso


@dataclass(frozen=True)
class GammaSpec:
    n: int
    ns: tuple[SN, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ns", tuple(self.ns))
        if self.n < 2:
            raise InputError(f"rank must be at least 2, got {self.n}")
        if not 1 <= len(self.ns) <= self.n:
            raise InputError(f"need 1 <= k <= n odometers, got k={len(self.ns)} for n={self.n}")
        for i, s in enumerate(self.ns, 1):
            if not s.is_infinite():
                raise InputError(f"odometer type {i} ({s}) must be an infinite supernatural number")

    @property
    def k(self) -> int:
        return len(self.ns)

    def invariant(self) -> InvariantTriple:
        return tower_invariant(self.n, self.ns)

    def to_json(self) -> dict:
        return {"n": self.n, "Ns": [str(s) for s in self.ns]}

    @classmethod
    def from_json(cls, obj: dict) -> GammaSpec:
        try:
            return cls(int(obj["n"]), tuple(SN.from_json(s) for s in obj["Ns"]))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed system spec: {exc}") from exc


# Conditions that are all equivalent for this family, with the results they rest on.
CONDITIONS: tuple[tuple[str, str], ...] = (
    ("strong orbit equivalence", "implied by continuous orbit equivalence; implies K_0 isomorphism via the orbit cocycle"),
    ("continuous orbit equivalence", "constructed from the sequence relation by composing odometer rescalings with free group automorphisms"),
    ("isomorphic topological full groups", "Matui's isomorphism theorem for full groups of purely infinite minimal groupoids"),
    ("isomorphic commutator subgroups of the full groups", "Matui's isomorphism theorem; the commutator subgroup is simple"),
    ("isomorphic crossed products", "Kirchberg-Phillips classification of unital Kirchberg algebras in the UCT class"),
    ("isomorphic (K_0, [1]_0)", "Cuntz-Krieger K-theory along the odometer tower, computed symbolically"),
    ("equal ranks and equivalent odometer sequences", "decided exactly by the supernatural sequence relation"),
)


@dataclass
class Verdict:
    equivalent: bool
    witness: Optional[SeqEquivWitness]
    distinguisher: Optional[str]
    invariants: tuple[InvariantTriple, InvariantTriple] = field(repr=False)

    def to_json(self) -> dict:
        return {
            "equivalent": self.equivalent,
            "witness": self.witness.to_json() if self.witness else None,
            "conditions": [
                {"id": i, "label": label, "holds": self.equivalent, "citation": cite}
                for i, (label, cite) in enumerate(CONDITIONS, 1)
            ],
            "distinguisher": self.distinguisher,
            "invariants": [t.to_json() for t in self.invariants],
        }


def invariant_iso(a: GammaSpec, b: GammaSpec) -> Optional[SeqEquivWitness]:
    if a.n != b.n or a.k != b.k:
        return None
    return seq_equiv(a.ns, b.ns)


def _upsilon_matching(xs: Sequence[SN], ys: Sequence[SN]) -> bool:
    remaining = list(ys)
    for s in xs:
        hit = next((r for r in remaining if upsilon_iso(s, r) is not None), None)
        if hit is None:
            return False
        remaining.remove(hit)
    return not remaining


def _distinguish(a: GammaSpec, b: GammaSpec, ta: InvariantTriple, tb: InvariantTriple) -> str:
    if a.n != b.n:
        return f"rank differs: n={a.n} vs n={b.n} (unit order {a.n - 1} vs {b.n - 1})"
    if a.k != b.k:
        return f"number of rational summands differs: {a.k} vs {b.k}"
    if not lambda_iso(ta.torsion, tb.torsion):
        return f"torsion differs: L({ta.torsion}) vs L({tb.torsion})"
    if not _upsilon_matching(ta.upsilon, tb.upsilon):
        return "rational summands differ: no pairing of the types up to finite factors"
    return "no pairing of the types admits multipliers with equal products"


def classify_gammas(a: GammaSpec, b: GammaSpec) -> Verdict:
    ta, tb = a.invariant(), b.invariant()
    witness = invariant_iso(a, b)
    if witness is not None:
        if not triple_iso(ta, tb):
            raise AssertionError("sequence relation holds but symbolic invariants differ")
        return Verdict(True, witness, None, (ta, tb))
    return Verdict(False, None, _distinguish(a, b, ta, tb), (ta, tb))
