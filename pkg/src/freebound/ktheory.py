"""K-theory of boundary actions twisted by finite coset actions.

The crossed product of the diagonal action of F_n on (boundary x cosets) is
a Cuntz-Krieger algebra over the symbol set {(t, x)}: t a signed letter, x a
coset.  Its K_0 is the cokernel of I - A^t with unit the all-ones class, and
its K_1 is the kernel.  The symbol (t, x) stands for the projection onto
(first letter t) x {x}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .boundary import ClopenSet, omega, refine
from .errors import InputError
from .snf import Matrix, SNFResult, matmul, smith_normal_form
from .subgrp import SchreierGraph, cyclic_kernel
from .supernat import SN, lambda_iso, sn_divides, sn_mul, sn_product, upsilon_iso
from .words import (
    Conjugation,
    Inversion,
    Move,
    Permutation,
    Transvection,
    alphabet,
    validate_moves,
)


# --- the Cuntz-Krieger matrix -------------------------------------------------------


def ck_symbols(graph: SchreierGraph) -> list[tuple[int, int]]:
    return [(t, x) for t in alphabet(graph.n) for x in range(graph.index)]


def _symbol_index(graph: SchreierGraph, t: int, x: int) -> int:
    pos = 2 * (abs(t) - 1) + (0 if t > 0 else 1)
    return pos * graph.index + x


def ck_matrix(graph: SchreierGraph) -> Matrix:
    """A = sum over letters s of A_s (x) B_s.

    A_s sends delta_t to delta_s unless t = s^-1, and B_s permutes cosets by
    the left action x -> s.x.  Row (s, s.x) has a 1 at every column (t, x)
    with t != s^-1, so every row sums to 2n - 1.
    """
    size = 2 * graph.n * graph.index
    a = [[0] * size for _ in range(size)]
    for s in alphabet(graph.n):
        for x in range(graph.index):
            row = _symbol_index(graph, s, graph.step(x, -s))
            for t in alphabet(graph.n):
                if t != -s:
                    a[row][_symbol_index(graph, t, x)] = 1
    return a


def relation_matrix(graph: SchreierGraph) -> Matrix:
    """I - A^t; its columns are the Cuntz-Krieger relations."""
    a = ck_matrix(graph)
    size = len(a)
    return [[int(i == j) - a[j][i] for j in range(size)] for i in range(size)]


# --- finitely generated abelian groups given by a cokernel ------------------------


@dataclass
class Cokernel:
    """Z^N modulo the column span of a relation matrix, via its Smith form."""

    snf: SNFResult
    size: int

    @classmethod
    def of(cls, relations: Matrix) -> Cokernel:
        return cls(smith_normal_form(relations, cols=len(relations)), len(relations))

    def _moduli(self) -> list[int]:
        d = list(self.snf.divisors) + [0] * (self.size - len(self.snf.divisors))
        return d

    @property
    def free_rank(self) -> int:
        return sum(1 for d in self._moduli() if d == 0)

    @property
    def torsion(self) -> list[int]:
        return [d for d in self._moduli() if d > 1]

    @property
    def kernel_rank(self) -> int:
        """Nullity of the relation matrix (equal to free_rank when square)."""
        cols = len(self.snf.V)
        return cols - self.snf.rank

    def coordinates(self, v: Sequence[int]) -> tuple[list[int], list[int]]:
        """(free coordinates, torsion coordinates reduced mod each divisor)."""
        y = [sum(r * x for r, x in zip(row, v)) for row in self.snf.U]
        free, tors = [], []
        for d, c in zip(self._moduli(), y):
            if d == 0:
                free.append(c)
            elif d > 1:
                tors.append(c % d)
        return free, tors

    def is_zero(self, v: Sequence[int]) -> bool:
        free, tors = self.coordinates(v)
        return not any(free) and not any(tors)

    def equal(self, v: Sequence[int], w: Sequence[int]) -> bool:
        return self.is_zero([a - b for a, b in zip(v, w)])

    def order(self, v: Sequence[int]) -> Optional[int]:
        """Order of the class of v, or None if it has infinite order."""
        free, tors = self.coordinates(v)
        if any(free):
            return None
        out = 1
        for d, c in zip(self.torsion, tors):
            out = math.lcm(out, d // math.gcd(d, c))
        return out


@dataclass
class FGAbelianWithUnit:
    free_rank: int
    torsion: list[int]
    unit_free: list[int]
    unit_torsion: list[int]

    @property
    def unit_order(self) -> Optional[int]:
        if any(self.unit_free):
            return None
        out = 1
        for d, c in zip(self.torsion, self.unit_torsion):
            out = math.lcm(out, d // math.gcd(d, c))
        return out

    def to_json(self) -> dict:
        return {"freeRank": self.free_rank, "torsion": list(self.torsion)}


def pair_iso(a: FGAbelianWithUnit, b: FGAbelianWithUnit) -> bool:
    """Isomorphism of (group, unit) pairs when both units are torsion.

    Automorphisms of Z^r + (finite) act transitively on torsion elements of a
    given order only for cyclic torsion; mixed units are rejected.
    """
    if a.unit_order is None or b.unit_order is None:
        raise InputError("unit has infinite order; pair comparison is not supported")
    if len(a.torsion) > 1 or len(b.torsion) > 1:
        raise InputError("non-cyclic torsion; pair comparison is not supported")
    return (a.free_rank, a.torsion, a.unit_order) == (b.free_rank, b.torsion, b.unit_order)


@dataclass
class DiagonalKTheory:
    """K-theory of the diagonal action for one coset graph."""

    graph: SchreierGraph
    cokernel: Cokernel = field(repr=False)

    @classmethod
    def of(cls, graph: SchreierGraph) -> DiagonalKTheory:
        return cls(graph, Cokernel.of(relation_matrix(graph)))

    @property
    def size(self) -> int:
        return self.cokernel.size

    def unit_vector(self) -> list[int]:
        return [1] * self.size

    def k0(self) -> FGAbelianWithUnit:
        free, tors = self.cokernel.coordinates(self.unit_vector())
        return FGAbelianWithUnit(self.cokernel.free_rank, self.cokernel.torsion, free, tors)

    def k1_rank(self) -> int:
        return self.cokernel.kernel_rank

    def class_of(self, c: ClopenSet, x: int) -> list[int]:
        """Vector representing the class of (indicator of c) x delta_x.

        Each cylinder [u t] at coset x is moved by u^-1 onto [t] at the coset
        u^-1.x, which is the symbol (t, u^-1.x).  Refining c never changes
        the class, since the Cuntz-Krieger relations are exactly refinement.
        """
        g = self.graph
        if c.n != g.n:
            raise InputError(f"rank mismatch: {c.n} vs {g.n}")
        if not 0 <= x < g.index:
            raise InputError(f"coset {x} out of range")
        v = [0] * self.size
        for p in refine(c, max(c.depth, 1)):
            head, t = p[:-1], p[-1]
            v[_symbol_index(g, t, g.walk(x, head))] += 1
        return v

    def class_over_all_cosets(self, c: ClopenSet) -> list[int]:
        out = [0] * self.size
        for x in range(self.graph.index):
            out = [a + b for a, b in zip(out, self.class_of(c, x))]
        return out

    def free_coordinates(self, v: Sequence[int]) -> list[int]:
        return self.cokernel.coordinates(v)[0]


def k0_of_diagonal(graph: SchreierGraph) -> FGAbelianWithUnit:
    return DiagonalKTheory.of(graph).k0()


def k1_rank_of_diagonal(graph: SchreierGraph) -> int:
    return DiagonalKTheory.of(graph).k1_rank()


def k0_class(c: ClopenSet, x: int, graph: SchreierGraph) -> list[int]:
    return DiagonalKTheory.of(graph).class_of(c, x)


# --- automorphisms of the boundary algebra ----------------------------------------------


def k0_of_automorphism(moves: Sequence[Move], n: int) -> Matrix:
    """Induced map on K_0 of the boundary algebra.

    Coordinates are ([p_{s_1}], ..., [p_{s_n}], [1]), where p_s projects onto
    the points starting with s and the last coordinate lives in Z_{n-1}.
    Column j is the image of the j-th coordinate; the moves act in order.
    """
    validate_moves(moves, n)
    unit = n
    total = [[int(i == j) for j in range(n + 1)] for i in range(n + 1)]
    for mv in moves:
        step = [[int(i == j) for j in range(n + 1)] for i in range(n + 1)]
        if isinstance(mv, Permutation):
            for i in range(n + 1):
                step[i][i] = 0
            for i, img in enumerate(mv.images):
                step[img - 1][i] = 1
            step[unit][unit] = 1
        elif isinstance(mv, Transvection):
            # s_i -> s_j s_i sends [p_{s_j}] to [p_{s_j}] - [p_{s_i}];
            # s_i -> s_j^-1 s_i is its inverse
            i, j = mv.target - 1, abs(mv.by) - 1
            step[i][j] = -1 if mv.by > 0 else 1
        elif isinstance(mv, Inversion):
            u = mv.gen - 1
            step[u][u] = -1
            step[unit][u] = 1
        elif isinstance(mv, Conjugation):
            t = mv.by - 1
            step[unit][t] = -mv.power
        total = matmul(step, total)
    if n > 1:
        for j in range(n + 1):
            total[unit][j] %= n - 1
    return total


# --- connecting maps for cyclic kernels -------------------------------------------------


@dataclass
class ConnectingReport:
    n: int
    k: int
    divisors: list[int]
    matrix: Matrix  # free coordinates of [p_{s_i}] as columns


def connecting_divisors(n: int, k: int, j: int = 1) -> ConnectingReport:
    """Elementary divisors of the free part of the K_0 map induced by the
    inclusion of the boundary algebra into the one twisted by Z_k."""
    if k < 2:
        raise InputError("need k >= 2")
    kt = DiagonalKTheory.of(cyclic_kernel(n, j, k))
    cols = [kt.free_coordinates(kt.class_over_all_cosets(omega(n, i))) for i in range(1, n + 1)]
    mat = [[cols[c][r] for c in range(n)] for r in range(len(cols[0]))]
    divisors = [d for d in smith_normal_form(mat).divisors if d]
    return ConnectingReport(n, k, divisors, mat)


# --- symbolic invariants ------------------------------------------------------------------


Rank = Union[int, str]  # "inf" for countably infinite rank


@dataclass(frozen=True)
class InvariantTriple:
    """(K_0, [1], K_1) written symbolically.

    K_0 is the direct sum of the rational groups attached to ``upsilon``, a
    free part of rank ``free_rank``, and the torsion group attached to
    ``torsion``; the unit sits in the torsion part as ``unit`` mod 1.
    """

    upsilon: tuple[SN, ...]
    free_rank: Rank
    torsion: SN
    unit: Fraction
    k1_rank: Rank

    def __post_init__(self) -> None:
        unit = Fraction(self.unit) % 1
        object.__setattr__(self, "unit", unit)
        object.__setattr__(self, "upsilon", tuple(sorted(self.upsilon, key=str)))
        if not sn_divides(unit.denominator, self.torsion):
            raise InputError(f"unit {unit} does not live in the torsion group of {self.torsion}")

    @property
    def unit_order(self) -> int:
        return self.unit.denominator

    def to_json(self) -> dict:
        return {
            "upsilon": [s.to_json() for s in self.upsilon],
            "freeRank": self.free_rank,
            "torsion": self.torsion.to_json(),
            "unit": f"{self.unit.numerator}/{self.unit.denominator}",
            "k1": self.k1_rank,
        }

    def describe(self) -> str:
        parts = [f"Y({s})" for s in self.upsilon]
        parts.append("Z^inf" if self.free_rank == "inf" else f"Z^{self.free_rank}")
        parts.append(f"L({self.torsion})")
        return f"{' + '.join(parts)}, unit {self.unit.numerator}/{self.unit.denominator}"


def tower_invariant(n: int, ns: Sequence[SN]) -> InvariantTriple:
    """Invariant of the boundary action times k odometers of types N_1..N_k."""
    if n < 2:
        raise InputError("rank must be at least 2")
    if not 1 <= len(ns) <= n:
        raise InputError(f"need 1 <= k <= n, got k={len(ns)}, n={n}")
    for s in ns:
        if not s.is_infinite():
            raise InputError(f"{s} is finite; odometer types must be infinite")
    torsion = sn_mul(n - 1, sn_product(ns))
    return InvariantTriple(tuple(ns), "inf", torsion, Fraction(1, n - 1), "inf")


def skyscraper_invariant(t: InvariantTriple, k: int) -> InvariantTriple:
    if k < 1:
        raise InputError("k must be positive")
    return InvariantTriple(t.upsilon, t.free_rank, t.torsion, t.unit * k, t.k1_rank)


def triple_iso(a: InvariantTriple, b: InvariantTriple) -> bool:
    """Isomorphism check: equal torsion, equal unit order, matched summands."""
    if (a.free_rank, a.k1_rank) != (b.free_rank, b.k1_rank):
        return False
    if not lambda_iso(a.torsion, b.torsion) or a.unit_order != b.unit_order:
        return False
    if len(a.upsilon) != len(b.upsilon):
        return False
    remaining = list(b.upsilon)
    for s in a.upsilon:
        match = next((r for r in remaining if upsilon_iso(s, r) is not None), None)
        if match is None:
            return False
        remaining.remove(match)
    return True
