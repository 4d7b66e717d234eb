"""Clopen subsets of the boundary of F_n and the boundary action.

The boundary is the space of infinite reduced words.  A clopen set is stored
as a finite antichain of prefixes, meaning the union of the cylinders of words
that start with one of them.  Canonical form merges every complete family of
siblings into its parent, so two clopen sets are equal exactly when their
prefix sets are; the whole space is the single empty prefix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .errors import InputError
from .subgrp import SchreierGraph
from .words import (
    Conjugation,
    Inversion,
    Letters,
    Move,
    Permutation,
    Transvection,
    alphabet,
    apply_move,
    inverse_letters,
    mul_letters,
    power_letters,
    reduce_letters,
    render,
)


def children(n: int, u: Letters) -> list[Letters]:
    last = u[-1] if u else 0
    return [u + (x,) for x in alphabet(n) if x != -last]


def _has_prefix_in(u: Letters, prefixes: frozenset) -> bool:
    return any(u[:k] in prefixes for k in range(len(u) + 1))


def canonical_prefixes(n: int, prefixes: Iterable[Sequence[int]]) -> frozenset:
    pset = {tuple(p) for p in prefixes}
    # drop anything already covered by a shorter prefix
    pset = {p for p in pset if not any(p[:k] in pset for k in range(len(p)))}
    by_depth: dict[int, set] = {}
    for p in pset:
        by_depth.setdefault(len(p), set()).add(p)
    depth = max(by_depth, default=0)
    while depth > 0:
        level = by_depth.get(depth, set())
        groups: dict[Letters, int] = {}
        for p in level:
            groups[p[:-1]] = groups.get(p[:-1], 0) + 1
        for parent, count in groups.items():
            full = 2 * n if not parent else 2 * n - 1
            if count == full:
                level.difference_update(children(n, parent))
                by_depth.setdefault(depth - 1, set()).add(parent)
        depth -= 1
    return frozenset(p for level in by_depth.values() for p in level)


@dataclass(frozen=True)
class ClopenSet:
    n: int
    prefixes: frozenset = frozenset()

    def __post_init__(self) -> None:
        if self.n < 2:
            raise InputError(f"boundary needs rank >= 2, got {self.n}")
        for p in self.prefixes:
            if any(x == 0 or abs(x) > self.n for x in p) or reduce_letters(p) != tuple(p):
                raise InputError(f"prefix {list(p)} is not a reduced word of rank {self.n}")
        object.__setattr__(self, "prefixes", canonical_prefixes(self.n, self.prefixes))

    @classmethod
    def full(cls, n: int) -> ClopenSet:
        return cls(n, frozenset({()}))

    @classmethod
    def empty(cls, n: int) -> ClopenSet:
        return cls(n, frozenset())

    @classmethod
    def cylinder(cls, n: int, u: Sequence[int]) -> ClopenSet:
        return cls(n, frozenset({tuple(u)}))

    def is_full(self) -> bool:
        return self.prefixes == frozenset({()})

    def is_empty(self) -> bool:
        return not self.prefixes

    @property
    def depth(self) -> int:
        return max((len(p) for p in self.prefixes), default=0)

    def sorted_prefixes(self) -> list[Letters]:
        return sorted(self.prefixes, key=lambda p: (len(p), [_letter_key(x) for x in p]))

    def to_json(self) -> dict:
        if self.is_full():
            return {"n": self.n, "prefixes": "ALL"}
        return {"n": self.n, "prefixes": [list(p) for p in self.sorted_prefixes()]}

    @classmethod
    def from_json(cls, obj: dict) -> ClopenSet:
        try:
            n = int(obj["n"])
            pref = obj["prefixes"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed clopen set {obj!r}") from exc
        if pref == "ALL":
            return cls.full(n)
        return cls(n, frozenset(tuple(int(x) for x in p) for p in pref))

    def __str__(self) -> str:
        if self.is_full():
            return "ALL"
        if self.is_empty():
            return "{}"
        return " u ".join(f"[{render(p)}]" for p in self.sorted_prefixes())


def _letter_key(x: int) -> tuple[int, int]:
    return (abs(x), 0 if x > 0 else 1)


def _check_same(a: ClopenSet, b: ClopenSet) -> None:
    if a.n != b.n:
        raise InputError(f"rank mismatch: {a.n} vs {b.n}")


def omega(n: int, x: int) -> ClopenSet:
    """Points whose first letter is x."""
    return ClopenSet.cylinder(n, (x,))


def complement(c: ClopenSet) -> ClopenSet:
    nodes = {p[:k] for p in c.prefixes for k in range(len(p))}
    out = []
    for u in nodes:
        for ch in children(c.n, u):
            if ch not in nodes and ch not in c.prefixes:
                out.append(ch)
    if not c.prefixes:
        out.append(())
    return ClopenSet(c.n, frozenset(out))


def intersect(a: ClopenSet, b: ClopenSet) -> ClopenSet:
    _check_same(a, b)
    out = [p for p in a.prefixes if _has_prefix_in(p, b.prefixes)]
    out += [q for q in b.prefixes if _has_prefix_in(q, a.prefixes)]
    return ClopenSet(a.n, frozenset(out))


def union(a: ClopenSet, b: ClopenSet) -> ClopenSet:
    _check_same(a, b)
    return ClopenSet(a.n, a.prefixes | b.prefixes)


def difference(a: ClopenSet, b: ClopenSet) -> ClopenSet:
    return intersect(a, complement(b))


def is_subset(a: ClopenSet, b: ClopenSet) -> bool:
    _check_same(a, b)
    return all(_has_prefix_in(p, b.prefixes) for p in a.prefixes)


def disjoint(a: ClopenSet, b: ClopenSet) -> bool:
    return intersect(a, b).is_empty()


def refine(c: ClopenSet, depth: int) -> list[Letters]:
    """Prefixes of length >= depth whose cylinders partition c."""
    out: list[Letters] = []
    stack = list(c.prefixes)
    while stack:
        p = stack.pop()
        if len(p) >= depth:
            out.append(p)
        else:
            stack.extend(children(c.n, p))
    return out


def _cylinder_complement(n: int, u: Letters) -> list[Letters]:
    return [ch for k in range(len(u)) for ch in children(n, u[:k]) if ch != u[: k + 1]]


def act(g: Sequence[int], c: ClopenSet) -> ClopenSet:
    """Image of c under the boundary action of g.

    If g cancels only part of a prefix v, the cylinder [v] maps onto [g v].
    If g = h v^-1 swallows v entirely, [v] maps onto everything outside the
    cylinder [h x^-1], where x is the last letter of v.
    """
    g = reduce_letters(g)
    out: list[Letters] = []
    for v in c.prefixes:
        gv = mul_letters(g, v)
        if not v:
            out.append(())
        elif len(gv) > len(g) - len(v):
            out.append(gv)
        else:
            out.extend(_cylinder_complement(c.n, gv + (-v[-1],)))
    return ClopenSet(c.n, frozenset(out))


# --- boundary maps of automorphisms ---------------------------------------------


def _preimage_under_transvection(inv: Transvection, c: ClopenSet) -> ClopenSet:
    """Points x whose image under the boundary map of ``inv`` lies in c.

    ``inv`` cancels at most one letter when two reduced words are joined (a
    bounded-cancellation constant of 1), so every point of the cylinder [v]
    is sent into the cylinder of inv(v) with its last letter dropped.  A
    cylinder is kept once that target lies inside c, dropped once it misses
    c, and refined otherwise.
    """
    n = c.n
    if c.is_full() or c.is_empty():
        return c
    nodes = {p[:k] for p in c.prefixes for k in range(len(p) + 1)}
    keep: list[Letters] = []
    frontier: list[Letters] = [(x,) for x in alphabet(n)]
    while frontier:
        nxt: list[Letters] = []
        for v in frontier:
            image = apply_move(inv, v)
            target = image[:-1]
            if _has_prefix_in(target, c.prefixes):
                keep.append(v)
            elif target in nodes:
                nxt.extend(children(n, v))
        frontier = nxt
    return ClopenSet(n, frozenset(keep))


def _elementary(moves: Sequence[Move]) -> list[Move]:
    out: list[Move] = []
    for mv in moves:
        out.extend(mv.elementary() if isinstance(mv, Conjugation) else [mv])
    return out


def push_forward(moves: Sequence[Move], c: ClopenSet) -> ClopenSet:
    """Image of c under the boundary map of the automorphism (first move first)."""
    for mv in _elementary(moves):
        mv.validate(c.n)
        if isinstance(mv, (Permutation, Inversion)):
            c = ClopenSet(c.n, frozenset(apply_move(mv, p) for p in c.prefixes))
        else:
            (inv,) = mv.inverse()
            c = _preimage_under_transvection(inv, c)
    return c


def omega_in_basis(moves: Sequence[Move], n: int, x: int) -> ClopenSet:
    """Points whose expansion in the basis phi(S) starts with phi(s_x), where
    phi is the automorphism given by ``moves`` and x is a signed letter."""
    return push_forward(moves, omega(n, x))


# --- sets read off a Schreier graph -----------------------------------------------


@dataclass(frozen=True)
class ThetaPartition:
    """First-crossing classification of the boundary for a Schreier basis."""

    sets: dict  # signed basis index -> ClopenSet
    depth_bound: int
    max_depth: int

    def __getitem__(self, b: int) -> ClopenSet:
        return self.sets[b]


def theta_partition(graph: SchreierGraph) -> ThetaPartition:
    """Split the boundary by the first basis letter of each point's expansion.

    Walking a reduced path from the basepoint, the expansion of the point in
    the Schreier basis is the sequence of non-tree edges crossed, so the
    first crossing decides the class.  A reduced path inside the tree has at
    most (index - 1) edges, so every branch stops by depth index.
    """
    n = graph.n
    found: dict[int, list[Letters]] = {}
    stack: list[tuple[Letters, int]] = [((), 0)]
    deepest = 0
    while stack:
        path, v = stack.pop()
        last = path[-1] if path else 0
        for x in alphabet(n):
            if x == -last:
                continue
            p = path + (x,)
            b = graph.basis_letter(v, x)
            if b is None:
                stack.append((p, graph.step(v, x)))
            else:
                found.setdefault(b, []).append(p)
                deepest = max(deepest, len(p))
    sets = {}
    for j in range(1, graph.rank + 1):
        for b in (j, -j):
            sets[b] = ClopenSet(n, frozenset(found.get(b, [])))
    return ThetaPartition(sets, graph.index, deepest)


def theta_set(graph: SchreierGraph, b: int) -> ClopenSet:
    if not 1 <= abs(b) <= graph.rank:
        raise InputError(f"basis letter {b} out of range 1..{graph.rank}")
    return theta_partition(graph)[b]


def basis_letter_of(graph: SchreierGraph, w: Sequence[int]) -> int:
    """Signed index of the word w (a basis element or an inverse of one)."""
    w = reduce_letters(w)
    for j, bw in enumerate(graph.basis(), start=1):
        if bw == w:
            return j
        if inverse_letters(bw) == w:
            return -j
    raise InputError(f"{render(w)} is not a basis letter")


# --- eventually periodic points ---------------------------------------------------


def _primitive_root(c: Letters) -> Letters:
    k = len(c)
    for d in range(1, k + 1):
        if k % d == 0 and c[:d] * (k // d) == c:
            return c[:d]
    return c


@dataclass(frozen=True)
class EventuallyPeriodicPoint:
    """The infinite reduced word head . cycle . cycle . ..."""

    head: Letters
    cycle: Letters

    def __post_init__(self) -> None:
        head, cycle = tuple(self.head), tuple(self.cycle)
        if not cycle:
            raise InputError("cycle must be nonempty")
        if reduce_letters(head + cycle + cycle) != head + cycle + cycle:
            raise InputError("head followed by repeated cycle is not reduced")
        cycle = _primitive_root(cycle)
        while head and head[-1] == cycle[-1]:
            head, cycle = head[:-1], (cycle[-1],) + cycle[:-1]
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "cycle", cycle)

    def prefix(self, length: int) -> Letters:
        out = list(self.head[:length])
        while len(out) < length:
            out.extend(self.cycle)
        return tuple(out[:length])

    def to_json(self) -> dict:
        return {"head": list(self.head), "cycle": list(self.cycle)}

    def __str__(self) -> str:
        head = render(self.head) if self.head else ""
        return f"{head}({render(self.cycle)})^inf"


def member(point: EventuallyPeriodicPoint, c: ClopenSet) -> bool:
    return _has_prefix_in(point.prefix(c.depth), c.prefixes)


def act_point(g: Sequence[int], point: EventuallyPeriodicPoint) -> EventuallyPeriodicPoint:
    g = reduce_letters(g)
    # unroll enough of the cycle that g cannot cancel into the periodic part
    reps = len(g) // len(point.cycle) + 2
    word = mul_letters(g, point.head + point.cycle * reps)
    return EventuallyPeriodicPoint(word[: len(word) - len(point.cycle)], point.cycle)


def fixed_points(g: Sequence[int]) -> tuple[EventuallyPeriodicPoint, EventuallyPeriodicPoint]:
    """Attracting and repelling fixed points of a nontrivial element."""
    g = reduce_letters(g)
    if not g:
        raise InputError("the identity has no isolated fixed points")
    k = 0
    while g[k] == -g[len(g) - 1 - k]:
        k += 1
    head, core = g[:k], g[k : len(g) - k]
    return (
        EventuallyPeriodicPoint(head, core),
        EventuallyPeriodicPoint(head, inverse_letters(core)),
    )


class PreconditionError(InputError):
    """The fixed points of g are not where contraction_exponent needs them."""


def contraction_exponent(
    g: Sequence[int], u: ClopenSet, v: ClopenSet, cap: int = 64
) -> Optional[int]:
    """Least k <= cap with g^k (complement of v) inside u; None past the cap.

    Requires the attracting fixed point of g in u and the repelling one in v.
    """
    _check_same(u, v)
    plus, minus = fixed_points(g)
    if not member(plus, u) or not member(minus, v):
        raise PreconditionError(
            f"need attracting point {plus} in U and repelling point {minus} in V"
        )
    rest = complement(v)
    g = reduce_letters(g)
    for k in range(1, cap + 1):
        if is_subset(act(power_letters(g, k), rest), u):
            return k
    return None


ClopenLike = Union[ClopenSet, str]
