"""Finite-level models: odometer levels, tower coset graphs, minimality
certificates and the Pimsner-Voiculescu kernel at finite depth."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import count
from typing import Optional, Sequence

from .boundary import theta_partition
from .errors import InputError, ResourceCapError
from .ktheory import DiagonalKTheory
from .snf import determinant, smith_normal_form
from .subgrp import (
    DEFAULT_VERTEX_CAP,
    EnumeratedBasis,
    SchreierGraph,
    abelian_quotient_graph,
    generates_graph_subgroup,
)
from .supernat import INF, SN, is_prime, sn_divides
from .words import Letters, alphabet, mul_letters, power_letters, reduced_words


# --- odometers ---------------------------------------------------------------------


@dataclass(frozen=True)
class CyclicSystem:
    """Z_k with the generator acting by +1."""

    modulus: int

    def step(self, x: int) -> int:
        return (x + 1) % self.modulus

    def permutation(self) -> list[int]:
        return [self.step(x) for x in range(self.modulus)]


def odometer_level(n_type: SN, m: int, schedule: Sequence[int]) -> CyclicSystem:
    """Level m of the odometer presented by the divisor chain ``schedule``.

    Level 0 is the trivial system; level m uses the m-th modulus.
    """
    prev = 1
    for i, k in enumerate(schedule, 1):
        if k < 1 or k % prev:
            raise InputError(f"schedule entry {i} ({k}) is not a multiple of the previous one ({prev})")
        if not sn_divides(k, n_type):
            raise InputError(f"schedule entry {i} ({k}) does not divide {n_type}")
        prev = k
    if not 0 <= m <= len(schedule):
        raise InputError(f"level {m} outside 0..{len(schedule)}")
    return CyclicSystem(1 if m == 0 else schedule[m - 1])


# --- towers of coset graphs ----------------------------------------------------------


@dataclass(frozen=True)
class OdometerTowerSpec:
    """Rank n, odometer types N_1..N_k and one (coordinate, factor) per level.

    At level m only coordinate j_m grows, by the factor n(m, j_m).
    """

    n: int
    ns: tuple[SN, ...]
    levels: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ns", tuple(self.ns))
        object.__setattr__(self, "levels", tuple((int(j), int(f)) for j, f in self.levels))
        if self.n < 2:
            raise InputError("rank must be at least 2")
        if not 1 <= len(self.ns) <= self.n:
            raise InputError(f"need 1 <= k <= n, got k={len(self.ns)}, n={self.n}")
        for s in self.ns:
            if not s.is_infinite():
                raise InputError(f"{s} is finite; odometer types must be infinite")
        running = [1] * len(self.ns)
        for m, (j, f) in enumerate(self.levels, 1):
            if not 1 <= j <= len(self.ns):
                raise InputError(f"level {m}: coordinate {j} outside 1..{len(self.ns)}")
            if f < 2:
                raise InputError(f"level {m}: factor must be at least 2")
            running[j - 1] *= f
            if not sn_divides(running[j - 1], self.ns[j - 1]):
                raise InputError(f"level {m}: {running[j - 1]} does not divide N_{j} = {self.ns[j - 1]}")

    @property
    def k(self) -> int:
        return len(self.ns)

    def moduli(self, m: int) -> tuple[int, ...]:
        """N(m, j) for j = 1..k."""
        if not 0 <= m <= len(self.levels):
            raise InputError(f"level {m} outside 0..{len(self.levels)}")
        out = [1] * self.k
        for j, f in self.levels[:m]:
            out[j - 1] *= f
        return tuple(out)

    def index(self, m: int) -> int:
        out = 1
        for x in self.moduli(m):
            out *= x
        return out

    @classmethod
    def greedy(cls, n: int, ns: Sequence[SN], depth: int) -> OdometerTowerSpec:
        """Default schedule of prime factors, smallest active prime first.

        A candidate (p, j) is ranked by the exponent of p already used in
        coordinate j plus the position of p among the primes, so every prime
        of every N_j recurs and small primes go first; ties go to the smaller
        prime, then the lower coordinate.
        """
        ns = tuple(ns)
        used: list[dict[int, int]] = [{} for _ in ns]
        levels = []
        for _ in range(depth):
            best = None
            for pos, p in enumerate(_primes()):
                if best is not None and pos > best[0]:
                    break
                for j, s in enumerate(ns):
                    e = used[j].get(p, 0)
                    if e < s.exponent(p):
                        key = (e + pos, p, j)
                        if best is None or key < best:
                            best = key
                if best is None and pos > 10_000:
                    raise InputError("no prime factors available")
            _, p, j = best
            used[j][p] = used[j].get(p, 0) + 1
            levels.append((j + 1, p))
        return cls(n, ns, tuple(levels))

    def to_json(self) -> dict:
        return {"n": self.n, "Ns": [str(s) for s in self.ns], "levels": [list(x) for x in self.levels]}


def _primes():
    for p in count(2):
        if is_prime(p):
            yield p


@dataclass
class TowerLevel:
    spec: OdometerTowerSpec
    m: int
    graph: SchreierGraph
    basis: EnumeratedBasis
    schreier: bool = field(default=False)

    @property
    def moduli(self) -> tuple[int, ...]:
        return self.spec.moduli(self.m)


def tower_basis(spec: OdometerTowerSpec, m: int) -> list[Letters]:
    """The recursive free basis W_m of the level-m kernel.

    W_0 = S.  Going up a level with active coordinate j and factor f, the
    kernel is the preimage of 0 under W_{m-1} -> Z/f, w -> (exponent of s_j
    in w) / M with M = N(m-1, j).  Its Schreier basis for the transversal
    s_j^{lM} (0 <= l < f) is s_j^{fM} together with
    s_j^{lM} w s_j^{-((l + e(w)) mod f) M} for the other w in W_{m-1}.
    When every such w has e(w) = 0 this is the set of conjugates
    s_j^{lM} w s_j^{-lM}.
    """
    basis: list[Letters] = [(i,) for i in range(1, spec.n + 1)]
    for level in range(1, m + 1):
        j, f = spec.levels[level - 1]
        big_m = spec.moduli(level - 1)[j - 1]
        old = power_letters((j,), big_m)

        def element(w: Letters, l: int) -> Letters:
            shift = (_exponent(w, j) // big_m) % f
            head = mul_letters(power_letters((j,), l * big_m), w)
            return mul_letters(head, power_letters((-j,), ((l + shift) % f) * big_m))

        nxt = [power_letters((j,), f * big_m) if w == old else element(w, 0) for w in basis]
        for l in range(1, f):
            nxt.extend(element(w, l) for w in basis if w != old)
        basis = nxt
    return basis


def _exponent(w: Sequence[int], j: int) -> int:
    return sum(1 if x == j else -1 if x == -j else 0 for x in w)


def tower_level_graph(spec: OdometerTowerSpec, m: int, cap: int = DEFAULT_VERTEX_CAP) -> TowerLevel:
    size = spec.index(m)
    if size > cap:
        raise ResourceCapError(f"level {m} has index {size}, above the cap {cap}")
    graph = abelian_quotient_graph(spec.n, spec.moduli(m))
    words = tower_basis(spec, m)
    checked = EnumeratedBasis.checked(words, spec.n)
    ok = checked.verified and len(words) == graph.rank and generates_graph_subgroup(words, graph)
    basis = EnumeratedBasis(checked.elements, spec.n, ok)
    schreier = set(checked.elements) == set(graph.basis())
    return TowerLevel(spec, m, graph, basis, schreier)


def level_projection(spec: OdometerTowerSpec, m: int) -> list[int]:
    """Vertex of level m-1 below each vertex of level m."""
    if m < 1:
        raise InputError("projection needs m >= 1")
    hi, lo = spec.moduli(m), spec.moduli(m - 1)
    out = []
    for v in range(spec.index(m)):
        coords = []
        for mod in hi:
            coords.append(v % mod)
            v //= mod
        w = 0
        for c, mod in zip(reversed(coords), reversed(lo)):
            w = w * mod + c % mod
        out.append(w)
    return out


@dataclass
class TowerConnectingMap:
    """Free part of the K_0 map from level m-1 to level m.

    Columns are the level-m free coordinates of the images of the classes
    q_w (w in the level-(m-1) Schreier basis, at the basepoint), which form
    a basis of the level-(m-1) free part when ``source_det`` is +-1.
    """

    m: int
    source_det: int
    matrix: list[list[int]]
    divisors: list[int]


def tower_connecting_map(spec: OdometerTowerSpec, m: int, cap: int = DEFAULT_VERTEX_CAP) -> TowerConnectingMap:
    lower, upper = tower_level_graph(spec, m - 1, cap), tower_level_graph(spec, m, cap)
    k_lo, k_hi = DiagonalKTheory.of(lower.graph), DiagonalKTheory.of(upper.graph)
    below = level_projection(spec, m)
    fiber = [y for y, x in enumerate(below) if x == 0]
    parts = theta_partition(lower.graph)
    src, dst = [], []
    for letter in range(1, lower.graph.rank + 1):
        c = parts[letter]
        src.append(k_lo.free_coordinates(k_lo.class_of(c, 0)))
        image = [0] * k_hi.size
        for y in fiber:
            image = [a + b for a, b in zip(image, k_hi.class_of(c, y))]
        dst.append(k_hi.free_coordinates(image))
    src_m = [list(r) for r in zip(*src)]
    dst_m = [list(r) for r in zip(*dst)]
    divisors = [d for d in smith_normal_form(dst_m).divisors if d]
    return TowerConnectingMap(m, determinant(src_m), dst_m, divisors)


# --- minimality at a finite level ------------------------------------------------


@dataclass
class MinimalityCertificate:
    certified: bool
    depth: int
    word_length_cap: int
    states: list[tuple[Letters, int]]
    # reach[i][j]: least |g| with g.(state i) inside state j, or None
    reach: list[list[Optional[int]]]

    @property
    def status(self) -> str:
        return "certified at level" if self.certified else "not certified at this cap"

    def missing(self) -> Optional[tuple[int, int]]:
        for i, row in enumerate(self.reach):
            for j, x in enumerate(row):
                if x is None:
                    return i, j
        return None


def check_minimality_finite_level(
    graph: SchreierGraph, depth: int, word_length_cap: int, cap: int = 5_000_000
) -> MinimalityCertificate:
    """Reachability between (depth-d cylinder, coset) states.

    g carries the state ([c], x) into ([c'], x') when g.[c] lies inside [c']
    and g.x = x'.  If g cancels all of c the image is the complement of a
    cylinder and lies in no proper cylinder, so only partial cancellation
    counts.  Reduced words g are explored by length.
    """
    if depth < 0 or word_length_cap < 0:
        raise InputError("depth and word length cap must be nonnegative")
    n = graph.n
    cells = [()] if depth == 0 else list(reduced_words(n, depth))
    states = [(c, x) for c in cells for x in range(graph.index)]
    where = {s: i for i, s in enumerate(states)}
    words_per_source = sum(2 * n * (2 * n - 1) ** (l - 1) for l in range(1, word_length_cap + 1)) + 1
    if words_per_source * len(states) > cap:
        raise ResourceCapError(
            f"{len(states)} states x {words_per_source} words exceeds the cap {cap}"
        )
    reach: list[list[Optional[int]]] = []
    for c, x in states:
        row: list[Optional[int]] = [None] * len(states)
        row[where[(c, x)]] = 0
        remaining = len(states) - 1
        # frontier entries: (g as built so far, image word, letters of c left, coset)
        frontier = [((), c, len(c), x)]
        for length in range(1, word_length_cap + 1):
            if not remaining:
                break
            nxt = []
            for g, u, left, y in frontier:
                for s in alphabet(n):
                    if g and g[0] == -s:
                        continue
                    if u and u[0] == -s:
                        u2 = u[1:]
                        left2 = min(left, len(u2))
                    else:
                        u2 = (s,) + u
                        left2 = left
                    if depth and left2 == 0:
                        continue
                    y2 = graph.act_left((s,), y)
                    nxt.append(((s,) + g, u2, left2, y2))
                    if len(u2) >= depth:
                        j = where[(u2[:depth], y2)]
                        if row[j] is None:
                            row[j] = length
                            remaining -= 1
            frontier = nxt
        reach.append(row)
    certified = all(v is not None for row in reach for v in row)
    return MinimalityCertificate(certified, depth, word_length_cap, states, reach)


# --- Pimsner-Voiculescu kernel ----------------------------------------------------


@dataclass
class PVRankResult:
    depth: int
    nullity: int
    columns: int
    rows: int
    merged: int
    residual_rows: int


def pv_matrix_rows(graph: SchreierGraph, depth: int) -> tuple[list[dict[int, int]], int]:
    """Rows of eta: (f_s)_s -> sum_s (f_s - s.f_s), on depth-d step functions.

    Unknowns are indexed by (s, depth-d cell, coset) with s a positive
    generator; one row per depth-(d+1) cell and coset (w, y) reads
    sum_s f_s(cell of w, y) - f_s(cell of s^-1 w, s^-1.y).
    """
    if depth < 0:
        raise InputError("depth must be nonnegative")
    n, size = graph.n, graph.index
    cells = [()] if depth == 0 else list(reduced_words(n, depth))
    cell_id = {c: i for i, c in enumerate(cells)}
    per_s = len(cells) * size

    def var(s: int, c: Letters, x: int) -> int:
        return (s - 1) * per_s + cell_id[c] * size + x

    rows = []
    for w in reduced_words(n, depth + 1):
        for y in range(size):
            row: dict[int, int] = {}
            for s in range(1, n + 1):
                a = var(s, w[:depth], y)
                row[a] = row.get(a, 0) + 1
                shifted = w[1:] if w[0] == s else (-s,) + w
                b = var(s, shifted[:depth], graph.step(y, s))
                row[b] = row.get(b, 0) - 1
            rows.append({k: v for k, v in row.items() if v})
    return rows, n * per_s


def _merge_presolve(rows: list[dict[int, int]], ncols: int) -> tuple[list[dict[int, int]], int]:
    """Exact rank-preserving reduction.

    Two rows that agree except for one entry each, with equal coefficients
    there, differ by c(x_a - x_b); replacing one of them by that difference
    and substituting x_b := x_a keeps the row space.  Each merge lowers the
    rank of the remaining system by one, which the caller adds back.
    """
    parent = list(range(ncols))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    merged = 0
    current = [tuple(sorted(r.items())) for r in rows]
    while True:
        canon = set()
        for r in current:
            acc: dict[int, int] = {}
            for k, v in r:
                k = find(k)
                acc[k] = acc.get(k, 0) + v
            t = tuple(sorted((k, v) for k, v in acc.items() if v))
            if t:
                canon.add(t)
        current = sorted(canon)
        seen: dict[tuple, int] = {}
        changed = False
        for r in current:
            for i, (var, coef) in enumerate(r):
                key = (r[:i] + r[i + 1:], coef)
                other = seen.setdefault(key, var)
                a, b = find(other), find(var)
                if a != b:
                    parent[max(a, b)] = min(a, b)
                    merged += 1
                    changed = True
        if not changed:
            return [dict(r) for r in current], merged


def _rational_rank(rows: list[dict[int, int]]) -> int:
    pivots: dict[int, dict[int, Fraction]] = {}
    rank = 0
    for r in rows:
        row = {k: Fraction(v) for k, v in r.items()}
        while row:
            c = min(row)
            piv = pivots.get(c)
            if piv is None:
                lead = row[c]
                pivots[c] = {k: v / lead for k, v in row.items()}
                rank += 1
                break
            f = row[c]
            for k, v in piv.items():
                nv = row.get(k, 0) - f * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
    return rank


def pv_kernel_rank(graph: SchreierGraph, depth: int) -> PVRankResult:
    """Exact nullity of eta on depth-d step functions (a lower bound for K_1)."""
    rows, ncols = pv_matrix_rows(graph, depth)
    residual, merged = _merge_presolve(rows, ncols)
    rank = merged + _rational_rank(residual)
    return PVRankResult(depth, ncols - rank, ncols, len(rows), merged, len(residual))


def pv_target(graph: SchreierGraph) -> int:
    """Closed-form K_1 rank (n-1) * index + 1 of the diagonal action."""
    return (graph.n - 1) * graph.index + 1


__all__ = [
    "CyclicSystem",
    "INF",
    "MinimalityCertificate",
    "OdometerTowerSpec",
    "PVRankResult",
    "TowerConnectingMap",
    "TowerLevel",
    "check_minimality_finite_level",
    "level_projection",
    "odometer_level",
    "pv_kernel_rank",
    "pv_matrix_rows",
    "pv_target",
    "tower_basis",
    "tower_connecting_map",
    "tower_level_graph",
]
