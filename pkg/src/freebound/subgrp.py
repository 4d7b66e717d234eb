"""Finite-index subgroups of F_n as Schreier coset graphs.

Vertices are cosets ``Hg`` with basepoint 0 (the subgroup itself); the edge
labelled ``s`` at ``v`` goes to ``v.s``.  A word lies in the subgroup exactly
when its path from the basepoint closes up.  A spanning tree fixes a
transversal, and every edge outside the tree contributes one free generator
``t_v s t_{v.s}^-1`` of the subgroup.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import InputError, ResourceCapError
from .supernat import is_prime
from .words import Letters, alphabet, inverse_letters, mul_letters, reduce_letters, render

DEFAULT_VERTEX_CAP = 200_000


@dataclass(frozen=True)
class SchreierGraph:
    """Coset graph with a rooted spanning tree.

    ``edges[v][i-1]`` is the target of the ``s_i`` edge at ``v``.  ``parent[v]``
    is ``(u, x)`` with ``u.x = v`` for the tree edge entering ``v``; the root
    has ``None``.  When ``parent`` is omitted a breadth-first tree is built,
    exploring letters in the order s1, s1^-1, s2, s2^-1, ...
    """

    n: int
    edges: tuple[tuple[int, ...], ...]
    parent: Optional[tuple[Optional[tuple[int, int]], ...]] = None
    inverse_edges: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    transversal: tuple[Letters, ...] = field(init=False, repr=False, compare=False)
    basis_edges: tuple[tuple[int, int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        n, k = self.n, len(self.edges)
        if n < 2:
            raise InputError(f"ambient rank must be at least 2, got {n}")
        if k == 0:
            raise InputError("a coset graph needs at least one vertex")
        edges = tuple(tuple(int(t) for t in row) for row in self.edges)
        inv = [[-1] * n for _ in range(k)]
        for v, row in enumerate(edges):
            if len(row) != n:
                raise InputError(f"vertex {v} has {len(row)} edges, expected {n}")
            for i, t in enumerate(row):
                if not 0 <= t < k:
                    raise InputError(f"edge target {t} out of range")
                if inv[t][i] != -1:
                    raise InputError(f"generator {i + 1} does not act by a permutation")
                inv[t][i] = v
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "inverse_edges", tuple(tuple(r) for r in inv))

        parent = self.parent
        if parent is None:
            parent = self._bfs_tree()
        else:
            parent = tuple(None if p is None else (int(p[0]), int(p[1])) for p in parent)
        object.__setattr__(self, "parent", parent)
        self._check_tree()

        trans: list[Optional[Letters]] = [None] * k
        trans[0] = ()
        for v in self._tree_order():
            if v != 0:
                u, x = parent[v]
                trans[v] = trans[u] + (x,)
        object.__setattr__(self, "transversal", tuple(trans))

        tree_edges = set()
        for v, p in enumerate(parent):
            if p is not None:
                u, x = p
                tree_edges.add((u, x) if x > 0 else (v, -x))
        basis = [
            (v, i)
            for v in range(k)
            for i in range(1, n + 1)
            if (v, i) not in tree_edges
        ]
        object.__setattr__(self, "basis_edges", tuple(basis))

    # construction helpers -------------------------------------------------

    def _bfs_tree(self) -> tuple[Optional[tuple[int, int]], ...]:
        k = len(self.edges)
        parent: list[Optional[tuple[int, int]]] = [None] * k
        seen = [False] * k
        seen[0] = True
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for x in alphabet(self.n):
                u = self.step(v, x)
                if not seen[u]:
                    seen[u] = True
                    parent[u] = (v, x)
                    queue.append(u)
        if not all(seen):
            orbit = sorted(v for v in range(k) if seen[v])
            raise InputError(f"action is not transitive; orbit of the basepoint is {orbit}")
        return tuple(parent)

    def _tree_order(self) -> list[int]:
        children: dict[int, list[int]] = {}
        for v, p in enumerate(self.parent):
            if p is not None:
                children.setdefault(p[0], []).append(v)
        order, stack = [], [0]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(children.get(v, []))
        return order

    def _check_tree(self) -> None:
        k = len(self.edges)
        if len(self.parent) != k or self.parent[0] is not None:
            raise InputError("tree must give one parent entry per vertex with the root first")
        for v, p in enumerate(self.parent):
            if v and p is None:
                raise InputError(f"vertex {v} has no tree parent")
            if p is not None and self.step(p[0], p[1]) != v:
                raise InputError(f"tree edge {p} does not reach vertex {v}")
        if len(self._tree_order()) != k:
            raise InputError("tree edges do not form a tree rooted at the basepoint")

    # queries --------------------------------------------------------------

    @property
    def index(self) -> int:
        return len(self.edges)

    @property
    def rank(self) -> int:
        """Rank of the subgroup: one free generator per non-tree edge."""
        return len(self.basis_edges)

    def step(self, v: int, x: int) -> int:
        return self.edges[v][x - 1] if x > 0 else self.inverse_edges[v][-x - 1]

    def walk(self, v: int, w: Sequence[int]) -> int:
        for x in w:
            v = self.step(v, x)
        return v

    def act_left(self, g: Sequence[int], v: int) -> int:
        """Left action of g on left cosets; identified with v.g^-1 here."""
        return self.walk(v, inverse_letters(tuple(g)))

    def basis(self) -> list[Letters]:
        t = self.transversal
        return [
            mul_letters(mul_letters(t[v], (i,)), inverse_letters(t[self.edges[v][i - 1]]))
            for v, i in self.basis_edges
        ]

    def basis_letter(self, v: int, x: int) -> Optional[int]:
        """Signed 1-based basis index crossed by the edge (v, x), or None for tree edges."""
        if x > 0:
            key = (v, x)
            sign = 1
        else:
            key = (self.step(v, x), -x)
            sign = -1
        pos = self._edge_pos().get(key)
        return None if pos is None else sign * (pos + 1)

    def _edge_pos(self) -> dict[tuple[int, int], int]:
        cache = self.__dict__.get("_edge_pos_cache")
        if cache is None:
            cache = {e: j for j, e in enumerate(self.basis_edges)}
            object.__setattr__(self, "_edge_pos_cache", cache)
        return cache

    def contains(self, w: Sequence[int]) -> bool:
        return self.walk(0, w) == 0

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "edges": [list(r) for r in self.edges],
            "tree": [None if p is None else list(p) for p in self.parent],
        }

    @classmethod
    def from_json(cls, obj: dict) -> SchreierGraph:
        try:
            tree = obj.get("tree")
            return cls(
                int(obj["n"]),
                tuple(tuple(r) for r in obj["edges"]),
                None if tree is None else tuple(None if p is None else tuple(p) for p in tree),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed graph: {exc}") from exc


def from_permutations(n: int, perms: Sequence[Sequence[int]]) -> SchreierGraph:
    """Coset graph of the stabilizer of point 0 under the given permutations.

    ``perms[i][x]`` is the image of x under s_{i+1}; points act on the right.
    """
    if len(perms) != n:
        raise InputError(f"expected {n} permutations, got {len(perms)}")
    size = len(perms[0]) if perms else 0
    for p in perms:
        if sorted(p) != list(range(size)):
            raise InputError(f"{list(p)} is not a permutation of 0..{size - 1}")
    edges = tuple(tuple(perms[i][x] for i in range(n)) for x in range(size))
    return SchreierGraph(n, edges)


def cyclic_kernel(n: int, j: int, k: int) -> SchreierGraph:
    """Kernel of F_n -> Z_k sending s_j to 1 and the other generators to 0.

    The tree is the path of s_j edges 0 -> 1 -> ... -> k-1, so the basis is
    s_j^k together with s_j^l t s_j^-l for the other generators t.
    """
    if k < 1 or not 1 <= j <= n:
        raise InputError(f"need k >= 1 and 1 <= j <= n, got n={n}, j={j}, k={k}")
    edges = tuple(
        tuple((v + 1) % k if i == j else v for i in range(1, n + 1)) for v in range(k)
    )
    parent = (None,) + tuple((v - 1, j) for v in range(1, k))
    return SchreierGraph(n, edges, parent)


def abelian_quotient_graph(n: int, moduli: Sequence[int]) -> SchreierGraph:
    """Kernel of F_n -> Z/m_1 + ... + Z/m_k sending s_j to the j-th generator
    (generators past k map to 0).

    Vertices are coordinate vectors in mixed radix with the first coordinate
    varying fastest.  The tree walks s_1 along the first coordinate, then
    s_2 along the second, and so on, so the transversal of x is
    s_1^{x_1} s_2^{x_2} ... and the single-coordinate case agrees with
    :func:`cyclic_kernel`.
    """
    k = len(moduli)
    if k > n or any(m < 1 for m in moduli):
        raise InputError(f"invalid moduli {list(moduli)} for rank {n}")
    size = 1
    for m in moduli:
        size *= m

    def decode(v: int) -> list[int]:
        out = []
        for m in moduli:
            out.append(v % m)
            v //= m
        return out

    def encode(x: Sequence[int]) -> int:
        v = 0
        for c, m in zip(reversed(x), reversed(moduli)):
            v = v * m + c
        return v

    edges = []
    parent: list[Optional[tuple[int, int]]] = []
    for v in range(size):
        x = decode(v)
        row = []
        for i in range(1, n + 1):
            if i <= k:
                y = list(x)
                y[i - 1] = (y[i - 1] + 1) % moduli[i - 1]
                row.append(encode(y))
            else:
                row.append(v)
        edges.append(tuple(row))
        # tree parent: decrement the last nonzero coordinate
        nz = [c for c in range(k) if x[c]]
        if not nz:
            parent.append(None)
        else:
            c = nz[-1]
            y = list(x)
            y[c] -= 1
            parent.append((encode(y), c + 1))
    return SchreierGraph(n, tuple(edges), tuple(parent))


def mod_q_abelian_kernel(
    graph: SchreierGraph, q: int, cap: int = DEFAULT_VERTEX_CAP
) -> SchreierGraph:
    """Kernel of H -> H^ab / q H^ab for the subgroup H of ``graph``, as an
    ambient coset graph with index multiplied by q^rank(H)."""
    if not is_prime(q):
        raise InputError(f"{q} is not prime")
    r = graph.rank
    if r < 1:
        raise InputError("subgroup has rank 0")
    size = graph.index * q**r
    if size > cap:
        raise ResourceCapError(f"kernel has index {size}, above the cap {cap}")
    fiber = q**r
    pos = graph._edge_pos()
    edges = []
    for vid in range(size):
        v, c = divmod(vid, fiber)
        row = []
        for i in range(1, graph.n + 1):
            u = graph.edges[v][i - 1]
            j = pos.get((v, i))
            if j is None:
                row.append(u * fiber + c)
            else:
                digit = (c // q**j) % q
                c2 = c + (((digit + 1) % q) - digit) * q**j
                row.append(u * fiber + c2)
        edges.append(tuple(row))
    return SchreierGraph(graph.n, tuple(edges))


def rewrite_in_basis(graph: SchreierGraph, w: Sequence[int]) -> Optional[tuple[int, ...]]:
    """Basis letters crossed by the loop of w at the basepoint, or None if w
    is not in the subgroup.  Letters are signed 1-based basis indices."""
    v = 0
    out: list[int] = []
    for x in w:
        b = graph.basis_letter(v, x)
        if b is not None:
            out.append(b)
        v = graph.step(v, x)
    if v != 0:
        return None
    return reduce_letters(out)


def evaluate_basis_word(graph: SchreierGraph, u: Sequence[int]) -> Letters:
    basis = graph.basis()
    out: Letters = ()
    for b in u:
        piece = basis[abs(b) - 1]
        out = mul_letters(out, piece if b > 0 else inverse_letters(piece))
    return out


# --- Stallings folding ----------------------------------------------------------


@dataclass(frozen=True)
class FoldedGraph:
    """Deterministic labelled graph obtained by folding petals of words."""

    n: int
    vertices: int
    edges: tuple[tuple[int, int, int], ...]  # (source, positive letter, target)

    @property
    def betti(self) -> int:
        return len(self.edges) - self.vertices + 1

    def is_covering(self) -> bool:
        """Every vertex carries all 2n letters: the subgroup has finite index."""
        out = {(s, x) for s, x, _ in self.edges}
        inn = {(t, x) for _, x, t in self.edges}
        return all(
            (v, x) in out and (v, x) in inn for v in range(self.vertices) for x in range(1, self.n + 1)
        )


def stallings_fold(words: Sequence[Sequence[int]], n: int) -> FoldedGraph:
    parent: list[int] = [0]

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    raw: list[tuple[int, int, int]] = []
    for w in words:
        w = reduce_letters(w)
        cur = 0
        for idx, x in enumerate(w):
            if idx == len(w) - 1:
                nxt = 0
            else:
                nxt = len(parent)
                parent.append(nxt)
            if x > 0:
                raw.append((cur, x, nxt))
            else:
                raw.append((nxt, -x, cur))
            cur = nxt
    changed = True
    while changed:
        changed = False
        seen_out: dict[tuple[int, int], int] = {}
        seen_in: dict[tuple[int, int], int] = {}
        for s, x, t in raw:
            s, t = find(s), find(t)
            for table, key, val in ((seen_out, (s, x), t), (seen_in, (t, x), s)):
                other = table.get(key)
                if other is None:
                    table[key] = val
                elif find(other) != find(val):
                    parent[find(other)] = find(val)
                    changed = True
    reps = sorted({find(v) for v in range(len(parent))}, key=lambda v: (v != find(0), v))
    relabel = {r: i for i, r in enumerate(reps)}
    edges = sorted({(relabel[find(s)], x, relabel[find(t)]) for s, x, t in raw})
    return FoldedGraph(n, len(reps), tuple(edges))


@dataclass(frozen=True)
class EnumeratedBasis:
    """Ordered list of words; ``verified`` certifies a free basis of the
    subgroup they generate (folded Betti number equals the list length)."""

    elements: tuple[Letters, ...]
    ambient_rank: int
    verified: bool = False

    @classmethod
    def checked(cls, elements: Sequence[Sequence[int]], n: int) -> EnumeratedBasis:
        elems = tuple(reduce_letters(w) for w in elements)
        distinct = len(set(elems)) == len(elems) and all(elems)
        ok = distinct and stallings_fold(elems, n).betti == len(elems)
        return cls(elems, n, ok)

    def rendered(self) -> list[str]:
        return [render(w) for w in self.elements]


def schreier_basis(graph: SchreierGraph) -> EnumeratedBasis:
    return EnumeratedBasis.checked(graph.basis(), graph.n)


def generates_graph_subgroup(words: Sequence[Sequence[int]], graph: SchreierGraph) -> bool:
    """True when the words lie in the subgroup of ``graph`` and generate it."""
    if not all(graph.contains(w) for w in words):
        return False
    folded = stallings_fold(words, graph.n)
    return folded.is_covering() and folded.vertices == graph.index
