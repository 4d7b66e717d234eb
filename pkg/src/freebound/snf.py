"""Smith normal form over the integers with unimodular certificates."""

from __future__ import annotations

from dataclasses import dataclass

Matrix = list[list[int]]


def identity(k: int) -> Matrix:
    return [[int(i == j) for j in range(k)] for i in range(k)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    out = [[0] * cols for _ in a]
    for i, row in enumerate(a):
        acc = out[i]
        for k in range(inner):
            x = row[k]
            if x:
                for j, y in enumerate(b[k]):
                    if y:
                        acc[j] += x * y
    return out


def transpose(a: Matrix, cols: int | None = None) -> Matrix:
    if not a:
        return [[] for _ in range(cols or 0)]
    return [list(r) for r in zip(*a)]


def determinant(a: Matrix) -> int:
    """Fraction-free Gaussian elimination (Bareiss)."""
    m = [list(r) for r in a]
    k = len(m)
    if k == 0:
        return 1
    sign, prev = 1, 1
    for i in range(k - 1):
        if m[i][i] == 0:
            swap = next((r for r in range(i + 1, k) if m[r][i] != 0), None)
            if swap is None:
                return 0
            m[i], m[swap] = m[swap], m[i]
            sign = -sign
        for r in range(i + 1, k):
            for c in range(i + 1, k):
                m[r][c] = (m[r][c] * m[i][i] - m[r][i] * m[i][c]) // prev
        prev = m[i][i]
    return sign * m[k - 1][k - 1]


@dataclass
class SNFResult:
    """``U * M * V == D`` with ``D`` diagonal; ``divisors`` is its diagonal."""

    U: Matrix
    D: Matrix
    V: Matrix
    divisors: list[int]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.divisors if d)

    def verify(self, m: Matrix) -> bool:
        if matmul(matmul(self.U, m), self.V) != self.D:
            return False
        if abs(determinant(self.U)) != 1 or abs(determinant(self.V)) != 1:
            return False
        nz = [d for d in self.divisors if d]
        if any(d < 0 for d in nz) or len(nz) != self.rank or self.divisors[: len(nz)] != nz:
            return False
        return all(b % a == 0 for a, b in zip(nz, nz[1:]))


def smith_normal_form(m: Matrix, cols: int | None = None) -> SNFResult:
    """Certified Smith normal form.

    Pivoting is deterministic: the entry of smallest absolute value in the
    remaining block, first in row-major order, moves to the diagonal.
    ``cols`` is only needed for matrices with zero rows.
    """
    a = [list(map(int, r)) for r in m]
    rows = len(a)
    ncols = len(a[0]) if a else (cols or 0)
    u = identity(rows)
    v = identity(ncols)

    def swap_rows(i: int, j: int) -> None:
        if i != j:
            a[i], a[j] = a[j], a[i]
            u[i], u[j] = u[j], u[i]

    def swap_cols(i: int, j: int) -> None:
        if i != j:
            for r in a:
                r[i], r[j] = r[j], r[i]
            for r in v:
                r[i], r[j] = r[j], r[i]

    def add_row(dst: int, src: int, q: int) -> None:
        # row_dst += q * row_src
        if q:
            ad, asrc = a[dst], a[src]
            for j in range(ncols):
                if asrc[j]:
                    ad[j] += q * asrc[j]
            ud, us = u[dst], u[src]
            for j in range(rows):
                if us[j]:
                    ud[j] += q * us[j]

    def add_col(dst: int, src: int, q: int) -> None:
        if q:
            for r in a:
                if r[src]:
                    r[dst] += q * r[src]
            for r in v:
                if r[src]:
                    r[dst] += q * r[src]

    t = 0
    while t < min(rows, ncols):
        best = None
        for i in range(t, rows):
            row = a[i]
            for j in range(t, ncols):
                x = row[j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        swap_rows(t, best[1])
        swap_cols(t, best[2])
        while True:
            p = a[t][t]
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // p))
                    if a[i][t]:
                        dirty = True
            for j in range(t + 1, ncols):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // p))
                    if a[t][j]:
                        dirty = True
            if dirty:
                # a smaller remainder appeared in row or column t; pivot on it
                best = None
                for i in range(t, rows):
                    x = a[i][t]
                    if x and (best is None or abs(x) < best[0]):
                        best = (abs(x), i, t)
                for j in range(t, ncols):
                    x = a[t][j]
                    if x and abs(x) < best[0]:
                        best = (abs(x), t, j)
                swap_rows(t, best[1])
                swap_cols(t, best[2])
                continue
            bad = next(
                ((i, j) for i in range(t + 1, rows) for j in range(t + 1, ncols) if a[i][j] % p),
                None,
            )
            if bad is None:
                break
            # fold the offending row into row t so the pivot must shrink
            add_row(t, bad[0], 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    divisors = [a[i][i] for i in range(min(rows, ncols))]
    return SNFResult(u, a, v, divisors)
