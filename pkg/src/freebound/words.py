"""Reduced words in a free group of finite rank, and Nielsen automorphisms.

Letters are nonzero integers: ``i`` stands for the i-th generator and ``-i``
for its inverse.  Words are stored as tuples of letters so they can be hashed
and used as dictionary keys throughout the package.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union

from .errors import InputError

Letters = tuple[int, ...]


class WordError(InputError):
    """Raised for malformed words, rank mismatches and invalid moves."""


def reduce_letters(letters: Iterable[int]) -> Letters:
    """Freely reduce a letter sequence with a single stack pass."""
    out: list[int] = []
    for x in letters:
        if x == 0:
            raise WordError("letter 0 is not a generator")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def mul_letters(a: Letters, b: Letters) -> Letters:
    """Product of two reduced letter tuples, reduced at the junction only."""
    i = 0
    m = min(len(a), len(b))
    while i < m and a[len(a) - 1 - i] == -b[i]:
        i += 1
    return a[: len(a) - i] + b[i:]


def inverse_letters(w: Letters) -> Letters:
    return tuple(-x for x in reversed(w))


def power_letters(w: Letters, k: int) -> Letters:
    if k < 0:
        w, k = inverse_letters(w), -k
    out: Letters = ()
    for _ in range(k):
        out = mul_letters(out, w)
    return out


def alphabet(n: int) -> list[int]:
    """Signed letters in the fixed exploration order s1 < s1^-1 < s2 < ..."""
    out = []
    for i in range(1, n + 1):
        out.extend((i, -i))
    return out


def reduced_words(n: int, length: int, after: int = 0) -> Iterator[Letters]:
    """All reduced words of exactly ``length`` letters whose first letter is
    not ``-after`` (pass ``after=0`` for no constraint)."""
    if length == 0:
        yield ()
        return
    for x in alphabet(n):
        if x == -after:
            continue
        for tail in reduced_words(n, length - 1, x):
            yield (x,) + tail


def render(w: Sequence[int]) -> str:
    """ASCII form: a, b, c, ... with uppercase for inverses; "e" for identity."""
    if not w:
        return "e"
    if max(abs(x) for x in w) > 26:
        return " ".join(str(x) for x in w)
    return "".join(
        string.ascii_lowercase[x - 1] if x > 0 else string.ascii_uppercase[-x - 1]
        for x in w
    )


def parse(text: str) -> Letters:
    """Inverse of :func:`render` for ranks up to 26; the result is reduced."""
    text = text.strip()
    if text in ("", "e"):
        return ()
    out = []
    for ch in text:
        if ch in string.ascii_lowercase:
            out.append(string.ascii_lowercase.index(ch) + 1)
        elif ch in string.ascii_uppercase:
            out.append(-(string.ascii_uppercase.index(ch) + 1))
        else:
            raise WordError(f"unexpected character {ch!r} in word {text!r}")
    return reduce_letters(out)


@dataclass(frozen=True)
class ReducedWord:
    """A freely reduced word together with the rank of the ambient free group."""

    letters: Letters
    rank: int

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise WordError(f"rank must be positive, got {self.rank}")
        letters = tuple(int(x) for x in self.letters)
        for x in letters:
            if x == 0 or abs(x) > self.rank:
                raise WordError(f"letter {x} out of range for rank {self.rank}")
        object.__setattr__(self, "letters", reduce_letters(letters))

    @classmethod
    def identity(cls, rank: int) -> ReducedWord:
        return cls((), rank)

    @classmethod
    def generator(cls, i: int, rank: int) -> ReducedWord:
        return cls((i,), rank)

    @classmethod
    def from_str(cls, text: str, rank: int) -> ReducedWord:
        return cls(parse(text), rank)

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: ReducedWord) -> ReducedWord:
        return multiply(self, other)

    def inverse(self) -> ReducedWord:
        return ReducedWord(inverse_letters(self.letters), self.rank)

    def __pow__(self, k: int) -> ReducedWord:
        return ReducedWord(power_letters(self.letters, k), self.rank)

    def is_identity(self) -> bool:
        return not self.letters

    def __str__(self) -> str:
        return render(self.letters)


def multiply(a: ReducedWord, b: ReducedWord) -> ReducedWord:
    if a.rank != b.rank:
        raise WordError(f"rank mismatch: {a.rank} vs {b.rank}")
    return ReducedWord(mul_letters(a.letters, b.letters), a.rank)


# --- Nielsen moves -----------------------------------------------------------


def _check_gen(i: int, n: int, what: str) -> None:
    if not 1 <= i <= n:
        raise WordError(f"{what} index {i} out of range 1..{n}")


@dataclass(frozen=True)
class Permutation:
    """s_i -> s_{images[i-1]}."""

    images: tuple[int, ...]
    kind = "permutation"

    def validate(self, n: int) -> None:
        if sorted(self.images) != list(range(1, n + 1)):
            raise WordError(f"{list(self.images)} is not a permutation of 1..{n}")

    def image(self, x: int) -> Letters:
        y = self.images[abs(x) - 1]
        return (y,) if x > 0 else (-y,)

    def inverse(self) -> list[Move]:
        inv = [0] * len(self.images)
        for i, y in enumerate(self.images, start=1):
            inv[y - 1] = i
        return [Permutation(tuple(inv))]

    def to_json(self) -> dict:
        return {"kind": self.kind, "images": list(self.images)}


@dataclass(frozen=True)
class Transvection:
    """s_target -> s_by * s_target, where ``by`` may be a signed letter."""

    target: int
    by: int
    kind = "transvection"

    def validate(self, n: int) -> None:
        _check_gen(self.target, n, "target")
        _check_gen(abs(self.by), n, "multiplier")
        if abs(self.by) == self.target:
            raise WordError("transvection multiplier must differ from its target")

    def image(self, x: int) -> Letters:
        if x == self.target:
            return (self.by, x)
        if x == -self.target:
            return (x, -self.by)
        return (x,)

    def inverse(self) -> list[Move]:
        return [Transvection(self.target, -self.by)]

    def to_json(self) -> dict:
        return {"kind": self.kind, "target": self.target, "by": self.by}


@dataclass(frozen=True)
class Inversion:
    """s_gen -> s_gen^-1."""

    gen: int
    kind = "inversion"

    def validate(self, n: int) -> None:
        _check_gen(self.gen, n, "inverted generator")

    def image(self, x: int) -> Letters:
        return (-x,) if abs(x) == self.gen else (x,)

    def inverse(self) -> list[Move]:
        return [self]

    def to_json(self) -> dict:
        return {"kind": self.kind, "gen": self.gen}


@dataclass(frozen=True)
class Conjugation:
    """s_target -> s_by^power * s_target * s_by^-power, other generators fixed."""

    target: int
    by: int
    power: int = 1
    kind = "conjugation"

    def validate(self, n: int) -> None:
        _check_gen(self.target, n, "target")
        _check_gen(self.by, n, "conjugator")
        if self.by == self.target:
            raise WordError("conjugator must differ from its target")

    def image(self, x: int) -> Letters:
        if abs(x) != self.target:
            return (x,)
        t = power_letters((self.by,), self.power)
        return mul_letters(mul_letters(t, (x,)), inverse_letters(t))

    def inverse(self) -> list[Move]:
        return [Conjugation(self.target, self.by, -self.power)]

    def elementary(self) -> list[Move]:
        """The same automorphism as inversions and transvections.

        With phi1: u -> u^-1 and phi2: u -> t u, the composite
        phi2 o phi1 o phi2 o phi1 sends u to t u t^-1; repeating it |power|
        times (or its inverse for negative powers) gives the conjugation.
        """
        one: list[Move] = [
            Inversion(self.target),
            Transvection(self.target, self.by),
            Inversion(self.target),
            Transvection(self.target, self.by),
        ]
        if self.power < 0:
            one = inverse_moves(one)
        return one * abs(self.power)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "target": self.target,
            "by": self.by,
            "power": self.power,
        }


Move = Union[Permutation, Transvection, Inversion, Conjugation]


def move_from_json(obj: dict) -> Move:
    kind = obj.get("kind")
    try:
        if kind == "permutation":
            return Permutation(tuple(int(x) for x in obj["images"]))
        if kind == "transvection":
            return Transvection(int(obj["target"]), int(obj["by"]))
        if kind == "inversion":
            return Inversion(int(obj["gen"]))
        if kind == "conjugation":
            return Conjugation(int(obj["target"]), int(obj["by"]), int(obj.get("power", 1)))
    except (KeyError, TypeError) as exc:
        raise WordError(f"malformed {kind} move: {obj}") from exc
    raise WordError(f"unknown move kind {kind!r}")


def validate_moves(moves: Sequence[Move], n: int) -> None:
    for mv in moves:
        mv.validate(n)


def inverse_moves(moves: Sequence[Move]) -> list[Move]:
    out: list[Move] = []
    for mv in reversed(moves):
        out.extend(mv.inverse())
    return out


def apply_move(mv: Move, w: Letters) -> Letters:
    out: list[int] = []
    for x in w:
        for y in mv.image(x):
            if out and out[-1] == -y:
                out.pop()
            else:
                out.append(y)
    return tuple(out)


def apply_moves(moves: Sequence[Move], w: Letters) -> Letters:
    for mv in moves:
        w = apply_move(mv, w)
    return w


def apply_automorphism(moves: Sequence[Move], w: ReducedWord) -> ReducedWord:
    """Apply the moves in order: the first move acts first."""
    validate_moves(moves, w.rank)
    return ReducedWord(apply_moves(moves, w.letters), w.rank)


def generator_images(moves: Sequence[Move], n: int) -> list[Letters]:
    validate_moves(moves, n)
    return [apply_moves(moves, (i,)) for i in range(1, n + 1)]


def exponent_sums(w: Sequence[int], n: int) -> list[int]:
    v = [0] * n
    for x in w:
        v[abs(x) - 1] += 1 if x > 0 else -1
    return v


def abelianization(moves: Sequence[Move], n: int) -> list[list[int]]:
    """Integer matrix of the induced map on Z^n; column j is the image of e_j."""
    cols = [exponent_sums(img, n) for img in generator_images(moves, n)]
    return [[cols[j][i] for j in range(n)] for i in range(n)]
