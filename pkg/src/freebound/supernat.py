"""Supernatural numbers and the isomorphism criteria built on them.

A supernatural number is a formal product of prime powers with exponents in
{0, 1, 2, ...} or infinity.  Only numbers that agree with a default exponent
(0 or infinity) at all but finitely many primes are representable.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .errors import InputError

INF = math.inf
Exponent = Union[int, float]


class SupernaturalError(InputError):
    pass


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def factorize(n: int) -> dict[int, int]:
    if n < 1:
        raise SupernaturalError(f"cannot factor {n}")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _check_exponent(e: Exponent) -> Exponent:
    if e == INF:
        return INF
    if isinstance(e, float) or int(e) != e or e < 0:
        raise SupernaturalError(f"bad exponent {e!r}")
    return int(e)


@dataclass(frozen=True)
class SupernaturalNumber:
    default: Exponent = 0
    exceptions: tuple[tuple[int, Exponent], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.default not in (0, INF):
            raise SupernaturalError("default exponent must be 0 or inf")
        default = INF if self.default == INF else 0
        clean: dict[int, Exponent] = {}
        for p, e in self.exceptions:
            if not is_prime(int(p)):
                raise SupernaturalError(f"{p} is not prime")
            e = _check_exponent(e)
            if e != default:
                clean[int(p)] = e
        object.__setattr__(self, "default", default)
        object.__setattr__(self, "exceptions", tuple(sorted(clean.items())))

    # construction ---------------------------------------------------------

    @classmethod
    def of(cls, exps: dict[int, Exponent], default: Exponent = 0) -> SupernaturalNumber:
        return cls(default, tuple(exps.items()))

    @classmethod
    def from_int(cls, n: int) -> SupernaturalNumber:
        return cls.of(factorize(n))

    @classmethod
    def all_primes_infinite(cls) -> SupernaturalNumber:
        return cls(INF)

    @classmethod
    def parse(cls, text: str) -> SupernaturalNumber:
        """Parse forms like ``2^inf*3``, ``6``, ``1`` and ``P^inf*2^3``.

        ``P^inf`` sets every prime to infinity; later factors override single
        primes.  Plain integers are factored.
        """
        text = text.replace(" ", "").replace("∞", "inf")
        if not text:
            raise SupernaturalError("empty supernatural number")
        default: Exponent = 0
        exps: dict[int, Exponent] = {}
        for tok in text.split("*"):
            m = re.fullmatch(r"(P|\d+)(?:\^(inf|\d+))?", tok)
            if not m:
                raise SupernaturalError(f"cannot parse factor {tok!r}")
            base, power = m.group(1), m.group(2)
            e: Exponent = INF if power == "inf" else int(power or 1)
            if base == "P":
                if e != INF:
                    raise SupernaturalError("P only takes the exponent inf")
                default = INF
                continue
            b = int(base)
            if e == INF:
                for p in factorize(b):
                    exps[p] = INF
            elif is_prime(b):
                exps[b] = exps.get(b, 0) + e
            else:
                for p, k in factorize(b).items():
                    exps[p] = exps.get(p, 0) + k * e
        return cls.of(exps, default)

    # queries --------------------------------------------------------------

    def exponent(self, p: int) -> Exponent:
        return dict(self.exceptions).get(p, self.default)

    def primes(self) -> list[int]:
        return [p for p, _ in self.exceptions]

    def is_finite(self) -> bool:
        return self.default == 0 and all(e != INF for _, e in self.exceptions)

    def is_infinite(self) -> bool:
        return not self.is_finite()

    def value(self) -> int:
        if not self.is_finite():
            raise SupernaturalError(f"{self} is not a natural number")
        return math.prod(p**e for p, e in self.exceptions)

    # serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "default": "inf" if self.default == INF else "0",
            "exp": {str(p): ("inf" if e == INF else str(e)) for p, e in self.exceptions},
        }

    @classmethod
    def from_json(cls, obj: Union[dict, str, int]) -> SupernaturalNumber:
        if isinstance(obj, int):
            return cls.from_int(obj)
        if isinstance(obj, str):
            return cls.parse(obj)
        try:
            default = INF if str(obj.get("default", "0")) == "inf" else 0
            if str(obj.get("default", "0")) not in ("0", "inf"):
                raise SupernaturalError(f"bad default {obj.get('default')!r}")
            exps = {
                int(p): (INF if str(e) == "inf" else int(e))
                for p, e in obj.get("exp", {}).items()
            }
        except (AttributeError, ValueError, TypeError) as exc:
            raise SupernaturalError(f"malformed supernatural number {obj!r}") from exc
        return cls.of(exps, default)

    def __str__(self) -> str:
        parts = ["P^inf"] if self.default == INF else []
        for p, e in self.exceptions:
            if e == INF:
                parts.append(f"{p}^inf")
            elif e == 1:
                parts.append(str(p))
            else:
                parts.append(f"{p}^{e}")
        return "*".join(parts) if parts else "1"


SN = SupernaturalNumber


def _as_sn(x: Union[SN, int]) -> SN:
    return x if isinstance(x, SupernaturalNumber) else SN.from_int(x)


def _pointwise(a: SN, b: SN, op) -> SN:
    keys = set(a.primes()) | set(b.primes())
    return SN.of(
        {p: op(a.exponent(p), b.exponent(p)) for p in keys},
        op(a.default, b.default),
    )


def sn_mul(a: Union[SN, int], b: Union[SN, int]) -> SN:
    return _pointwise(_as_sn(a), _as_sn(b), lambda x, y: x + y)


def sn_lcm(a: Union[SN, int], b: Union[SN, int]) -> SN:
    return _pointwise(_as_sn(a), _as_sn(b), max)


def sn_gcd(a: Union[SN, int], b: Union[SN, int]) -> SN:
    return _pointwise(_as_sn(a), _as_sn(b), min)


def sn_divides(a: Union[SN, int], b: Union[SN, int]) -> bool:
    a, b = _as_sn(a), _as_sn(b)
    if a.default > b.default:
        return False
    return all(a.exponent(p) <= b.exponent(p) for p in set(a.primes()) | set(b.primes()))


def sn_product(values: Iterable[Union[SN, int]]) -> SN:
    out = SN()
    for v in values:
        out = sn_mul(out, v)
    return out


def lambda_iso(a: SN, b: SN) -> bool:
    """Isomorphism of the torsion groups attached to a and b: literal equality."""
    return a == b


def upsilon_iso(a: SN, b: SN) -> Optional[tuple[int, int]]:
    """Least (n, m) with n*a = m*b, or None when no naturals work."""
    if a.default != b.default:
        return None
    n = m = 1
    for p in sorted(set(a.primes()) | set(b.primes())):
        x, y = a.exponent(p), b.exponent(p)
        if (x == INF) != (y == INF):
            return None
        if x == INF:
            continue
        if y > x:
            n *= p ** (y - x)
        elif x > y:
            m *= p ** (x - y)
    return n, m


@dataclass(frozen=True)
class SeqEquivWitness:
    """sigma[i] is the 0-based index of the M matched with N_i."""

    sigma: tuple[int, ...]
    n_multipliers: tuple[int, ...]
    m_multipliers: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "sigma": [s + 1 for s in self.sigma],
            "n": list(self.n_multipliers),
            "m": list(self.m_multipliers),
        }


def verify_witness(ns: Sequence[SN], ms: Sequence[SN], w: SeqEquivWitness) -> bool:
    if len(ns) != len(ms) or sorted(w.sigma) != list(range(len(ns))):
        return False
    if math.prod(w.n_multipliers) != math.prod(w.m_multipliers):
        return False
    return all(
        sn_mul(w.n_multipliers[i], ns[i]) == sn_mul(w.m_multipliers[i], ms[w.sigma[i]])
        for i in range(len(ns))
    )


def _witness_for(ns: Sequence[SN], ms: Sequence[SN], sigma: Sequence[int]) -> Optional[SeqEquivWitness]:
    k = len(ns)
    pairs = [(ns[i], ms[sigma[i]]) for i in range(k)]
    if any(a.default != b.default for a, b in pairs):
        return None
    primes = sorted(set().union(*(set(a.primes()) | set(b.primes()) for a, b in pairs)))
    n_mult = [1] * k
    m_mult = [1] * k
    for p in primes:
        slack = 0
        absorber = None
        for i, (a, b) in enumerate(pairs):
            x, y = a.exponent(p), b.exponent(p)
            if (x == INF) != (y == INF):
                return None
            if x == INF:
                if absorber is None:
                    absorber = i
                continue
            d = y - x
            if d > 0:
                n_mult[i] *= p**d
            elif d < 0:
                m_mult[i] *= p ** (-d)
            slack += d
        if slack == 0:
            continue
        if absorber is None:
            return None
        # the index with infinite exponent at p takes the missing factor
        if slack > 0:
            m_mult[absorber] *= p**slack
        else:
            n_mult[absorber] *= p ** (-slack)
    return SeqEquivWitness(tuple(sigma), tuple(n_mult), tuple(m_mult))


def seq_equiv(ns: Sequence[SN], ms: Sequence[SN]) -> Optional[SeqEquivWitness]:
    """Witness that the two sequences are equivalent under ~, or None.

    Permutations are tried in lexicographic order, so the identity is preferred.
    """
    if len(ns) != len(ms):
        return None
    for sn in list(ns) + list(ms):
        if not sn.is_infinite():
            raise SupernaturalError(f"{sn} is finite; sequences must be infinite")
    for sigma in itertools.permutations(range(len(ns))):
        w = _witness_for(ns, ms, sigma)
        if w is not None:
            return w
    return None
