"""Command-line interface: JSON requests in, deterministic JSON out.

Every command takes its payload either from flags or, with ``--stdin``, as
one JSON object on standard input.  Exit codes: 0 success, 2 invalid input,
3 resource cap, 4 a decision command answered "no".
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import __version__
from .boundary import ClopenSet, basis_letter_of, intersect, omega, theta_partition, theta_set, union
from .classify import GammaSpec, classify_gammas
from .dynsys import (
    OdometerTowerSpec,
    check_minimality_finite_level,
    pv_kernel_rank,
    pv_target,
    tower_connecting_map,
    tower_level_graph,
)
from .errors import InputError, ResourceCapError
from .ktheory import DiagonalKTheory, connecting_divisors, skyscraper_invariant, tower_invariant
from .subgrp import DEFAULT_VERTEX_CAP, SchreierGraph, abelian_quotient_graph, cyclic_kernel, from_permutations
from .supernat import (
    SN,
    lambda_iso,
    seq_equiv,
    sn_divides,
    sn_gcd,
    sn_lcm,
    sn_mul,
    upsilon_iso,
)
from .words import alphabet, inverse_letters, mul_letters, power_letters, render

EXIT_OK, EXIT_INPUT, EXIT_CAP, EXIT_NO = 0, 2, 3, 4

CITATIONS = {
    "cuntz-krieger": "K-theory of Cuntz-Krieger algebras: K_0 = coker(I - A^t) with unit the all-ones class, K_1 = ker(I - A^t)",
    "schreier": "Schreier index formula: a subgroup of index d in F_n is free of rank d(n - 1) + 1",
    "boundary-presentation": "boundary algebra: K_0 = Z[p_s1] + ... + Z[p_sn] + Z_(n-1)[1], K_1 = Z^n",
    "amplification": "diagonal action with a finite coset space of size k: crossed product is M_k of the boundary algebra of F_m, m = k(n - 1) + 1",
    "pimsner-voiculescu": "Pimsner-Voiculescu sequence: K_1 of C(Z) x F_n is the kernel of (f_s) -> sum_s (f_s - s.f_s)",
    "odometer-invariant": "boundary-odometer product: K_0 = (sum Y(N_i)) + Z^inf + L((n - 1) N_1...N_k), unit 1/(n - 1), K_1 = Z^inf",
    "skyscraper": "tensoring with M_k multiplies the unit class by k",
    "supernatural": "Y(N) and Y(M) are isomorphic iff nN = mM for some naturals n, m; L(N) determines N",
    "sequence-relation": "sequences are related iff a permutation and multipliers with equal products match them",
    "classification": "boundary-odometer products: orbit equivalence, full groups, crossed products and (K_0, [1]) all classify by rank and the sequence relation",
    "kirchberg-phillips": "Kirchberg-Phillips classification of unital UCT Kirchberg algebras",
    "minimality-level": "finite-level reachability certifies minimality at that level only",
}


def _dump(obj: Any, pretty: bool) -> str:
    if pretty:
        return json.dumps(obj, indent=2, sort_keys=True)
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


# --- request models --------------------------------------------------------------------


class Request(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GraphSpec(Request):
    """A transitive coset graph: cyclic kernel, abelian quotient, or explicit permutations."""

    n: int = Field(ge=2)
    index: Optional[int] = Field(default=None, ge=1)
    generator: int = Field(default=1, ge=1)
    moduli: Optional[list[int]] = None
    permutations: Optional[list[list[int]]] = None

    @model_validator(mode="after")
    def _one_source(self) -> GraphSpec:
        given = [x is not None for x in (self.index, self.moduli, self.permutations)]
        if sum(given) > 1:
            raise ValueError("give at most one of index, moduli, permutations")
        return self

    def build(self, cap: int) -> SchreierGraph:
        if self.permutations is not None:
            if len(self.permutations[0] if self.permutations else []) > cap:
                raise ResourceCapError(f"index above the cap {cap}")
            return from_permutations(self.n, self.permutations)
        if self.moduli is not None:
            size = 1
            for m in self.moduli:
                size *= m
            if size > cap:
                raise ResourceCapError(f"index {size} above the cap {cap}")
            return abelian_quotient_graph(self.n, self.moduli)
        k = self.index or 1
        if k > cap:
            raise ResourceCapError(f"index {k} above the cap {cap}")
        return cyclic_kernel(self.n, self.generator, k)


class SnRequest(Request):
    op: Literal["parse", "mul", "lcm", "gcd", "divides", "lambda-iso", "upsilon-iso", "seq-equiv"]
    a: Optional[str] = None
    b: Optional[str] = None
    ns: Optional[list[str]] = None
    ms: Optional[list[str]] = None


class InvariantRequest(Request):
    n: int = Field(ge=2)
    Ns: list[str] = Field(min_length=1)
    skyscraper: int = Field(default=1, ge=1)


class GammaModel(Request):
    n: int = Field(ge=2)
    Ns: list[str] = Field(min_length=1)


class ClassifyRequest(Request):
    a: GammaModel
    b: GammaModel


class CkRequest(GraphSpec):
    pass


class ThetaRequest(GraphSpec):
    pass


class VerifyConnRequest(Request):
    n: int = Field(ge=2)
    k: int = Field(ge=2)


class TowerRequest(Request):
    n: int = Field(ge=2)
    Ns: list[str] = Field(min_length=1)
    levels: Optional[list[tuple[int, int]]] = None
    depth: int = Field(default=3, ge=0)


class PvRankRequest(GraphSpec):
    depth: int = Field(default=2, ge=0)
    through: Optional[int] = Field(default=None, ge=0)


class MinimalityRequest(GraphSpec):
    depth: int = Field(default=2, ge=0)
    word_length_cap: int = Field(default=6, ge=0, alias="wordLengthCap")
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


# --- handlers -----------------------------------------------------------------------------

Result = tuple[dict, int]


def _sn_list(xs: Optional[list[str]], what: str) -> list[SN]:
    if xs is None:
        raise InputError(f"{what} is required")
    return [SN.parse(x) for x in xs]


def _sn(x: Optional[str], what: str) -> SN:
    if x is None:
        raise InputError(f"{what} is required")
    return SN.parse(x)


def run_sn(req: SnRequest, cap: int) -> Result:
    out: dict[str, Any] = {"op": req.op, "citations": [CITATIONS["supernatural"]]}
    code = EXIT_OK
    if req.op == "parse":
        a = _sn(req.a, "a")
        out["result"] = {"canonical": str(a), "json": a.to_json(), "infinite": a.is_infinite()}
    elif req.op in ("mul", "lcm", "gcd"):
        fn = {"mul": sn_mul, "lcm": sn_lcm, "gcd": sn_gcd}[req.op]
        out["result"] = str(fn(_sn(req.a, "a"), _sn(req.b, "b")))
    elif req.op in ("divides", "lambda-iso"):
        fn = sn_divides if req.op == "divides" else lambda_iso
        ok = fn(_sn(req.a, "a"), _sn(req.b, "b"))
        out["result"] = ok
        code = EXIT_OK if ok else EXIT_NO
    elif req.op == "upsilon-iso":
        pair = upsilon_iso(_sn(req.a, "a"), _sn(req.b, "b"))
        out["result"] = None if pair is None else {"n": pair[0], "m": pair[1]}
        code = EXIT_OK if pair else EXIT_NO
    else:
        w = seq_equiv(_sn_list(req.ns, "ns"), _sn_list(req.ms, "ms"))
        out["result"] = None if w is None else w.to_json()
        out["citations"].append(CITATIONS["sequence-relation"])
        code = EXIT_OK if w else EXIT_NO
    return out, code


def run_invariant(req: InvariantRequest, cap: int) -> Result:
    t = tower_invariant(req.n, [SN.parse(x) for x in req.Ns])
    cites = [CITATIONS["odometer-invariant"]]
    if req.skyscraper != 1:
        t = skyscraper_invariant(t, req.skyscraper)
        cites.append(CITATIONS["skyscraper"])
    return {"invariant": t.to_json(), "summary": t.describe(), "citations": cites}, EXIT_OK


def _gamma(m: GammaModel) -> GammaSpec:
    return GammaSpec(m.n, tuple(SN.parse(x) for x in m.Ns))


def run_classify(req: ClassifyRequest, cap: int) -> Result:
    v = classify_gammas(_gamma(req.a), _gamma(req.b))
    out = v.to_json()
    out["citations"] = [CITATIONS[c] for c in ("classification", "sequence-relation", "kirchberg-phillips", "odometer-invariant")]
    return out, EXIT_OK if v.equivalent else EXIT_NO


def run_ck(req: CkRequest, cap: int) -> Result:
    g = req.build(cap)
    kt = DiagonalKTheory.of(g)
    k0 = kt.k0()
    cites = [CITATIONS["cuntz-krieger"], CITATIONS["schreier"]]
    cites.append(CITATIONS["boundary-presentation"] if g.index == 1 else CITATIONS["amplification"])
    return {
        "k0": k0.to_json(),
        "unitOrder": k0.unit_order,
        "k1Rank": kt.k1_rank(),
        "citations": cites,
    }, EXIT_OK


def run_theta(req: ThetaRequest, cap: int) -> Result:
    g = req.build(cap)
    part = theta_partition(g)
    sets = []
    total = ClopenSet.empty(g.n)
    disjoint = True
    for letter in sorted(part.sets, key=lambda x: (abs(x), x < 0)):
        c = part.sets[letter]
        disjoint = disjoint and not _overlaps(total, c)
        total = union(total, c)
        word = g.basis()[abs(letter) - 1]
        sets.append({
            "element": render(word if letter > 0 else inverse_letters(word)),
            "set": c.to_json()["prefixes"],
        })
    return {
        "index": g.index,
        "basis": [render(w) for w in g.basis()],
        "sets": sets,
        "disjoint": disjoint,
        "coversBoundary": total.is_full(),
        "citations": [CITATIONS["schreier"]],
    }, EXIT_OK


def _overlaps(a: ClopenSet, b: ClopenSet) -> bool:
    return not intersect(a, b).is_empty()


def run_verify_conn(req: VerifyConnRequest, cap: int) -> Result:
    n, k = req.n, req.k
    if k > cap:
        raise ResourceCapError(f"index {k} above the cap {cap}")
    g = cyclic_kernel(n, 1, k)
    kt = DiagonalKTheory.of(g)
    ck = kt.cokernel
    s = (1,)

    def theta(w):
        return theta_set(g, basis_letter_of(g, w))

    def q(w):
        return kt.class_of(theta(w), 0)

    # points starting with s split by their first basis letter: s^k and s^l t s^-l
    pieces = [power_letters(s, k)] + [
        mul_letters(mul_letters(power_letters(s, l), (t,)), power_letters((-1,), l))
        for l in range(1, k) for t in alphabet(n) if abs(t) != 1
    ]
    cover = ClopenSet.empty(n)
    disjoint = True
    for w in pieces:
        if _overlaps(cover, theta(w)):
            disjoint = False
        cover = union(cover, theta(w))
    partition_ok = disjoint and cover == omega(n, 1)

    r = kt.class_of(ClopenSet.full(n), 0)
    pairs_ok = all(ck.equal([a + b for a, b in zip(q(w), q(inverse_letters(w)))], r) for w in g.basis())
    unit_ok = ck.equal(kt.unit_vector(), [k * a for a in r])
    shift = k * (k - 1) * (n - 1) // 2
    p_s = kt.class_over_all_cosets(omega(n, 1))
    ps_ok = ck.equal(p_s, [k * a + shift * b for a, b in zip(q(power_letters(s, k)), r)])
    pt_ok = True
    for t in alphabet(n):
        if abs(t) == 1:
            continue
        total = [0] * kt.size
        for l in range(k):
            v = mul_letters(mul_letters(power_letters(s, l), (t,)), power_letters((-1,), l))
            total = [a + b for a, b in zip(total, q(v))]
        pt_ok = pt_ok and ck.equal(kt.class_over_all_cosets(omega(n, t)), total)
    divisors = connecting_divisors(n, k).divisors
    div_ok = divisors == [1] * (n - 1) + [k]
    checks = {
        "omegaIsDisjointUnionOfThetas": partition_ok,
        "inversePairsSumToFiberUnit": pairs_ok,
        "unitIsKTimesFiberUnit": unit_ok,
        "generatorClassFormula": ps_ok,
        "otherGeneratorsSumOverConjugates": pt_ok,
        "connectingDivisors": div_ok,
    }
    out = {
        "n": n,
        "k": k,
        "basis": [render(w) for w in g.basis()],
        "identity": f"[p_a] = {k}[q_{render(power_letters(s, k))}] + {'' if shift == 1 else shift}[r_W]",
        "divisors": divisors,
        "checks": checks,
        "citations": [CITATIONS["cuntz-krieger"], CITATIONS["amplification"]],
    }
    return out, EXIT_OK if all(checks.values()) else EXIT_NO


def run_tower(req: TowerRequest, cap: int) -> Result:
    ns = [SN.parse(x) for x in req.Ns]
    if req.levels is None:
        spec = OdometerTowerSpec.greedy(req.n, ns, req.depth)
    else:
        spec = OdometerTowerSpec(req.n, tuple(ns), tuple(req.levels))
    levels = []
    for m in range(len(spec.levels) + 1):
        level = tower_level_graph(spec, m, cap)
        k0 = DiagonalKTheory.of(level.graph).k0()
        entry = {
            "level": m,
            "moduli": list(spec.moduli(m)),
            "index": level.graph.index,
            "basis": level.basis.rendered(),
            "basisVerified": level.basis.verified,
            "k0": k0.to_json(),
            "unitOrder": k0.unit_order,
        }
        if m:
            entry["connectingDivisors"] = tower_connecting_map(spec, m, cap).divisors
        levels.append(entry)
    t = tower_invariant(req.n, ns)
    return {
        "spec": spec.to_json(),
        "levels": levels,
        "invariant": t.to_json(),
        "summary": t.describe(),
        "citations": [CITATIONS["odometer-invariant"], CITATIONS["cuntz-krieger"], CITATIONS["schreier"]],
    }, EXIT_OK


def run_pv_rank(req: PvRankRequest, cap: int) -> Result:
    g = req.build(cap)
    last = req.depth if req.through is None else max(req.depth, req.through)
    rows = []
    for d in range(req.depth, last + 1):
        cells = 2 * g.n * (2 * g.n - 1) ** d * g.index
        if cells > cap * 10:
            raise ResourceCapError(f"depth {d} needs {cells} equations, above the cap")
        res = pv_kernel_rank(g, d)
        rows.append({"depth": d, "nullity": res.nullity, "columns": res.columns})
    return {
        "index": g.index,
        "target": pv_target(g),
        "ranks": rows,
        "citations": [CITATIONS["pimsner-voiculescu"], CITATIONS["schreier"]],
    }, EXIT_OK


def run_minimality(req: MinimalityRequest, cap: int) -> Result:
    g = req.build(cap)
    cert = check_minimality_finite_level(g, req.depth, req.word_length_cap, cap=cap * 25)
    missing = cert.missing()
    out = {
        "certified": cert.certified,
        "status": cert.status,
        "depth": cert.depth,
        "wordLengthCap": cert.word_length_cap,
        "states": [[render(c) or "e", x] for c, x in cert.states],
        "reach": cert.reach,
        "firstMissing": list(missing) if missing else None,
        "citations": [CITATIONS["minimality-level"]],
    }
    return out, EXIT_OK if cert.certified else EXIT_NO


COMMANDS: dict[str, tuple[type[Request], Callable[[Any, int], Result]]] = {
    "sn": (SnRequest, run_sn),
    "invariant": (InvariantRequest, run_invariant),
    "classify": (ClassifyRequest, run_classify),
    "ck-k": (CkRequest, run_ck),
    "theta": (ThetaRequest, run_theta),
    "verify-conn": (VerifyConnRequest, run_verify_conn),
    "tower": (TowerRequest, run_tower),
    "pv-rank": (PvRankRequest, run_pv_rank),
    "minimality": (MinimalityRequest, run_minimality),
}


def run(command: str, payload: dict, cap: int = DEFAULT_VERTEX_CAP) -> Result:
    """Validate a payload, run the command and return (response, exit code)."""
    if command not in COMMANDS:
        raise InputError(f"unknown command {command!r}")
    model, handler = COMMANDS[command]
    req = model.model_validate(payload)
    body, code = handler(req, cap)
    return {"command": command, "version": __version__, **body}, code


# --- argument parsing ---------------------------------------------------------------------


def _csv(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _gamma_arg(text: str) -> dict:
    """'n:N1,N2' -> {"n": n, "Ns": [N1, N2]}."""
    n, sep, rest = text.partition(":")
    if not sep or not n.strip().isdigit():
        raise argparse.ArgumentTypeError(f"expected n:N1,N2,... got {text!r}")
    return {"n": int(n), "Ns": _csv(rest)}


def _add_graph_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, help="rank of the free group")
    p.add_argument("--index", type=int, help="cyclic kernel index k")
    p.add_argument("--generator", type=int, help="generator mapped to 1 (default 1)")
    p.add_argument("--moduli", help="comma-separated moduli of an abelian quotient")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="freebound", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--stdin", action="store_true", help="read the JSON payload from standard input")
    common.add_argument("--pretty", action="store_true", help="indent the JSON output")
    common.add_argument("--cap", type=int, default=DEFAULT_VERTEX_CAP, help="resource cap (coset count)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("sn", parents=[common], help="supernatural number arithmetic and relations")
    p.add_argument("--op", choices=SnRequest.model_fields["op"].annotation.__args__)
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--ns", type=_csv, help="comma-separated sequence")
    p.add_argument("--ms", type=_csv, help="comma-separated sequence")

    p = sub.add_parser("invariant", parents=[common], help="symbolic (K_0, [1], K_1) of a boundary-odometer product")
    p.add_argument("--n", type=int)
    p.add_argument("--Ns", type=_csv)
    p.add_argument("--skyscraper", type=int)

    p = sub.add_parser("classify", parents=[common], help="decide isomorphism of two systems")
    p.add_argument("--a", type=_gamma_arg, help="n:N1,N2,...")
    p.add_argument("--b", type=_gamma_arg, help="n:N1,N2,...")

    for name, text in (("ck-k", "K-theory of a diagonal action"), ("theta", "first-basis-letter sets of a Schreier basis")):
        p = sub.add_parser(name, parents=[common], help=text)
        _add_graph_flags(p)

    p = sub.add_parser("verify-conn", parents=[common], help="check the cyclic-kernel K_0 identities")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)

    p = sub.add_parser("tower", parents=[common], help="levels of an odometer tower")
    p.add_argument("--n", type=int)
    p.add_argument("--Ns", type=_csv)
    p.add_argument("--depth", type=int)

    p = sub.add_parser("pv-rank", parents=[common], help="Pimsner-Voiculescu kernel rank at finite depth")
    _add_graph_flags(p)
    p.add_argument("--depth", type=int)
    p.add_argument("--through", type=int, help="also compute every depth up to this one")

    p = sub.add_parser("minimality", parents=[common], help="finite-level minimality certificate")
    _add_graph_flags(p)
    p.add_argument("--depth", type=int)
    p.add_argument("--word-length-cap", dest="wordLengthCap", type=int)
    return parser


_NOT_PAYLOAD = {"command", "stdin", "pretty", "cap"}


def _payload_from_flags(ns: argparse.Namespace) -> dict:
    out = {k: v for k, v in vars(ns).items() if k not in _NOT_PAYLOAD and v is not None}
    if "moduli" in out:
        try:
            out["moduli"] = [int(x) for x in _csv(out["moduli"])]
        except ValueError as exc:
            raise InputError("moduli must be integers") from exc
    return out


def main(argv: Optional[list[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        if ns.stdin:
            payload = json.loads(sys.stdin.read() or "{}")
            if not isinstance(payload, dict):
                raise InputError("payload must be a JSON object")
        else:
            payload = _payload_from_flags(ns)
        body, code = run(ns.command, payload, ns.cap)
    except (InputError, ValidationError, json.JSONDecodeError) as exc:
        print(_dump({"error": str(exc), "kind": "input"}, False), file=sys.stderr)
        return EXIT_INPUT
    except ResourceCapError as exc:
        print(_dump({"error": str(exc), "kind": "cap"}, False), file=sys.stderr)
        return EXIT_CAP
    print(_dump(body, ns.pretty))
    return code


def request_schemas() -> dict[str, dict]:
    return {name: model.model_json_schema() for name, (model, _) in COMMANDS.items()}


def export_schemas(directory: Path) -> list[Path]:
    """Write one JSON schema per command request into ``directory``."""
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, schema in request_schemas().items():
        path = directory / f"{name}.request.json"
        path.write_text(json.dumps(schema, indent=2, sort_keys=True) + "\n")
        written.append(path)
    return written


if __name__ == "__main__":
    sys.exit(main())
