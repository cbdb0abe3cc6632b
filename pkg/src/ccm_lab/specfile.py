"""Run requests: a small TOML format for groups and command parameters.

A request file has an optional top-level ``command``, one ``[group]`` table and
an optional ``[params]`` table::

    command = "dc-rf"

    [group]
    builder = "infinite_dihedral"

    [params]
    moduli = [3, 5, 7]

Group tables are the records accepted by :func:`build_group`.  Elements are
written as their coordinates: a label or index for a Cayley table,
``[[v1, v2], "q"]`` for Z^n ⋊ Q and ``[[nu...], [a...]]`` for a pairing group.
Rationals are written as ``"p/q"`` strings or integers.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import tomli
import tomli_w

from .errors import CcmError
from .groups import FiniteCayley, GroupHandle, Subgroup, build_group, to_cayley

COMMANDS = ("dc", "dc-strata", "dc-rf", "strata", "neumann-check", "witness", "folner", "defect",
            "smooth", "kmu", "transversal", "faf-witness", "verify-all")
NEEDS_FINITE = {"defect", "smooth", "kmu", "transversal"}
REPORT_VERSION = 1


class ParseError(CcmError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line, self.column = line, column


class SchemaError(CcmError):
    pass


@dataclass
class RunRequest:
    command: str
    group_spec: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    out: Optional[str] = None
    fmt: str = "json"
    group: Optional[GroupHandle] = None

    def as_toml(self) -> str:
        doc: dict = {"command": self.command}
        if self.group_spec:
            doc["group"] = self.group_spec
        if self.params:
            doc["params"] = self.params
        return tomli_w.dumps(doc)


# ---- parsing ---------------------------------------------------------------------------

def _load_toml(text: str) -> dict:
    try:
        return tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        msg = str(exc).split(" (at line")[0]
        raise ParseError(msg, getattr(exc, "lineno", None), getattr(exc, "colno", None)) from None


def parse_spec(text: str, command: Optional[str] = None, base_dir: Optional[str] = None) -> RunRequest:
    """Parse and validate a request; the command argument overrides the file.

    ``[group]`` may hold just ``file = "path"``, naming a TOML file (relative to
    ``base_dir``) whose ``[group]`` table is used instead.  A missing file
    raises OSError.
    """
    doc = _load_toml(text)
    unknown = set(doc) - {"command", "group", "params"}
    if unknown:
        raise SchemaError(f"unknown top-level keys: {', '.join(sorted(unknown))}")
    cmd = command or doc.get("command")
    if cmd is None:
        raise SchemaError("no command given")
    if cmd not in COMMANDS:
        raise SchemaError(f"unknown command {cmd!r}")
    if command and doc.get("command") not in (None, command):
        raise SchemaError(f"file is for command {doc['command']!r}, not {command!r}")
    group = dict(doc.get("group", {}))
    if "file" in group:
        if set(group) != {"file"}:
            raise SchemaError("a [group] table with file takes no other keys")
        path = Path(base_dir or ".") / str(group["file"])
        inner = _load_toml(path.read_text(encoding="utf-8"))
        group = dict(inner.get("group", inner))
    req = RunRequest(cmd, group, dict(doc.get("params", {})))
    validate(req)
    return req


def parse_rational(x: Any, what: str) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise SchemaError(f"{what} must be an integer or a \"p/q\" string, got {x!r}")
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError):
        raise SchemaError(f"{what} is not a rational: {x!r}") from None


def _tuplify(x: Any) -> Any:
    return tuple(_tuplify(y) for y in x) if isinstance(x, list) else x


def parse_element(G: GroupHandle, x: Any, what: str = "element"):
    try:
        return G.element(_tuplify(x))
    except (ValueError, TypeError, CcmError) as exc:
        raise SchemaError(f"bad {what}: {exc}") from None


def parse_subgroup(G: GroupHandle, rec: Any, what: str = "subgroup") -> Subgroup:
    """``{generators = [...]}`` or a bare list of generators."""
    gens = rec.get("generators", []) if isinstance(rec, dict) else rec
    if not isinstance(gens, list):
        raise SchemaError(f"{what} needs a list of generators")
    return G.subgroup([parse_element(G, g, f"generator of {what}") for g in gens])


def parse_coset(G: GroupHandle, rec: Any, what: str = "coset"):
    if not isinstance(rec, dict):
        raise SchemaError(f"{what} must be a table with generators and rep")
    H = parse_subgroup(G, rec, what)
    rep = parse_element(G, rec["rep"], f"rep of {what}") if "rep" in rec else G.identity()
    return G.coset(H, rep)


def parse_atoms(G: GroupHandle, recs: Any):
    from .coset_ring import from_cosets

    if not isinstance(recs, list) or not recs:
        raise SchemaError("atoms must be a non-empty list")
    out = []
    for i, rec in enumerate(recs):
        if not isinstance(rec, dict) or "cosets" not in rec or "target" not in rec:
            raise SchemaError(f"atom {i} needs cosets and target")
        cosets = [parse_coset(G, c, f"coset {j} of atom {i}") for j, c in enumerate(rec["cosets"])]
        if not cosets:
            raise SchemaError(f"atom {i} has no cosets")
        out.append((from_cosets(cosets), parse_rational(rec["target"], f"target of atom {i}")))
    return out


def parse_mean(G: FiniteCayley, weights: Any):
    from .means import MeanVector

    if weights is None:
        return MeanVector.uniform(G)
    if not isinstance(weights, dict):
        raise SchemaError("mean must be a table of label = weight")
    try:
        return MeanVector.from_labels(G, {k: parse_rational(v, f"weight of {k}") for k, v in weights.items()})
    except ValueError as exc:
        raise SchemaError(f"bad mean: {exc}") from None


def parse_pair(H: FiniteCayley, H2: FiniteCayley, x: Any, what: str):
    if not isinstance(x, list) or len(x) != 2:
        raise SchemaError(f"{what} must be a pair [h1, h2]")
    a, b = (H._raw(parse_element(H, y, what)) for y in x)
    return H2.element(a * H.order + b)


def validate(req: RunRequest) -> None:
    """Build the group and check every parameter the command will read."""
    from .dc import QuotientChain

    if req.command == "verify-all":
        return
    if not req.group_spec:
        raise SchemaError("missing [group] table")
    try:
        G = build_group(req.group_spec)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad group: {exc}") from None
    except CcmError as exc:
        raise SchemaError(f"bad group: {type(exc).__name__}: {exc}") from None
    p = req.params
    if req.command in NEEDS_FINITE and not isinstance(G, FiniteCayley):
        if not G.is_finite:
            raise SchemaError(f"{req.command} needs a finite group")
        G = to_cayley(G)
    req.group = G
    if req.command == "dc-rf":
        if ("chain" in p) == ("moduli" in p):
            raise SchemaError("dc-rf needs exactly one of chain or moduli")
        if "chain" in p:
            subs = [parse_subgroup(G, rec, f"chain member {i}") for i, rec in enumerate(p["chain"])]
            try:
                chain = QuotientChain(G, subs)
            except CcmError as exc:
                raise SchemaError(f"bad chain: {exc}") from None
            if p.get("require_nested", True):
                for i, ok in enumerate(chain.nested):
                    if not ok:
                        raise SchemaError(f"chain members {i} and {i + 1} are not nested")
        elif not all(isinstance(m, int) and m >= 1 for m in p["moduli"]):
            raise SchemaError("moduli must be positive integers")
    elif req.command == "neumann-check":
        if not isinstance(p.get("cosets"), list):
            raise SchemaError("neumann-check needs a list of cosets")
        for i, rec in enumerate(p["cosets"]):
            parse_coset(G, rec, f"coset {i}")
    elif req.command == "witness":
        if "constraints" in p:
            for i, rec in enumerate(p["constraints"]):
                parse_subgroup(G, rec, f"constraint {i}")
                parse_rational(rec.get("eps"), f"eps of constraint {i}")
        elif "atoms" in p:
            parse_atoms(G, p["atoms"])
            if not isinstance(p.get("size"), int) or p["size"] < 1:
                raise SchemaError("witness with atoms needs a positive integer size")
            for i, s in enumerate(p.get("disjoint", [])):
                parse_element(G, s, f"disjointness element {i}")
        else:
            raise SchemaError("witness needs constraints or atoms")
    elif req.command == "folner":
        for i, g in enumerate(p.get("K", [])):
            parse_element(G, g, f"element {i} of K")
        if parse_rational(p.get("eps"), "eps") <= 0:
            raise SchemaError("eps must be positive")
        if "atoms" in p:
            parse_atoms(G, p["atoms"])
    elif req.command in ("defect", "smooth", "kmu"):
        parse_mean(G, p.get("mean"))
        if "n" in p and (not isinstance(p["n"], int) or p["n"] < 1):
            raise SchemaError("n must be a positive integer")
    elif req.command == "transversal":
        from .dc import square

        H2 = square(G)
        K = p.get("K")
        if not isinstance(K, list):
            raise SchemaError("transversal needs K as a list of pairs")
        for i, x in enumerate(K):
            parse_pair(G, H2, x, f"generator {i} of K")
        parse_pair(G, H2, p.get("g"), "g")


# ---- output ---------------------------------------------------------------------------

def rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def jsonable(x: Any) -> Any:
    if isinstance(x, Fraction):
        return rational(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, bool) or x is None or isinstance(x, (int, str, float)):
        return x
    if hasattr(x, "item"):
        return x.item()
    return str(x)


def emit_json(report: dict) -> str:
    return json.dumps(jsonable(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def emit_csv(report: dict) -> str:
    """The report's ``rows`` table when it has one, else flat key/value pairs."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    rows = report.get("result", {}).get("rows")
    if rows:
        cols = sorted({k for r in rows for k in r})
        w.writerow(cols)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in cols])
    else:
        w.writerow(["key", "value"])
        for k, v in sorted(_flatten(jsonable(report)).items()):
            w.writerow([k, v])
    return buf.getvalue()


def _cell(v: Any) -> str:
    v = jsonable(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return json.dumps(v, sort_keys=True) if isinstance(v, (list, dict)) else ("" if v is None else str(v))


def _flatten(x: Any, prefix: str = "") -> dict:
    out = {}
    if isinstance(x, dict):
        for k, v in x.items():
            out.update(_flatten(v, f"{prefix}.{k}" if prefix else str(k)))
    else:
        out[prefix] = _cell(x)
    return out
