"""``ccm-lab <command> --spec FILE [--out FILE] [--format json|csv] [--cap N]``.

Exit codes: 0 success, 1 an invariant failed on recomputation (or a
verification check failed), 2 the request could not be parsed or validated,
3 the computation is unsupported for the group or too large, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Optional

from . import __version__
from .coset_ring import CosetRingElement, neumann_check
from .dc import (
    NotFound,
    QuotientChain,
    centralizer_strata,
    commuting_transversal,
    dc_finite,
    dc_rf_chain,
    dc_strata,
    faf_witness,
    pair_of,
    square,
)
from .errors import (
    AtomTooSmall,
    CcmError,
    EnumerationExhausted,
    HypothesisFails,
    InvariantViolation,
    QuotientTooLarge,
    UnsupportedForClass,
)
from .groups import GroupHandle, Subgroup, congruence_subgroup, to_cayley
from .groups.library import DEFAULT_QUOTIENT_CAP
from .groups.base import Coset
from .means import defect_left, defect_right, k_mu, k_uniform, kmu_strata_inequality, smooth_mean
from .specfile import (
    COMMANDS,
    REPORT_VERSION,
    ParseError,
    RunRequest,
    SchemaError,
    emit_csv,
    emit_json,
    parse_atoms,
    parse_coset,
    parse_element,
    parse_mean,
    parse_pair,
    parse_rational,
    parse_spec,
    parse_subgroup,
)
from .witness import (
    build_witness,
    disjoint_translates_witness,
    folner_amplify,
    folner_ratio,
    folner_set,
    recompute_certificate,
)

EXIT_OK, EXIT_INVARIANT, EXIT_PARSE, EXIT_UNSUPPORTED, EXIT_IO = 0, 1, 2, 3, 4


# ---- serialization helpers ------------------------------------------------------------

def _elem(G: GroupHandle, x) -> Any:
    """Coordinates of an element; Cayley elements are written by label."""
    return G.format(x) if hasattr(G, "labels") else x


def _subgroup(H: Subgroup) -> dict:
    G = H.group
    idx = H.index()
    return {"generators": [_elem(G, x) for x in G._sub_gens(H.key)],
            "index": int(idx) if idx.is_finite else "inf"}


def _coset(c: Coset) -> dict:
    return {"subgroup": _subgroup(c.subgroup), "rep": _elem(c.group, c.rep)}


def _ring(A: CosetRingElement) -> dict:
    return {"denominator": _subgroup(A.denominator),
            "reps": [_elem(A.group, c.rep) for c in A.finite_cosets()],
            "infinite": [_coset(c) for c in A.infinite_cosets()],
            "measure": A.measure()}


def _finite(G: GroupHandle, cap: int):
    if not G.is_finite:
        raise UnsupportedForClass(f"{G.name} is infinite; use dc-strata or dc-rf")
    return to_cayley(G, cap)


# ---- commands --------------------------------------------------------------------------

def cmd_dc(req: RunRequest, cap: int) -> dict:
    return {"dc": dc_finite(_finite(req.group, cap))}


def cmd_dc_strata(req: RunRequest, cap: int) -> dict:
    return {"dc": dc_strata(req.group)}


def cmd_dc_rf(req: RunRequest, cap: int) -> dict:
    G, p = req.group, req.params
    if "chain" in p:
        subs = [parse_subgroup(G, rec, f"chain member {i}") for i, rec in enumerate(p["chain"])]
        labels = [f"chain[{i}]" for i in range(len(subs))]
    else:
        subs = [congruence_subgroup(G, m) for m in p["moduli"]]
        labels = [f"m={m}" for m in p["moduli"]]
    r = dc_rf_chain(G, QuotientChain(G, subs, cap), cap)
    rows = [{"member": lab, "order": n, "dc": v} for lab, n, v in zip(labels, r.orders, r.values)]
    return {"rows": rows, "nested": r.nested, "monotone": r.monotone, "dominates": r.dominates,
            "dc_strata": r.strata_value}


def cmd_strata(req: RunRequest, cap: int) -> dict:
    G = req.group
    T = centralizer_strata(G)
    T.verify(G.enumerate_elements(2) if not G.is_finite else [])
    rows = [{"m": m, "measure": U.measure()} for m, U in T.strata]
    rows.append({"m": "inf", "measure": T.infinite.measure()})
    strata = {str(m): _ring(U) for m, U in T.strata}
    strata["inf"] = _ring(T.infinite)
    return {"rows": rows, "dc": T.dc(), "strata": strata}


def cmd_neumann(req: RunRequest, cap: int) -> dict:
    G = req.group
    cosets = [parse_coset(G, rec, f"coset {i}") for i, rec in enumerate(req.params["cosets"])]
    res = neumann_check(cosets, G)
    out = {"covers": res.covers, "sum": res.reciprocal_sum,
           "cosets": [_coset(c) for c in cosets]}
    if res.uncovered is not None:
        out["uncovered"] = _elem(G, res.uncovered.coords)
    return out


def _witness_block(G: GroupHandle, ws) -> dict:
    return {"size": len(ws), "elements": [_elem(G, x) for x in ws.raw],
            "rows": [{"i": i, "element": _elem(G, x)} for i, x in enumerate(ws.raw)]}


def cmd_witness(req: RunRequest, cap: int) -> dict:
    G, p = req.group, req.params
    if "constraints" in p:
        cons = [(parse_subgroup(G, rec, f"constraint {i}"), parse_rational(rec["eps"], f"eps of constraint {i}"))
                for i, rec in enumerate(p["constraints"])]
        ws = build_witness(G, cons)
        cert = recompute_certificate(ws, constraints=cons)
        checks = []
        for (H, eps), dev in zip(cons, cert.deviations):
            ok = dev == 0 if H.index().is_finite else dev < eps
            checks.append({"subgroup": _subgroup(H), "eps": eps, "deviation": dev, "ok": ok})
    else:
        atoms = parse_atoms(G, p["atoms"])
        N = p["size"]
        S = [parse_element(G, s, "disjointness element") for s in p.get("disjoint", [])]
        ws = disjoint_translates_witness(G, atoms, N, S)
        cert = recompute_certificate(ws, atoms=atoms, S=S)
        checks = [{"target": t, "deviation": dev, "ok": dev <= Fraction(1, N)}
                  for (_, t), dev in zip(atoms, cert.deviations)]
        checks += [{"translate": k, "disjoint": v, "ok": v} for k, v in sorted(cert.disjoint.items())]
    if not all(c["ok"] for c in checks):
        raise InvariantViolation("witness certificate failed on recomputation")
    return {**_witness_block(G, ws), "certificate": checks}


def cmd_folner(req: RunRequest, cap: int) -> dict:
    G, p = req.group, req.params
    K = [parse_element(G, g, "element of K") for g in p.get("K", [])]
    eps = parse_rational(p["eps"], "eps")
    checks = []
    if "atoms" in p:
        atoms = parse_atoms(G, p["atoms"])
        ws = folner_amplify(G, atoms, K, eps)
        cert = recompute_certificate(ws, atoms=atoms, K=K)
        checks += [{"target": t, "deviation": dev, "ok": dev < eps}
                   for (_, t), dev in zip(atoms, cert.deviations)]
        raw = ws.raw
        extra = {"core_size": ws.core_size, "folner_size": ws.folner_size}
    else:
        raw = [g.coords for g in folner_set(G, K, eps)]
        extra = {}
    for g in K:
        r = folner_ratio(G, raw, g.coords)
        checks.append({"translate": G.format(g.coords), "ratio": r, "ok": r < eps})
    if not all(c["ok"] for c in checks):
        raise InvariantViolation("Følner certificate failed on recomputation")
    return {"size": len(raw), "elements": [_elem(G, x) for x in raw],
            "rows": [{"i": i, "element": _elem(G, x)} for i, x in enumerate(raw)],
            "certificate": checks, **extra}


def cmd_defect(req: RunRequest, cap: int) -> dict:
    mu = parse_mean(req.group, req.params.get("mean"))
    return {"left": defect_left(mu), "right": defect_right(mu)}


def cmd_smooth(req: RunRequest, cap: int) -> dict:
    mu = parse_mean(req.group, req.params.get("mean"))
    rows = [{"step": 0, "left": defect_left(mu), "right": defect_right(mu)}]
    for k in range(1, req.params.get("n", 1) + 1):
        mu = smooth_mean(mu)
        rows.append({"step": k, "left": defect_left(mu), "right": defect_right(mu)})
    return {"rows": rows, "mean": mu.to_labels()}


def cmd_kmu(req: RunRequest, cap: int) -> dict:
    G = req.group
    mu = parse_mean(G, req.params.get("mean"))
    rows = []
    for n in range(1, req.params.get("n", G.order) + 1):
        r = kmu_strata_inequality(G, mu, n)
        rows.append({"n": n, "lhs": r.lhs, "rhs": r.rhs, "holds": r.holds})
    if not all(r["holds"] for r in rows):
        raise InvariantViolation("(n+1) k_mu <= 1 + n mu(X_n) failed")
    return {"k_mu": k_mu(G, mu), "k_uniform": k_uniform(G), "rows": rows}


def cmd_transversal(req: RunRequest, cap: int) -> dict:
    H = req.group
    H2 = square(H)
    K = H2.subgroup([parse_pair(H, H2, x, "generator of K") for x in req.params["K"]])
    g = parse_pair(H, H2, req.params["g"], "g")
    c = commuting_transversal(H, K, g)
    if c is NotFound:
        return {"found": False}
    a, b = pair_of(H, c)
    if H.table[a][b] != H.table[b][a] or c not in H2.coset(K, g):
        raise InvariantViolation("returned pair does not commute or is outside the coset")
    return {"found": True, "pair": [H.labels[a], H.labels[b]]}


def cmd_faf(req: RunRequest, cap: int) -> dict:
    w = faf_witness(req.group)
    if w.is_faf:
        if not all(w.checks.values()):
            raise InvariantViolation("FAF witness failed its checks")
        return {"is_faf": True, "n0": _subgroup(w.n0), "h0": _subgroup(w.h0), "checks": w.checks}
    return {"is_faf": False, "reason": w.reason, "evidence": [str(e) for e in w.evidence]}


def cmd_verify_all(req: RunRequest, cap: int) -> dict:
    from .verify import run_all

    results = run_all(seed=req.params.get("seed", 0), echo=lambda s: print(s, file=sys.stderr))
    rows = [{"criterion": r.number, "name": r.name, "passed": r.passed, "detail": r.detail}
            for r in results]
    out = {"rows": rows, "passed": all(r.passed for r in results)}
    if not out["passed"]:
        raise _VerifyFailed(out)
    return out


class _VerifyFailed(Exception):
    def __init__(self, result: dict):
        super().__init__("some acceptance criteria failed")
        self.result = result


DISPATCH: dict[str, Callable[[RunRequest, int], dict]] = {
    "dc": cmd_dc,
    "dc-strata": cmd_dc_strata,
    "dc-rf": cmd_dc_rf,
    "strata": cmd_strata,
    "neumann-check": cmd_neumann,
    "witness": cmd_witness,
    "folner": cmd_folner,
    "defect": cmd_defect,
    "smooth": cmd_smooth,
    "kmu": cmd_kmu,
    "transversal": cmd_transversal,
    "faf-witness": cmd_faf,
    "verify-all": cmd_verify_all,
}
assert set(DISPATCH) == set(COMMANDS)


def dispatch(req: RunRequest, cap: int = DEFAULT_QUOTIENT_CAP) -> dict:
    """Run a validated request and return the report (timing included)."""
    t0 = time.perf_counter()
    result = DISPATCH[req.command](req, cap)
    return {"command": req.command, "report_version": REPORT_VERSION, "version": __version__,
            "group": req.group.name if req.group is not None else None, "result": result,
            "timing_seconds": round(time.perf_counter() - t0, 6)}


def error_code(exc: BaseException) -> int:
    if isinstance(exc, (ParseError, SchemaError)):
        return EXIT_PARSE
    if isinstance(exc, (UnsupportedForClass, QuotientTooLarge, HypothesisFails, EnumerationExhausted,
                        AtomTooSmall)):
        return EXIT_UNSUPPORTED
    if isinstance(exc, (InvariantViolation, _VerifyFailed)):
        return EXIT_INVARIANT
    if isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, CcmError):
        return EXIT_PARSE
    raise exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ccm-lab", description="Exact coset-ring and commutativity computations.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--spec", help="request file (TOML); optional for verify-all")
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--cap", type=int, default=DEFAULT_QUOTIENT_CAP, help="largest finite quotient to build")
    ap.add_argument("--version", action="version", version=f"ccm-lab {__version__}")
    return ap


def _write(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(out).write_text(text, encoding="utf-8")


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    report: Optional[dict] = None
    code = EXIT_OK
    try:
        if args.spec is None:
            if args.command != "verify-all":
                raise SchemaError(f"{args.command} needs --spec FILE")
            req = RunRequest("verify-all")
        else:
            text = Path(args.spec).read_text(encoding="utf-8")
            req = parse_spec(text, args.command, str(Path(args.spec).parent))
        req.out, req.fmt = args.out, args.format
        report = dispatch(req, args.cap)
    except _VerifyFailed as exc:
        code = EXIT_INVARIANT
        report = {"command": "verify-all", "report_version": REPORT_VERSION, "version": __version__,
                  "group": None, "result": exc.result}
    except (CcmError, OSError, ValueError) as exc:
        if isinstance(exc, ValueError) and not isinstance(exc, CcmError):
            exc = SchemaError(str(exc))
        print(f"ccm-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return error_code(exc)
    try:
        text = emit_json(report) if args.format == "json" else emit_csv(report)
        _write(text, args.out)
    except OSError as exc:
        print(f"ccm-lab: cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
