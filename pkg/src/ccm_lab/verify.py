"""The acceptance suite, shared by ``ccm-lab verify-all`` and the test-suite.

Each check compares the engine against an oracle that does not go through the
engine's canonical subgroup data: brute force over Cayley tables, residue
enumeration, finite quotients built from closure of generator images, or
explicit subset enumeration.  Every check has a wall-clock budget and a check
that overruns it is reported as failed.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Callable, Optional

from .coset_ring import from_coset, neumann_check
from .dc import (
    NotFound,
    commuting_transversal,
    dc_finite,
    dc_rf_chain,
    dc_strata,
    faf_witness,
    gallagher_check,
    square,
)
from .errors import AtomTooSmall, InvariantViolation
from .groups import (
    FiniteCayley,
    GroupHandle,
    congruence_subgroup,
    finite_library,
    free_abelian,
    heisenberg_f2,
    infinite_dihedral,
    integral_heisenberg,
    mod2_symplectic,
    quotient,
    to_cayley,
    z2_rot4,
)
from .groups.central_pairing import CentralPairing
from .means import (
    MeanVector,
    conjugacy_partition,
    defect_left,
    defect_left_bruteforce,
    defect_right,
    k_mu,
    k_uniform,
    kmu_strata_inequality,
    random_mean,
    smooth_mean,
)
from .witness import build_witness, disjoint_translates_witness, folner_amplify


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    seconds: float
    budget: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"[{status}] criterion {self.number}: {self.name} in {self.seconds:.1f}s / {self.budget:.0f}s{extra}"


def _fresh_infinite() -> list[GroupHandle]:
    return [free_abelian(1), free_abelian(2), infinite_dihedral(), z2_rot4(), mod2_symplectic(),
            integral_heisenberg()]


# ---- brute-force helpers -----------------------------------------------------------

def _table_commutes(G: FiniteCayley) -> int:
    T = G.table
    return sum(1 for a in range(G.order) for b in range(G.order) if T[a][b] == T[b][a])


def _closure(mul, one, gens) -> set:
    S, frontier = {one}, [one]
    while frontier:
        new = [mul(x, g) for x in frontier for g in gens]
        frontier = [y for y in set(new) if y not in S]
        S.update(frontier)
    return S


def _index_by_quotient(G: GroupHandle, gens: list, cap: int = 2000) -> Optional[int]:
    """[G:H] computed in a finite quotient G/N with N inside H, if one is found.

    N runs over the congruence subgroups; the index is read off as |G/N| over
    the size of the closure of the generator images in the quotient table.
    """
    for m in range(1, 13):
        N = congruence_subgroup(G, m)
        if N.index().is_finite and int(N.index()) > cap:
            return None
        hkey = G._sub_make(gens)
        if not all(G._sub_contains(hkey, x) for x in G._sub_gens(N.key)):
            continue
        Q = quotient(G, N, cap=cap)
        pos = {lab: i for i, lab in enumerate(Q.labels)}
        images = [pos[G.format(G._coset_rep(N.key, g))] for g in gens]
        size = len(_closure(Q._mul, Q.one, images))
        return Q.order // size
    return None


def _no_small_power_inside(G: GroupHandle, key, bound: int = 60) -> bool:
    """No generator of G has a power z^k, 1 <= k <= bound, in H; then [G:H] > bound or is infinite."""
    for z in G._generators():
        x = G.one
        hit = False
        for _ in range(bound):
            x = G._mul(x, z)
            if G._sub_contains(key, x):
                hit = True
                break
        if not hit:
            return True
    return False


# ---- criteria --------------------------------------------------------------------------

def criterion_1(rng: random.Random) -> str:
    """measure(gH) = 1/[G:H] over the subgroup corpus."""
    checked = 0
    for G in finite_library(48):
        for key in G.all_subgroups():
            H = G._wrap(key)
            target = Fraction(len(key), G.order)
            for _ in range(20):
                g = G.element(rng.randrange(G.order))
                if from_coset(G.coset(H, g)).measure() != target:
                    raise InvariantViolation(f"{G.name}: coset of order-{len(key)} subgroup")
                checked += 1
    for n in (1, 2):
        G = heisenberg_f2(n)
        C = to_cayley(G)
        elems = list(G.iter_raw())
        for key in C.all_subgroups():
            H = G.subgroup([G.element(elems[i]) for i in C._sub_gens(key)])
            for _ in range(20):
                g = G.element(elems[rng.randrange(len(elems))])
                if from_coset(G.coset(H, g)).measure() != Fraction(len(key), C.order):
                    raise InvariantViolation(f"{G.name}: coset measure")
                checked += 1
    for G in _fresh_infinite():
        ball = G.enumerate_elements(2)
        for _ in range(25):
            gens = [rng.choice(ball).coords for _ in range(rng.randint(1, 3))]
            H = G.subgroup([G.element(x) for x in gens])
            oracle = _index_by_quotient(G, gens)
            if oracle is None and not _no_small_power_inside(G, H.key):
                continue
            for _ in range(20):
                g = rng.choice(ball)
                m = from_coset(G.coset(H, g)).measure()
                # without a quotient oracle the index is only known to exceed 60
                ok = m == Fraction(1, oracle) if oracle is not None else m <= Fraction(1, 61)
                if not ok:
                    raise InvariantViolation(f"{G.name}: coset of {gens}")
                checked += 1
    return f"{checked} cosets"


def _covers_by_residues(cosets: list[tuple[int, int]]) -> bool:
    L = 1
    for _, m in cosets:
        L = L * m // gcd(L, m)
    return all(any(x % m == r for r, m in cosets) for x in range(L))


def criterion_2(rng: random.Random) -> str:
    """Neumann: no coset cover of Z by at most four cosets has reciprocal sum below 1."""
    Z = free_abelian(1)
    subs = {m: Z.subgroup([Z.element(((m,), 0))]) for m in range(1, 7)}
    pool = [(r, m) for m in range(1, 7) for r in range(m)]
    covers = 0
    for k in range(1, 5):
        for system in itertools.combinations(pool, k):
            res = neumann_check([Z.coset(subs[m], Z.element(((r,), 0))) for r, m in system])
            oracle = _covers_by_residues(list(system))
            if res.covers != oracle:
                raise InvariantViolation(f"cover decision wrong for {system}")
            if oracle:
                covers += 1
                if res.reciprocal_sum < 1:
                    raise InvariantViolation(f"cover {system} with sum {res.reciprocal_sum}")
    three = [Z.coset(subs[2], Z.element(((0,), 0))), Z.coset(subs[4], Z.element(((1,), 0))),
             Z.coset(subs[4], Z.element(((3,), 0)))]
    res = neumann_check(three)
    if not (res.covers and res.reciprocal_sum == 1):
        raise InvariantViolation("three-coset cover not certified")
    return f"{covers} covers among {sum(1 for k in range(1, 5) for _ in itertools.combinations(pool, k))} systems"


def criterion_3(rng: random.Random) -> str:
    lib = finite_library(48)
    for G in lib:
        brute = Fraction(_table_commutes(G), G.order ** 2)
        if not (dc_strata(G) == dc_finite(G) == brute):
            raise InvariantViolation(f"dc mismatch on {G.name}")
    named = {G.name: dc_finite(G) for G in lib}
    expected = {"S3": Fraction(1, 2), "D4": Fraction(5, 8), "Q8": Fraction(5, 8), "S4": Fraction(5, 24)}
    for k, v in expected.items():
        if named.get(k) != v:
            raise InvariantViolation(f"dc({k}) = {named.get(k)}, expected {v}")
    return f"{len(lib)} groups"


def criterion_4(rng: random.Random) -> str:
    D, S, H, W = infinite_dihedral(), mod2_symplectic(), integral_heisenberg(), z2_rot4()
    anchors = {D: Fraction(1, 4), S: Fraction(5, 8), H: Fraction(0), W: Fraction(1, 16)}
    for G, v in anchors.items():
        if dc_strata(G) != v:
            raise InvariantViolation(f"dc_strata({G.name}) = {dc_strata(G)}, expected {v}")
    ks = (3, 5, 7, 9, 11)
    r = dc_rf_chain(D, [congruence_subgroup(D, k) for k in ks])
    if not r.dominates or any(not (Fraction(1, 4) <= v <= Fraction(1, 4) + Fraction(1, k)) for k, v in zip(ks, r.values)):
        raise InvariantViolation(f"dihedral chain {r.values}")
    r = dc_rf_chain(H, [congruence_subgroup(H, p) for p in (2, 3, 5)])
    if r.values != [Fraction(p * p + p - 1, p ** 3) for p in (2, 3, 5)] or not r.dominates:
        raise InvariantViolation(f"Heisenberg chain {r.values}")
    for G in (S, W):
        r = dc_rf_chain(G, [congruence_subgroup(G, m) for m in (2, 4, 6)])
        if not r.dominates:
            raise InvariantViolation(f"{G.name} chain {r.values}")
    return "4 anchors, 4 chains"


def criterion_5(rng: random.Random) -> str:
    corpus = _fresh_infinite() + [heisenberg_f2(1), heisenberg_f2(2)] + finite_library(12)
    for G in corpus:
        if faf_witness(G).is_faf != (dc_strata(G) > 0):
            raise InvariantViolation(f"FAF dichotomy fails on {G.name}")
    return f"{len(corpus)} groups"


def _coset_classes(G, F, key):
    """Left cosets of H met by F, found by pairwise membership tests."""
    reps: list = []
    counts: list = []
    for x in F:
        for i, r in enumerate(reps):
            if G._sub_contains(key, G._mul(G._inv(r), x)):
                counts[i] += 1
                break
        else:
            reps.append(x)
            counts.append(1)
    return counts


def _check_witness_request(G, rng, kind) -> None:
    ball = G.enumerate_elements(2 if not G.is_finite else 0)
    ball1 = G.enumerate_elements(1 if not G.is_finite else 0)

    def random_sub(finite_index=None):
        for _ in range(50):
            H = G.subgroup([rng.choice(ball) for _ in range(rng.randint(1, 2))])
            fi = H.index().is_finite
            if (finite_index is None or fi == finite_index) and (not fi or int(H.index()) <= 8):
                return H
        return G.whole()

    if kind == "build":
        cons = [(random_sub(), Fraction(1, rng.randint(2, 5))) for _ in range(rng.randint(1, 3))]
        w = build_witness(G, cons)
        F = [x.coords for x in w.elements]
        for H, eps in cons:
            counts = _coset_classes(G, F, H.key)
            if H.index().is_finite:
                idx = int(H.index())
                if len(counts) != idx or any(Fraction(c, len(F)) != Fraction(1, idx) for c in counts):
                    raise InvariantViolation(f"{G.name}: finite-index proportions")
            elif max(Fraction(c, len(F)) for c in counts) >= eps:
                raise InvariantViolation(f"{G.name}: infinite-index deviation")
        return
    H = random_sub(True)
    atoms = [(from_coset(G.coset(H, t)), Fraction(1, int(H.index()))) for t in G.transversal(H)]
    if kind == "disjoint":
        N = rng.randint(1, 10)
        S = [] if G.is_finite else rng.sample([g for g in ball1 if g != G.identity()], 2)
        try:
            w = disjoint_translates_witness(G, atoms, N, S)
        except AtomTooSmall:
            if G.is_finite:
                return
            raise
        F = {x.coords for x in w.elements}
        if len(F) != N:
            raise InvariantViolation(f"{G.name}: witness size")
        for A, t in atoms:
            hits = sum(A.contains(x) for x in w.elements)
            if abs(Fraction(hits, N) - t) > Fraction(1, N):
                raise InvariantViolation(f"{G.name}: atom proportion")
        for s in S:
            if any(G._mul(s.coords, x) in F for x in F):
                raise InvariantViolation(f"{G.name}: translate not disjoint")
        return
    heis = isinstance(G, CentralPairing) and not G.is_finite
    eps = Fraction(1, 2) if heis else Fraction(1, rng.randint(2, 3))
    if heis and int(H.index()) > 4:
        H = G.whole()
        atoms = [(from_coset(G.coset(H, G.identity())), Fraction(1))]
    K = rng.sample(ball1, min(2, len(ball1)))
    w = folner_amplify(G, atoms, K, eps)
    F = {x.coords for x in w.elements}
    for g in K:
        gF = {G._mul(g.coords, x) for x in F}
        if Fraction(len(F ^ gF), len(F)) >= eps:
            raise InvariantViolation(f"{G.name}: Følner ratio")
    for A, t in atoms:
        hits = sum(A.contains(x) for x in w.elements)
        if abs(Fraction(hits, len(F)) - t) >= eps:
            raise InvariantViolation(f"{G.name}: amplified proportion")


def criterion_6(rng: random.Random) -> str:
    classes = {
        "finite": [G for G in finite_library(24) if G.order >= 6][:8],
        "virtually_abelian": [free_abelian(1), free_abelian(2), infinite_dihedral(), z2_rot4()],
        "central_pairing": [mod2_symplectic(), integral_heisenberg(), heisenberg_f2(1)],
    }
    kinds = ["build", "build", "disjoint", "disjoint", "amplify"]
    total = 0
    for name, groups in classes.items():
        for i in range(100):
            G = groups[i % len(groups)]
            _check_witness_request(G, rng, kinds[i % len(kinds)])
            total += 1
    return f"{total} requests"


def criterion_7(rng: random.Random) -> str:
    lib = finite_library(12)
    for G in lib:
        if defect_left(MeanVector.uniform(G)) or defect_right(MeanVector.uniform(G)):
            raise InvariantViolation(f"uniform mean on {G.name} has a defect")
        if G.order <= 8:
            for _ in range(50):
                mu = random_mean(G, rng, support=rng.choice([None, 0.5]))
                if defect_left(mu) != defect_left_bruteforce(mu):
                    raise InvariantViolation(f"defect formula on {G.name}")
        for _ in range(100):
            mu = random_mean(G, rng, support=rng.choice([None, 0.3]))
            dl, dr = defect_left(mu), defect_right(mu)
            bar = smooth_mean(mu, check=False)
            dbar = defect_left(bar)
            if dbar > (1 + dr) / 2 * dl or (dr < 1 and dl > 0 and not dbar < dl):
                raise InvariantViolation(f"smoothing on {G.name}")
    return f"{len(lib)} groups"


def criterion_8(rng: random.Random) -> str:
    lib = finite_library(48)
    for G in lib:
        if k_uniform(G) != dc_finite(G):
            raise InvariantViolation(f"k(G) != dc(G) on {G.name}")
        comms = {G._comm(a, b) for a in range(G.order) for b in range(G.order)}
        derived = len(_closure(G._mul, G.one, list(comms)))
        uni = MeanVector.uniform(G)
        if k_mu(G, uni) < Fraction(1, derived):
            raise InvariantViolation(f"k_mu below 1/|G'| on {G.name}")
        for mu in (uni, random_mean(G, rng)):
            for n in range(1, G.order + 1):
                if not kmu_strata_inequality(G, mu, n).holds:
                    raise InvariantViolation(f"k_mu inequality on {G.name}, n = {n}")
        if len(conjugacy_partition(G).classes) * G.order != _table_commutes(G):
            raise InvariantViolation(f"class count on {G.name}")
    return f"{len(lib)} groups"


def criterion_9(rng: random.Random) -> str:
    lib = finite_library(48)
    pairs = 0
    for G in lib:
        d = dc_finite(G)
        if d < 1 and d > Fraction(5, 8):
            raise InvariantViolation(f"dc({G.name}) = {d} above 5/8")
        for key in G.normal_subgroups():
            if not gallagher_check(G, G._wrap(key)).holds:
                raise InvariantViolation(f"Gallagher fails on {G.name}")
            pairs += 1
    return f"{pairs} normal pairs"


def criterion_10(rng: random.Random) -> str:
    G = heisenberg_f2(2)
    elems = list(G.iter_raw())
    H = to_cayley(G)
    H2 = square(H)
    L = [i for i, (nu, a) in enumerate(elems) if a[0] == 0]
    K = H2.subgroup([H2.element(i * H.order) for i in L] + [H2.element(i) for i in L])
    if K.order != len(L) ** 2 or len(L) * 2 != H.order:
        raise InvariantViolation("L is not of index 2")
    cosets = H2.transversal(K)
    for t in cosets:
        c = commuting_transversal(H, K, t)
        if c is NotFound:
            raise InvariantViolation(f"no commuting pair in coset of {t!r}")
        a, b = divmod(c.coords, H.order)
        if H.table[a][b] != H.table[b][a] or c not in H2.coset(K, t):
            raise InvariantViolation("returned pair is wrong")
    return f"{len(cosets)} cosets"


CRITERIA: list[tuple[int, str, float, Callable[[random.Random], str]]] = [
    (1, "coset measures are reciprocal indices", 30, criterion_1),
    (2, "Neumann covers of Z", 10, criterion_2),
    (3, "dc_strata equals brute force on finite groups", 60, criterion_3),
    (4, "infinite-group anchors and quotient chains", 60, criterion_4),
    (5, "FAF dichotomy", 10, criterion_5),
    (6, "witness-set certificates", 60, criterion_6),
    (7, "defects and smoothing", 60, criterion_7),
    (8, "conjugacy classes and k_mu", 30, criterion_8),
    (9, "Gustafson bound and Gallagher inequality", 60, criterion_9),
    (10, "commuting pairs in Heisenberg cosets", 10, criterion_10),
]


def run_criterion(number: int, seed: int = 0) -> CriterionResult:
    for num, name, budget, fn in CRITERIA:
        if num == number:
            rng = random.Random(seed * 1000 + num)
            t0 = time.perf_counter()
            try:
                detail = fn(rng)
                ok = True
            except Exception as exc:  # reported, not raised: the suite always completes
                detail = f"{type(exc).__name__}: {exc}"
                ok = False
            dt = time.perf_counter() - t0
            if ok and dt > budget:
                ok = False
                detail += f"; over budget"
            return CriterionResult(num, name, ok, dt, budget, detail)
    raise KeyError(f"no criterion {number}")


def run_all(seed: int = 0, echo: Optional[Callable[[str], None]] = None) -> list[CriterionResult]:
    out = []
    for num, *_ in CRITERIA:
        r = run_criterion(num, seed)
        if echo:
            echo(r.line())
        out.append(r)
    return out
