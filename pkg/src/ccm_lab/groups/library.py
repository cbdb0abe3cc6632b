"""Builders for the concrete groups used throughout the engine and its tests."""

from __future__ import annotations

import itertools
from collections import deque
from typing import Any, Callable, Hashable, Iterable, Mapping, Optional, Sequence

from ..errors import CcmError, InvalidAction, InvalidPairing, InvalidTable, QuotientTooLarge, UnsupportedForClass
from .base import GroupHandle, Subgroup
from .central_pairing import CentralPairing
from .finite import FiniteCayley
from .virtually_abelian import VirtuallyAbelian

DEFAULT_QUOTIENT_CAP = 10_000


# ---- finite groups ---------------------------------------------------------

def from_closure(gens: Sequence[Hashable], mul: Callable, one: Hashable,
                 label: Callable[[Any], str] = str, name: str = "G",
                 cap: int = DEFAULT_QUOTIENT_CAP) -> FiniteCayley:
    """Close ``gens`` under ``mul``; the identity gets index 0, the rest BFS order."""
    elems = [one]
    pos = {one: 0}
    queue = deque([one])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = mul(x, g)
            if y not in pos:
                if len(elems) >= cap:
                    raise QuotientTooLarge(f"closure exceeds {cap} elements")
                pos[y] = len(elems)
                elems.append(y)
                queue.append(y)
    table = [[pos[mul(a, b)] for b in elems] for a in elems]
    return FiniteCayley([label(x) for x in elems], table, name=name, trusted=True)


def _cycle_label(perm: Sequence[int]) -> str:
    seen = set()
    parts = []
    for i in range(len(perm)):
        if i in seen or perm[i] == i:
            continue
        cyc = []
        j = i
        while j not in seen:
            seen.add(j)
            cyc.append(j + 1)
            j = perm[j]
        parts.append("(" + ("".join if len(perm) < 10 else " ".join)(map(str, cyc)) + ")")
    return "".join(parts) or "()"


def _perm_group(perms: list[tuple], name: str) -> FiniteCayley:
    pos = {p: i for i, p in enumerate(perms)}
    table = [[pos[tuple(a[b[i]] for i in range(len(a)))] for b in perms] for a in perms]
    return FiniteCayley([_cycle_label(p) for p in perms], table, name=name, trusted=True)


def symmetric(n: int) -> FiniteCayley:
    """S_n with product ``(a*b)(i) = a(b(i))``, permutations in lexicographic order."""
    return _perm_group(list(itertools.permutations(range(n))), f"S{n}")


def _parity(p: Sequence[int]) -> int:
    return sum(1 for i, j in itertools.combinations(range(len(p)), 2) if p[i] > p[j]) % 2


def alternating(n: int) -> FiniteCayley:
    return _perm_group([p for p in itertools.permutations(range(n)) if _parity(p) == 0], f"A{n}")


def cyclic(n: int) -> FiniteCayley:
    return FiniteCayley([str(i) for i in range(n)], [[(i + j) % n for j in range(n)] for i in range(n)],
                        name=f"C{n}", trusted=True)


def abelian(moduli: Sequence[int]) -> FiniteCayley:
    elems = list(itertools.product(*[range(m) for m in moduli]))
    pos = {e: i for i, e in enumerate(elems)}
    table = [[pos[tuple((x + y) % m for x, y, m in zip(a, b, moduli))] for b in elems] for a in elems]
    labels = [",".join(map(str, e)) for e in elems]
    return FiniteCayley(labels, table, name="x".join(f"C{m}" for m in moduli), trusted=True)


def dihedral(n: int) -> FiniteCayley:
    """Symmetries of the n-gon, order 2n; elements ``r^k s^e``."""
    elems = [(k, e) for e in range(2) for k in range(n)]
    pos = {x: i for i, x in enumerate(elems)}

    def mul(x, y):
        (k1, e1), (k2, e2) = x, y
        return ((k1 + (-k2 if e1 else k2)) % n, e1 ^ e2)

    def label(x):
        k, e = x
        r = "" if k == 0 else ("r" if k == 1 else f"r^{k}")
        s = "s" if e else ""
        return (r + s) or "e"

    table = [[pos[mul(a, b)] for b in elems] for a in elems]
    return FiniteCayley([label(x) for x in elems], table, name=f"D{n}", trusted=True)


def dicyclic(n: int) -> FiniteCayley:
    """Dic_n of order 4n: ``a^{2n} = 1, x^2 = a^n, x a x^-1 = a^-1`` (Dic_2 = Q8)."""
    m = 2 * n
    elems = [(k, e) for e in range(2) for k in range(m)]
    pos = {x: i for i, x in enumerate(elems)}

    def mul(x, y):
        (k1, e1), (k2, e2) = x, y
        if not e1:
            return ((k1 + k2) % m, e2)
        if not e2:
            return ((k1 - k2) % m, 1)
        return ((k1 - k2 + n) % m, 0)

    def label(x):
        k, e = x
        a = "" if k == 0 else ("a" if k == 1 else f"a^{k}")
        return (a + ("x" if e else "")) or "e"

    table = [[pos[mul(a, b)] for b in elems] for a in elems]
    return FiniteCayley([label(x) for x in elems], table, name="Q8" if n == 2 else f"Dic{n}", trusted=True)


def quaternion() -> FiniteCayley:
    return dicyclic(2)


def _matgroup(gens: list, p: int, name: str) -> FiniteCayley:
    def mul(A, B):
        (a, b), (c, d) = A
        (e, f), (g, h) = B
        return (((a * e + b * g) % p, (a * f + b * h) % p), ((c * e + d * g) % p, (c * f + d * h) % p))

    def label(A):
        return "[" + ";".join(",".join(map(str, r)) for r in A) + "]"

    return from_closure(gens, mul, ((1, 0), (0, 1)), label, name)


def sl2(p: int) -> FiniteCayley:
    return _matgroup([((1, 1), (0, 1)), ((0, p - 1), (1, 0))], p, f"SL(2,{p})")


def gl2(p: int) -> FiniteCayley:
    # a primitive root mod p generates the diagonal part
    g = next(x for x in range(1, p) if all(pow(x, k, p) != 1 for k in range(1, p - 1)))
    return _matgroup([((1, 1), (0, 1)), ((0, p - 1), (1, 0)), ((g, 0), (0, 1))], p, f"GL(2,{p})")


def direct_product(G: FiniteCayley, H: FiniteCayley, name: Optional[str] = None) -> FiniteCayley:
    n, m = G.order, H.order
    labels = [f"({G.labels[i]},{H.labels[j]})" for i in range(n) for j in range(m)]
    table = [[G.table[i][k] * m + H.table[j][l] for k in range(n) for l in range(m)]
             for i in range(n) for j in range(m)]
    return FiniteCayley(labels, table, name=name or f"{G.name}x{H.name}", trusted=True)


def to_cayley(G: GroupHandle, cap: int = DEFAULT_QUOTIENT_CAP) -> FiniteCayley:
    """The Cayley table of a finite group, elements in the group's fixed order."""
    if isinstance(G, FiniteCayley):
        return G
    if not G.is_finite:
        raise UnsupportedForClass("to_cayley needs a finite group")
    if G.order > cap:
        raise QuotientTooLarge(f"order {G.order} exceeds cap {cap}")
    elems = list(G.iter_raw())
    pos = {x: i for i, x in enumerate(elems)}
    table = [[pos[G._mul(a, b)] for b in elems] for a in elems]
    return FiniteCayley([G.format(x) for x in elems], table, name=G.name, trusted=True)


def quotient(G: GroupHandle, N: Subgroup, cap: int = DEFAULT_QUOTIENT_CAP,
             name: Optional[str] = None) -> FiniteCayley:
    """``G/N`` as a Cayley table, elements labelled by canonical coset reps."""
    from ..errors import NotNormal

    key = G._own(N)
    idx = G._sub_index(key)
    if idx is None:
        raise UnsupportedForClass("quotient by an infinite-index subgroup")
    if idx > cap:
        raise QuotientTooLarge(f"quotient order {idx} exceeds cap {cap}")
    if not G._is_normal(key):
        raise NotNormal("subgroup is not normal")
    if isinstance(G, FiniteCayley):
        return G.quotient(key, name)
    reps = G._transversal(key, cap=cap)
    pos = {r: i for i, r in enumerate(reps)}
    table = [[pos[G._coset_rep(key, G._mul(a, b))] for b in reps] for a in reps]
    return FiniteCayley([G.format(r) for r in reps], table, name=name or f"{G.name}/N", trusted=True)


# ---- infinite and pairing groups --------------------------------------------

def _trivial_q() -> FiniteCayley:
    return cyclic(1)


def free_abelian(n: int) -> VirtuallyAbelian:
    ident = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    return VirtuallyAbelian(n, _trivial_q(), [ident], name=f"Z^{n}" if n != 1 else "Z")


def infinite_dihedral() -> VirtuallyAbelian:
    return VirtuallyAbelian(1, cyclic(2), [[[1]], [[-1]]], name="Dinf")


def z2_rot4() -> VirtuallyAbelian:
    """Z^2 ⋊ Z/4 with the generator acting by the quarter turn."""
    R = ((0, -1), (1, 0))
    mats = [((1, 0), (0, 1))]
    for _ in range(3):
        prev = mats[-1]
        mats.append(tuple(tuple(sum(R[i][k] * prev[k][j] for k in range(2)) for j in range(2)) for i in range(2)))
    return VirtuallyAbelian(2, cyclic(4), mats, name="Z2xC4")


def _symplectic_pairing(n: int, value: int = 1) -> list:
    """Standard pairing on coordinates (x_1..x_n, y_1..y_n) with one N-coordinate."""
    r = 2 * n
    P = [[(0,) for _ in range(r)] for _ in range(r)]
    for i in range(n):
        P[i][n + i] = (value,)
        P[n + i][i] = (-value,)
    return P


def heisenberg_f2(n: int) -> CentralPairing:
    """``h(x, y, z)`` with x, y in F_2^n and z in F_2, order 2^(2n+1)."""
    return CentralPairing([2] * (2 * n), [2], _symplectic_pairing(n), name=f"Heis_F2({n})")


def heisenberg_mod(p: int) -> CentralPairing:
    return CentralPairing([p, p], [p], _symplectic_pairing(1), name=f"Heis_{p}")


def integral_heisenberg() -> CentralPairing:
    return CentralPairing([0, 0], [0], _symplectic_pairing(1), name="Heis_Z")


def mod2_symplectic() -> CentralPairing:
    """A = Z^2, N = Z/2 with β(e_1, e_2) = 1."""
    return CentralPairing([0, 0], [2], _symplectic_pairing(1), name="Symp2")


# ---- congruence chains ------------------------------------------------------

def congruence_subgroup(G: GroupHandle, m: int) -> Subgroup:
    """A normal finite-index subgroup cut out by multiples of ``m``.

    For Z^n ⋊ Q this is the translation lattice m·Z^n; for a pairing group it is
    generated by m times each free generator of A and N (torsion coordinates
    are left alone).
    """
    if m < 1:
        raise ValueError("modulus must be positive")
    if isinstance(G, VirtuallyAbelian):
        gens = [(tuple(m * int(i == j) for j in range(G.rank)), G.Q.one) for i in range(G.rank)]
    elif isinstance(G, CentralPairing):
        gens = []
        for i, d in enumerate(G.amod):
            if not d:
                gens.append((G._zn, tuple(m * int(i == j) for j in range(G.ra))))
        for i, d in enumerate(G.nmod):
            if not d:
                gens.append((tuple(m * int(i == j) for j in range(G.rn)), G._za))
    else:
        raise UnsupportedForClass("congruence subgroups are defined for infinite classes")
    return G._wrap(G._sub_make(gens), gens)


# ---- named registry ---------------------------------------------------------

BUILDERS: dict[str, Callable[..., GroupHandle]] = {
    "cyclic": cyclic,
    "abelian": abelian,
    "dihedral": dihedral,
    "dicyclic": dicyclic,
    "quaternion": quaternion,
    "symmetric": symmetric,
    "alternating": alternating,
    "sl2": sl2,
    "gl2": gl2,
    "free_abelian": free_abelian,
    "integers": lambda: free_abelian(1),
    "infinite_dihedral": infinite_dihedral,
    "z2_rot4": z2_rot4,
    "heisenberg_f2": heisenberg_f2,
    "heisenberg_mod": heisenberg_mod,
    "integral_heisenberg": integral_heisenberg,
    "mod2_symplectic": mod2_symplectic,
}


def build_group(spec: Mapping[str, Any]) -> GroupHandle:
    """Build a group from a specification record.

    Either ``{"builder": name, ...params}`` for a library family, or a class
    record: ``{"class": "finite", "labels": [...], "table": [[...]]}``,
    ``{"class": "virtually_abelian", "rank": n, "point_group": {...}, "action": {label: matrix}}``
    or ``{"class": "central_pairing", "a_moduli": [...], "n_moduli": [...], "pairing": [[[...]]]}``.
    """
    spec = dict(spec)
    name = spec.pop("name", None)
    if "builder" in spec:
        b = spec.pop("builder")
        if b not in BUILDERS:
            raise KeyError(f"unknown builder {b!r}")
        try:
            G = BUILDERS[b](**spec)
        except TypeError as exc:
            raise KeyError(f"bad parameters for builder {b!r}: {exc}") from None
    else:
        cls = spec.get("class")
        if cls == "finite":
            table = spec["table"]
            labels = spec.get("labels") or [str(i) for i in range(len(table))]
            G = FiniteCayley(labels, table)
        elif cls == "virtually_abelian":
            Q = build_group(spec["point_group"])
            if not isinstance(Q, FiniteCayley):
                Q = to_cayley(Q)
            action = spec["action"]
            if isinstance(action, Mapping):
                missing = [lab for lab in Q.labels if lab not in action]
                if missing:
                    raise InvalidAction(f"no matrix for point-group elements {missing}")
                mats = [action[lab] for lab in Q.labels]
            else:
                mats = action
            G = VirtuallyAbelian(int(spec["rank"]), Q, mats)
        elif cls == "central_pairing":
            G = CentralPairing(spec["a_moduli"], spec["n_moduli"], spec["pairing"])
        else:
            raise KeyError(f"unknown group class {cls!r}")
    if name:
        G.name = str(name)
    return G


def finite_library(max_order: int = 48) -> list[FiniteCayley]:
    """The finite test corpus: small members of the standard families."""
    out: list[FiniteCayley] = []
    for n in range(1, 13):
        out.append(cyclic(n))
    out += [abelian([2, 2]), abelian([2, 4]), abelian([2, 2, 2]), abelian([3, 3]), abelian([2, 6])]
    for n in range(3, 13):
        out.append(dihedral(n))
    out += [dicyclic(n) for n in range(2, 7)]
    out += [symmetric(3), symmetric(4), alternating(4), sl2(3), gl2(3)]
    out += [direct_product(symmetric(3), cyclic(2)), direct_product(symmetric(3), cyclic(3)),
            direct_product(quaternion(), cyclic(2)), direct_product(dihedral(4), cyclic(2)),
            direct_product(alternating(4), cyclic(2))]
    out += [to_cayley(heisenberg_f2(1)), to_cayley(heisenberg_f2(2)), to_cayley(heisenberg_mod(3))]
    return [G for G in out if G.order <= max_order]
