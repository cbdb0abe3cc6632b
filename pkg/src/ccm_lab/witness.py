"""Finite sets that witness coset proportions, mean approximations and Følner behaviour.

Every "pick an element such that ..." step scans the group in its fixed
element order, so all outputs are deterministic.  The scan has a hard cap;
running into it raises :class:`EnumerationExhausted`.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor
from typing import Iterable, Optional, Sequence, Union

from .coset_ring import CosetRingElement, _transversal
from .errors import AtomTooSmall, EnumerationExhausted, MixedGroups, NotAPartition, UnsupportedForClass
from .groups.base import Element, GroupHandle, Subgroup
from .groups.central_pairing import CentralPairing
from .groups.virtually_abelian import VirtuallyAbelian

DEFAULT_HORIZON = 1 << 20
Atom = Union[CosetRingElement, Sequence[Element]]


class _Scanner:
    """Lazily materialised prefix of the fixed element order."""

    def __init__(self, G: GroupHandle, cap: int):
        self.G = G
        self.cap = cap
        self.prefix: list = []
        self._it = G.iter_raw()
        self._done = False

    def __iter__(self):
        i = 0
        while True:
            if i == len(self.prefix):
                if self._done:
                    return
                if len(self.prefix) >= self.cap:
                    raise EnumerationExhausted(f"no valid element among the first {self.cap}")
                # grow by doubling so repeated scans stay cheap
                want = max(64, len(self.prefix))
                self.prefix.extend(itertools.islice(self._it, want))
                if i == len(self.prefix):
                    self._done = True
                    return
            yield self.prefix[i]
            i += 1


@dataclass
class WitnessSet:
    group: GroupHandle
    elements: tuple
    deviations: list = field(default_factory=list)
    disjoint: dict = field(default_factory=dict)
    folner: dict = field(default_factory=dict)
    core_size: Optional[int] = None
    folner_size: Optional[int] = None

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def raw(self) -> list:
        return [g.coords for g in self.elements]


# ---- certificates -----------------------------------------------------------------

def subgroup_deviation(G: GroupHandle, F: Sequence, H: Subgroup) -> Fraction:
    """``max_g | #(F ∩ gH)/|F| - 1/[G:H] |`` over all left cosets gH."""
    key = H.key
    counts: dict = {}
    for x in F:
        r = G._coset_rep(key, x)
        counts[r] = counts.get(r, 0) + 1
    target = H.index().reciprocal()
    n = len(F)
    dev = max((abs(Fraction(c, n) - target) for c in counts.values()), default=target)
    idx = G._sub_index(key)
    if idx is not None and len(counts) < idx:
        dev = max(dev, target)
    return dev


def _ring_hits(G: GroupHandle, F: Sequence, atom: CosetRingElement, rep_cache: dict) -> int:
    reps = rep_cache.get(atom.D)
    if reps is None:
        reps = rep_cache[atom.D] = [G._coset_rep(atom.D, x) for x in F]
    hits = 0
    for x, r in zip(F, reps):
        inside = r in atom.reps
        for k, c in atom.inf:
            if G._sub_contains(k, G._mul(G._inv(c), x)):
                inside = not inside
        hits += inside
    return hits


def atom_deviation(G: GroupHandle, F: Sequence, atom: Atom, target: Fraction,
                   rep_cache: Optional[dict] = None) -> Fraction:
    if isinstance(atom, CosetRingElement):
        hits = _ring_hits(G, F, atom, {} if rep_cache is None else rep_cache)
    else:
        members = {G._raw(a) for a in atom}
        hits = sum(1 for x in F if x in members)
    return abs(Fraction(hits, len(F)) - target)


def folner_ratio(G: GroupHandle, F: Sequence, g) -> Fraction:
    S = set(F)
    gS = {G._mul(g, x) for x in S}
    return Fraction(len(S ^ gS), len(S))


def translate_disjoint(G: GroupHandle, F: Sequence, s) -> bool:
    S = set(F)
    return not any(G._mul(s, x) in S for x in S)


def _certify(ws: WitnessSet, constraints=(), atoms=(), S=(), K=()) -> WitnessSet:
    G = ws.group
    F = ws.raw
    cache: dict = {}
    ws.deviations = [subgroup_deviation(G, F, H) for H, _ in constraints] + [
        atom_deviation(G, F, A, t, cache) for A, t in atoms
    ]
    ws.disjoint = {G.format(G._raw(s)): translate_disjoint(G, F, G._raw(s)) for s in S}
    ws.folner = {G.format(G._raw(g)): folner_ratio(G, F, G._raw(g)) for g in K}
    return ws


def recompute_certificate(ws: WitnessSet, constraints=(), atoms=(), S=(), K=()) -> WitnessSet:
    """A fresh certificate for the same element list."""
    return _certify(WitnessSet(ws.group, ws.elements), constraints, atoms, S, K)


# ---- build_witness ------------------------------------------------------------------

def _check_group(G: GroupHandle, items: Iterable) -> None:
    for it in items:
        owner = it.group
        if owner is not G:
            raise MixedGroups("request mixes groups")


def build_witness(G: GroupHandle, constraints: Sequence[tuple[Subgroup, Fraction]],
                  horizon: int = DEFAULT_HORIZON) -> WitnessSet:
    """A finite F with exact proportions on finite-index H_i and small ones elsewhere.

    Let D be the intersection of the finite-index H_i.  F takes exactly r
    elements from every left coset of D, and at most one element from any
    coset of an infinite-index H_j, with r minimal so that 1/(r [G:D]) is
    below every infinite-index tolerance.
    """
    _check_group(G, [H for H, _ in constraints])
    eps = [Fraction(e) for _, e in constraints]
    if any(e <= 0 for e in eps):
        raise ValueError("tolerances must be positive")
    fin = [H.key for H, _ in constraints if G._sub_index(H.key) is not None]
    inf = [(H.key, e) for (H, _), e in zip(constraints, eps) if G._sub_index(H.key) is None]
    if inf and G.is_finite:
        raise UnsupportedForClass("finite groups have no infinite-index subgroups")
    D = G._whole_key()
    for k in fin:
        D = G._sub_intersect(D, k)
    n = G._sub_index(D)
    r = 1
    if inf:
        m = min(e for _, e in inf)
        while Fraction(1, r * n) >= m:
            r += 1
    used = [set() for _ in inf]
    scan = _Scanner(G, horizon)
    chosen = []
    for t in _transversal(G, D, G._whole_key()):
        got = 0
        for x in scan:
            if got == r:
                break
            if G._coset_rep(D, x) != t:
                continue
            reps = [G._coset_rep(k, x) for k, _ in inf]
            if any(rep in u for rep, u in zip(reps, used)):
                continue
            for rep, u in zip(reps, used):
                u.add(rep)
            chosen.append(x)
            got += 1
        if got < r:
            raise EnumerationExhausted("ran out of elements in a coset")
    ws = WitnessSet(G, tuple(Element(G, x) for x in chosen))
    return _certify(ws, constraints=constraints)


# ---- partitions and mean approximation ----------------------------------------------

def _sample_disjoint(G, A, B, radius=3) -> bool:
    return not any(A.contains(g) and B.contains(g) for g in G.enumerate_elements(radius))


def _finite_size(G: GroupHandle, A: CosetRingElement) -> Optional[int]:
    """Exact cardinality of A when it is a finite set, else None."""
    if A.reps or any(G._sub_order(k) is None for k, _ in A.inf):
        return None
    pts = set()
    for k, r in A.inf:
        gens = G._sub_gens(k)
        members, frontier = {G.one}, [G.one]
        while frontier:
            frontier = {y for x in frontier for y in (G._mul(x, s) for s in gens)} - members
            members.update(frontier)
        pts.update(G._mul(r, h) for h in members)
    return sum(A.contains(Element(G, x)) for x in pts)


def _validate_atoms(G: GroupHandle, atoms: Sequence[tuple[Atom, Fraction]]):
    targets = [Fraction(t) for _, t in atoms]
    if any(t < 0 for t in targets) or sum(targets) != 1:
        raise NotAPartition(f"targets must be non-negative and sum to 1, got {sum(targets)}")
    rings = [a for a, _ in atoms if isinstance(a, CosetRingElement)]
    if rings and len(rings) != len(atoms):
        raise NotAPartition("atoms must be all ring elements or all explicit sets")
    if rings:
        for A in rings:
            if A.group is not G:
                raise MixedGroups("atom belongs to another group")
        if sum(A.measure() for A in rings) != 1:
            raise NotAPartition("atom measures do not sum to 1")
        total = rings[0]
        for i, j in itertools.combinations(range(len(rings)), 2):
            M = rings[i] & rings[j]
            # an empty meet is conclusive; otherwise fall back to searching a ball for a common point
            if not M.is_empty() and (M.measure() or not _sample_disjoint(G, rings[i], rings[j])):
                raise NotAPartition(f"atoms {i} and {j} overlap")
        for A in rings[1:]:
            total = total ^ A
        if total != CosetRingElement.whole(G) and not all(
            total.contains(g) for g in G.enumerate_elements(3)
        ):
            raise NotAPartition("atoms do not cover the group")
        return targets, [A.contains for A in rings], [_finite_size(G, A) for A in rings]
    if not G.is_finite:
        raise UnsupportedForClass("explicit finite atoms are only allowed in finite groups")
    sets = [{G._raw(x) for x in a} for a, _ in atoms]
    seen: set = set()
    for s in sets:
        if s & seen:
            raise NotAPartition("explicit atoms overlap")
        seen |= s
    if len(seen) != G.order:
        raise NotAPartition("explicit atoms do not cover the group")
    return targets, [lambda g, s=s: G._raw(g) in s for s in sets], [len(s) for s in sets]


def _sizes(targets: Sequence[Fraction], N: int) -> list[int]:
    """Floors of ``t_i N`` padded by one, largest remainders first (ties by position)."""
    floors = [floor(t * N) for t in targets]
    rest = N - sum(floors)
    order = sorted(range(len(targets)), key=lambda i: (-(targets[i] * N - floors[i]), i))
    for i in order[:rest]:
        floors[i] += 1
    return floors


def _fill(G, members, sizes, finite_sizes, horizon, forbidden_steps=()):
    for i, (sz, cap) in enumerate(zip(sizes, finite_sizes)):
        if cap is not None and sz > cap:
            raise AtomTooSmall(f"atom {i} has {cap} elements but {sz} are needed")
    scan = _Scanner(G, horizon)
    chosen: list = []
    blocked: set = set()
    for member, sz in zip(members, sizes):
        got = 0
        if sz == 0:
            continue
        for x in scan:
            if x in blocked or not member(Element(G, x)):
                continue
            chosen.append(x)
            blocked.add(x)
            for s in forbidden_steps:
                blocked.add(G._mul(s, x))
                blocked.add(G._mul(G._inv(s), x))
            got += 1
            if got == sz:
                break
        if got < sz:
            raise AtomTooSmall("not enough admissible elements in an atom")
    return chosen


def approximate_mean(G: GroupHandle, atoms: Sequence[tuple[Atom, Fraction]], N: int,
                     horizon: int = DEFAULT_HORIZON) -> WitnessSet:
    """|F| = N with ``| |F ∩ A_i|/N - t_i | <= 1/N`` for every atom."""
    return disjoint_translates_witness(G, atoms, N, (), horizon)


def disjoint_translates_witness(G: GroupHandle, atoms: Sequence[tuple[Atom, Fraction]], N: int,
                                S: Sequence[Element] = (), horizon: int = DEFAULT_HORIZON) -> WitnessSet:
    """As :func:`approximate_mean`, additionally with ``F ∩ sF = ∅`` for all s in S."""
    if N < 1:
        raise ValueError("N must be positive")
    targets, members, finite_sizes = _validate_atoms(G, atoms)
    steps = [G._raw(s) for s in S]
    if any(s == G.one for s in steps):
        raise ValueError("the disjointness set must not contain the identity")
    sizes = _sizes(targets, N)
    chosen = _fill(G, members, sizes, finite_sizes, horizon, steps)
    chosen.sort(key=G._order_key)
    ws = WitnessSet(G, tuple(Element(G, x) for x in chosen))
    return _certify(ws, atoms=list(zip([a for a, _ in atoms], targets)), S=S)


# ---- Følner sets --------------------------------------------------------------------

def _centered(n: int) -> range:
    return range(-(n // 2), n - n // 2)


def _box(G: GroupHandle, L: int) -> list:
    """[0, L)^n under the point group; for a pairing group a centred box of side L
    in A and L²/4 in N, which absorbs the shear of a step in A."""
    if isinstance(G, VirtuallyAbelian):
        pts = []
        for v in itertools.product(range(L), repeat=G.rank):
            for q in range(G.Q.order):
                pts.append((G.act(q, v), q))
        return pts
    if isinstance(G, CentralPairing):
        big = max(1, L * L // 4)
        nr = [range(m) if m else _centered(big) for m in G.nmod]
        ar = [range(m) if m else _centered(L) for m in G.amod]
        return [(nu, a) for nu in itertools.product(*nr) for a in itertools.product(*ar)]
    raise UnsupportedForClass("no box construction for this class")


def folner_set(G: GroupHandle, K: Sequence[Element], eps: Fraction, max_side: int = 4096) -> list[Element]:
    """A box-shaped set S with ``|S ⊕ gS|/|S| < eps`` for every g in K."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    ks = [G._raw(g) for g in K]
    if G.is_finite:
        return [Element(G, x) for x in G.iter_raw()]
    for L in range(1, max_side + 1):
        S = _box(G, L)
        if all(folner_ratio(G, S, g) < eps for g in ks):
            return [Element(G, x) for x in sorted(S, key=G._order_key)]
    raise EnumerationExhausted(f"no Følner box up to side {max_side}")


def folner_amplify(G: GroupHandle, atoms: Sequence[tuple[CosetRingElement, Fraction]],
                   K: Sequence[Element], eps: Fraction, horizon: int = DEFAULT_HORIZON) -> WitnessSet:
    """F = S·F0 with S a Følner set and F0 a core with pairwise disjoint translates.

    F0 meets every left coset of the common denominator D of the atoms exactly
    once and avoids every element that some translate by S sends into an
    infinite coset of an atom.  Then each s·F0 hits every D-coset once, so F
    matches every atom measure exactly, and ``|gF ⊕ F| <= |gS ⊕ S|·|F0|``.
    """
    eps = Fraction(eps)
    ks = [G._raw(g) for g in K]
    targets, members, _ = _validate_atoms(G, atoms)
    rings = [a for a, _ in atoms]
    if isinstance(rings[0], CosetRingElement):
        for A, t in zip(rings, targets):
            if A.measure() != t:
                raise ValueError("targets must equal the atom measures")
    if G.is_finite:
        ws = WitnessSet(G, tuple(Element(G, x) for x in G.iter_raw()))
        return _certify(ws, atoms=list(zip(rings, targets)), K=K)
    S = [G._raw(s) for s in folner_set(G, K, eps)] if ks else [G.one]
    D = G._whole_key()
    for A in rings:
        D = G._sub_intersect(D, A.D)
    infinite = [c for A in rings for c in A.inf]
    probe = list(S)
    random.Random(0).shuffle(probe)
    scan = _Scanner(G, horizon)
    core: list = []
    F: list = []
    covered: set = set()
    for t in _transversal(G, D, G._whole_key()):
        for x in scan:
            if G._coset_rep(D, x) != t:
                continue
            # S·x must avoid S·F0 so far, and every infinite coset of an atom;
            # probing S in a scrambled order finds large overlaps quickly
            if any(G._mul(s, x) in covered for s in probe):
                continue
            tx = [G._mul(s, x) for s in S]
            if any(G._sub_contains(k, G._mul(G._inv(r), y)) for y in tx for k, r in infinite):
                continue
            core.append(x)
            F.extend(tx)
            covered.update(tx)
            break
        else:
            raise EnumerationExhausted("no admissible core element in a coset")
    F.sort(key=G._order_key)
    ws = WitnessSet(G, tuple(Element(G, x) for x in F))
    ws.core_size, ws.folner_size = len(core), len(S)
    return _certify(ws, atoms=list(zip(rings, targets)), K=K)
