"""Degree of commutativity: brute force, centralizer strata and finite quotients.

For a finitely generated group G write U_m for the set of elements whose
centralizer has index exactly m.  In every supported class only finitely many
U_m are non-empty and each one lies in the coset ring, so the product mean of
the commuting set is ``Σ_m μ(U_m)/m`` whatever coset-correct mean is used.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from . import intlattice as lat
from .coset_ring import CosetRingElement
from .errors import EnumerationExhausted, HypothesisFails, InvariantViolation, NotNormal, UnsupportedForClass
from .groups.base import Coset, Element, GroupHandle, Subgroup
from .groups.central_pairing import CentralPairing
from .groups.finite import FiniteCayley
from .groups.library import DEFAULT_QUOTIENT_CAP, direct_product, quotient
from .groups.virtually_abelian import VirtuallyAbelian

TORSION_CAP = 4096


# ---- finite groups --------------------------------------------------------------------

def _commute_matrix(G: FiniteCayley) -> np.ndarray:
    T = np.asarray(G.table)
    return T == T.T


def centralizer_orders(G: FiniteCayley) -> list[int]:
    return [int(c) for c in _commute_matrix(G).sum(axis=1)]


def dc_finite(G: FiniteCayley) -> Fraction:
    """|{(g, h) : gh = hg}| / |G|^2."""
    if not isinstance(G, FiniteCayley):
        raise UnsupportedForClass("dc_finite needs a Cayley table")
    return Fraction(int(_commute_matrix(G).sum()), G.order ** 2)


PairSet = Union[Iterable[tuple], Callable[[Element, Element], bool]]


def product_mean_finite(G: FiniteCayley, S: PairSet) -> Fraction:
    """|S| / |G|^2 for S given as pairs of elements or as a predicate on pairs."""
    n = G.order
    if callable(S):
        elems = [Element(G, x) for x in range(n)]
        count = sum(1 for g in elems for h in elems if S(g, h))
    else:
        count = len({(G._raw(g), G._raw(h)) for g, h in S})
    return Fraction(count, n * n)


def commuting_set(G: FiniteCayley) -> list[tuple[Element, Element]]:
    C = _commute_matrix(G)
    return [(Element(G, int(i)), Element(G, int(j))) for i, j in zip(*np.nonzero(C))]


def subgroup_cayley(G: FiniteCayley, H: Subgroup) -> FiniteCayley:
    """The subgroup H as a Cayley table of its own."""
    members = sorted(G._members(G._own(H)))
    pos = {x: i for i, x in enumerate(members)}
    table = [[pos[G.table[a][b]] for b in members] for a in members]
    return FiniteCayley([G.labels[x] for x in members], table, name=f"{G.name}_sub", trusted=True)


# ---- strata ---------------------------------------------------------------------------

@dataclass
class StratumTable:
    group: GroupHandle
    strata: list  # of (m, CosetRingElement), m increasing
    infinite: CosetRingElement
    measures: dict = field(default_factory=dict)

    def __post_init__(self):
        self.measures = {m: U.measure() for m, U in self.strata}
        self.measures["inf"] = self.infinite.measure()

    def stratum(self, m: int) -> CosetRingElement:
        for k, U in self.strata:
            if k == m:
                return U
        return CosetRingElement.empty(self.group)

    def x_n(self, n: int) -> CosetRingElement:
        """Elements whose centralizer has index at most n."""
        X = CosetRingElement.empty(self.group)
        for m, U in self.strata:
            if m <= n:
                X = X ^ U
        return X

    def finite_part(self) -> CosetRingElement:
        """Elements with a finite-index centralizer (the FC-centre)."""
        return self.infinite.complement()

    def index_of(self, g: Element) -> Optional[int]:
        for m, U in self.strata:
            if U.contains(g):
                return m
        return None

    def dc(self) -> Fraction:
        return sum((mu / m for m, mu in self.measures.items() if m != "inf"), Fraction(0))

    def verify(self, sample: Sequence[Element] = ()) -> None:
        """Measures add up to one and no sampled element lies in two strata."""
        total = sum(self.measures.values(), Fraction(0))
        if total != 1:
            raise InvariantViolation(f"stratum measures sum to {total}")
        parts = [U for _, U in self.strata] + [self.infinite]
        for A, B in itertools.combinations(parts, 2):
            M = A & B
            if M.measure():
                raise InvariantViolation("strata overlap in positive measure")
        for g in sample:
            if sum(U.contains(g) for U in parts) != 1:
                raise InvariantViolation(f"{g!r} is not in exactly one stratum")


def _subgroup_poset(elements: list, mul, one) -> list[frozenset]:
    """All subgroups of a small finite group given by its element list."""
    def closure(gens):
        S = {one}
        frontier = [one]
        while frontier:
            new = []
            for x in frontier:
                for g in gens:
                    y = mul(x, g)
                    if y not in S:
                        S.add(y)
                        new.append(y)
            frontier = new
        return frozenset(S)

    cyclic = {closure([x]) for x in elements}
    found = set(cyclic)
    frontier = list(found)
    while frontier:
        nxt = []
        for H in frontier:
            for C in cyclic:
                if not C <= H:
                    J = closure(list(H | C))
                    if J not in found:
                        found.add(J)
                        nxt.append(J)
        frontier = nxt
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def _mobius_mod2(subs: list[frozenset]) -> dict:
    """``μ(J, K) mod 2`` on the inclusion poset, for J ≤ K."""
    mu: dict = {}
    for J in subs:
        above = sorted((K for K in subs if J <= K), key=len)
        for K in above:
            if K == J:
                mu[J, K] = 1
            else:
                mu[J, K] = -sum(mu[J, L] for L in above if L < K and J <= L)
    return {k: v % 2 for k, v in mu.items()}


def _strata_finite(G: FiniteCayley) -> StratumTable:
    n = G.order
    triv = G._sub_make([])
    buckets: dict = {}
    for x, c in enumerate(centralizer_orders(G)):
        buckets.setdefault(n // c, []).append(x)
    strata = [(m, CosetRingElement(G, triv, xs)) for m, xs in sorted(buckets.items())]
    return StratumTable(G, strata, CosetRingElement.empty(G))


def _fix_lattice(G: VirtuallyAbelian, J: Iterable[int]) -> tuple:
    """HNF of ``{v : φ(j) v = v for all j in J}``."""
    n = G.rank
    mats = [G.phi[j] for j in J if j != G.Q.one]
    if not mats:
        return lat.identity_matrix(n)
    rows = [[M[c][i] - int(c == i) for M in mats for c in range(n)] for i in range(n)]
    return lat.hnf(lat.left_kernel(rows, n * len(mats)), n)


def _strata_virtually_abelian(G: VirtuallyAbelian) -> StratumTable:
    """Strata of Z^n ⋊ Q.

    (v, q) has a finite-index centralizer only when φ(q) = 1, and then the
    centralizer is ``Z^n ⋊ (C_Q(q) ∩ Stab(v))``.  For fixed q the set of v with
    a given stabiliser J inside C = C_Q(q) is cut out of the fixed lattices
    Fix(J') of the overgroups J' ≥ J by Möbius inversion, which in the Boolean
    ring only needs the Möbius function mod 2.
    """
    Q = G.Q
    ident = lat.identity_matrix(G.rank)
    kernel = [q for q in range(Q.order) if G.phi[q] == ident]
    subs = [frozenset(Q._members(k)) for k in Q.all_subgroups()]
    mu = _mobius_mod2(subs)
    zero = G._zero
    pieces: dict = {}
    fix_cache: dict = {}
    for q in kernel:
        C = frozenset(Q._members(Q._centralizer(q)))
        inside = [J for J in subs if J <= C]
        for J in inside:
            m = Q.order // len(J)
            for K in inside:
                if J <= K and mu[J, K]:
                    L = fix_cache.get(K)
                    if L is None:
                        L = fix_cache[K] = _fix_lattice(G, K)
                    key = G._sub_make([(row, Q.one) for row in L])
                    piece = CosetRingElement.from_coset(Coset(G._wrap(key), G._coset_rep(key, (zero, q))))
                    pieces[m] = pieces[m] ^ piece if m in pieces else piece
    return _assemble(G, pieces)


def _torsion_subgroups(G: CentralPairing) -> list[frozenset]:
    tors = [i for i, d in enumerate(G.nmod) if d]
    size = 1
    for i in tors:
        size *= G.nmod[i]
    if size > TORSION_CAP:
        raise UnsupportedForClass(f"torsion of N has order {size}, above {TORSION_CAP}")
    elems = []
    for vals in itertools.product(*(range(G.nmod[i]) for i in tors)):
        v = [0] * G.rn
        for i, c in zip(tors, vals):
            v[i] = c
        elems.append(tuple(v))
    return _subgroup_poset(elems, lambda x, y: G._red_n(lat.add(x, y)), G._zn)


def _level_lattice(G: CentralPairing, M: frozenset) -> tuple:
    """HNF of ``L_M = {a : β(a, e_j) ∈ M for every j}``."""
    ra, rn = G.ra, G.rn
    Mt = lat.hnf(list(M) + G.RN, rn)
    width = ra * rn
    rows = [[x for j in range(ra) for x in G.pairing[i][j]] for i in range(ra)]
    for j in range(ra):
        for r in Mt:
            row = [0] * width
            row[j * rn:(j + 1) * rn] = r
            rows.append(row)
    ker = lat.left_kernel(rows, width) if width else [[int(i == k) for k in range(ra)] for i in range(ra)]
    return lat.hnf([x[:ra] for x in ker], ra)


def _strata_central_pairing(G: CentralPairing) -> StratumTable:
    """Strata of a central extension.

    The centralizer of (ν, a) is ``N × ann(a)`` and its index is the order of
    the subgroup M_a generated by the values β(a, e_j).  For a finite M ≤ N the
    set {a : M_a ⊆ M} is the subgroup L_M, and {a : M_a = M} is obtained from
    the L_{M'} with M' ≤ M by Möbius inversion.
    """
    subs = _torsion_subgroups(G)
    mu = _mobius_mod2(subs)
    ngens = [(tuple(int(i == j) for j in range(G.rn)), G._za) for i in range(G.rn)]
    level: dict = {}
    pieces: dict = {}
    for M in subs:
        m = len(M)
        for K in subs:
            if K <= M and mu[K, M]:
                key = level.get(K)
                if key is None:
                    L = _level_lattice(G, K)
                    key = level[K] = G._sub_make([(G._zn, G._red_a(row)) for row in L] + ngens)
                piece = CosetRingElement.from_coset(Coset(G._wrap(key), G._coset_rep(key, G.one)))
                pieces[m] = pieces[m] ^ piece if m in pieces else piece
    return _assemble(G, pieces)


def _assemble(G: GroupHandle, pieces: dict) -> StratumTable:
    strata = [(m, U) for m, U in sorted(pieces.items()) if not U.is_empty()]
    rest = CosetRingElement.whole(G)
    for _, U in strata:
        rest = rest ^ U
    return StratumTable(G, strata, rest)


def centralizer_strata(G: GroupHandle) -> StratumTable:
    if isinstance(G, FiniteCayley):
        return _strata_finite(G)
    if isinstance(G, VirtuallyAbelian):
        return _strata_virtually_abelian(G)
    if isinstance(G, CentralPairing):
        return _strata_central_pairing(G)
    raise UnsupportedForClass(f"no stratification for {type(G).__name__}")


def dc_strata(G: GroupHandle) -> Fraction:
    return centralizer_strata(G).dc()


# ---- finite quotients -----------------------------------------------------------------

@dataclass
class QuotientChain:
    group: GroupHandle
    subgroups: list
    cap: int = DEFAULT_QUOTIENT_CAP
    nested: list = field(default_factory=list)

    def __post_init__(self):
        G = self.group
        for i, N in enumerate(self.subgroups):
            key = G._own(N)
            if G._sub_index(key) is None:
                raise UnsupportedForClass(f"chain member {i} has infinite index")
            if not G._is_normal(key):
                raise NotNormal(f"chain member {i} is not normal")
        self.nested = [
            all(G._sub_contains(b.key, x) for x in G._sub_gens(a.key))
            for b, a in zip(self.subgroups, self.subgroups[1:])
        ]

    @property
    def is_nested(self) -> bool:
        return all(self.nested)

    def quotients(self) -> list[FiniteCayley]:
        return [quotient(self.group, N, cap=self.cap) for N in self.subgroups]


@dataclass
class ChainReport:
    orders: list
    values: list
    nested: list
    monotone: bool
    dominates: bool
    strata_value: Fraction


def dc_rf_chain(G: GroupHandle, chain: Union[QuotientChain, Sequence[Subgroup]],
                cap: int = DEFAULT_QUOTIENT_CAP) -> ChainReport:
    """dc of each quotient G/N_i, with the checks that relate them to dc_strata."""
    if not isinstance(chain, QuotientChain):
        chain = QuotientChain(G, list(chain), cap)
    quots = chain.quotients()
    values = [dc_finite(Q) for Q in quots]
    base = dc_strata(G)
    # along a nested chain the values can only go down
    monotone = all(not nest or b <= a for nest, a, b in zip(chain.nested, values, values[1:]))
    return ChainReport([Q.order for Q in quots], values, chain.nested, monotone,
                       all(v >= base for v in values), base)


@dataclass(frozen=True)
class InequalityCheck:
    lhs: Fraction
    rhs: Fraction
    holds: bool


def gallagher_check(G: FiniteCayley, N: Subgroup) -> InequalityCheck:
    """dc(G) <= dc(G/N)·dc(N)."""
    key = G._own(N)
    if not G._is_normal(key):
        raise NotNormal("subgroup is not normal")
    lhs = dc_finite(G)
    rhs = dc_finite(G.quotient(key)) * dc_finite(subgroup_cayley(G, N))
    return InequalityCheck(lhs, rhs, lhs <= rhs)


@dataclass(frozen=True)
class XnCheck:
    dc: Fraction
    xn_measure: Fraction
    bound_holds: bool


def xn_check(G: FiniteCayley, n: int) -> XnCheck:
    """dc(G) <= |X_n|/|G| + 1/n, X_n the elements with centralizer index <= n."""
    if n < 1:
        raise ValueError("n must be positive")
    order = G.order
    xn = sum(1 for c in centralizer_orders(G) if order <= n * c)
    d = dc_finite(G)
    mu = Fraction(xn, order)
    return XnCheck(d, mu, d <= mu + Fraction(1, n))


# ---- FAF ------------------------------------------------------------------------------

@dataclass
class FafWitness:
    n0: Subgroup
    h0: Subgroup
    checks: dict

    is_faf = True


@dataclass
class NotFAF:
    reason: str
    evidence: list = field(default_factory=list)

    is_faf = False


def _verify_faf(G: GroupHandle, n0: Subgroup, h0: Subgroup) -> dict:
    kn, kh = n0.key, h0.key
    ng, hg = G._sub_gens(kn), G._sub_gens(kh)
    checks = {
        "n0_finite": G._sub_order(kn) is not None,
        "h0_finite_index": G._sub_index(kh) is not None,
        "n0_normal": G._is_normal(kn),
        "h0_normal": G._is_normal(kh),
        "n0_in_h0": all(G._sub_contains(kh, x) for x in ng),
        "n0_central_in_h0": all(G._comm(x, y) == G.one for x in ng for y in hg),
        "h0_mod_n0_abelian": all(G._sub_contains(kn, G._comm(x, y)) for x in hg for y in hg),
    }
    if not all(checks.values()):
        failed = [k for k, v in checks.items() if not v]
        raise InvariantViolation(f"FAF witness fails: {', '.join(failed)}")
    return checks


def faf_witness(G: GroupHandle) -> Union[FafWitness, NotFAF]:
    """A finite normal N0 central in a finite-index normal H0 with H0/N0 abelian."""
    if G.is_finite:
        n0 = h0 = G.trivial()
    elif isinstance(G, VirtuallyAbelian):
        lattice = G._wrap(G._sub_make([(row, G.Q.one) for row in lat.identity_matrix(G.rank)]))
        n0, h0 = G.trivial(), G.normal_core(lattice)
    elif isinstance(G, CentralPairing):
        if all(G.nmod):
            ngens = [(tuple(int(i == j) for j in range(G.rn)), G._za) for i in range(G.rn)]
            n0, h0 = G._wrap(G._sub_make(ngens)), G.whole()
        else:
            derived = G._derived_key()
            if G._sub_order(derived) is None:
                # a finite-index H0 would have H0' of finite index in G', hence infinite
                return NotFAF("derived subgroup is infinite",
                              [Element(G, x) for x in G._sub_gens(derived)])
            n0, h0 = G._wrap(derived), G.whole()
    else:
        raise UnsupportedForClass(f"no FAF analysis for {type(G).__name__}")
    return FafWitness(n0, h0, _verify_faf(G, n0, h0))


# ---- small commuting sums ---------------------------------------------------------------

@dataclass
class CommutingSum:
    elements: list
    total: Fraction


def centralizer_index_sum(G: GroupHandle, hs: Sequence[Element]) -> Fraction:
    """Σ_{i<j} 1/[G : C(h_i^-1 h_j)]."""
    total = Fraction(0)
    for a, b in itertools.combinations(hs, 2):
        total += G.centralizer(G.multiply(G.invert(a), b)).index().reciprocal()
    return total


def small_commuting_sum(G: GroupHandle, n: int, eps: Fraction, horizon: int = 1 << 16) -> CommutingSum:
    """n elements whose pairwise quotients have centralizers of small total density."""
    eps = Fraction(eps)
    if n < 1 or eps <= 0:
        raise ValueError("need n >= 1 and eps > 0")
    if n == 1:
        return CommutingSum([G.identity()], Fraction(0))
    table = centralizer_strata(G)
    fc = table.finite_part()
    if fc.measure() > 0:
        raise HypothesisFails("elements with finite-index centralizer form a finite-index set")
    chosen: list = []
    for k, x in enumerate(G.iter_raw()):
        if k >= horizon:
            raise EnumerationExhausted(f"no suitable elements among the first {horizon}")
        g = Element(G, x)
        if all(not fc.contains(G.multiply(G.invert(h), g)) for h in chosen):
            chosen.append(g)
            if len(chosen) == n:
                break
    total = centralizer_index_sum(G, chosen)
    if total >= eps:
        raise InvariantViolation(f"sum {total} is not below {eps}")
    return CommutingSum(chosen, total)


# ---- commuting transversal ----------------------------------------------------------------

class _NotFound:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "NotFound"

    def __bool__(self) -> bool:
        return False


NotFound = _NotFound()


def square(H: FiniteCayley) -> FiniteCayley:
    """H × H with the pair (i, j) stored at index ``i·|H| + j``."""
    cache = H.__dict__.setdefault("_square", [])
    if not cache:
        cache.append(direct_product(H, H, name=f"{H.name}^2"))
    return cache[0]


def pair_of(H: FiniteCayley, x: Element) -> tuple[int, int]:
    return divmod(x.coords, H.order)


def commuting_transversal(H: FiniteCayley, K: Subgroup, g: Element):
    """An element (h1, h2) of gK with h1 h2 = h2 h1, or NotFound."""
    H2 = K.group
    if g.group is not H2 or H2.order != H.order ** 2:
        raise UnsupportedForClass("K and g must live in the square of H")
    T = H.table
    x = g.coords
    for y in sorted(H2.table[x][k] for k in K.key):
        a, b = divmod(y, H.order)
        if T[a][b] == T[b][a]:
            return Element(H2, y)
    return NotFound
