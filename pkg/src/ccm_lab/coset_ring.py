"""The Boolean ring generated by cosets, with its unique coset-correct mean.

An element is stored as ``F ⊕ I``: F is a disjoint union of cosets of a single
finite-index subgroup D (kept as a set of canonical representatives) and I is
a symmetric difference of cosets of infinite-index subgroups.  The measure
only sees F, since every set in the span of infinite-index cosets gets mean 0.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import InvariantViolation, MixedGroups, UnsupportedForClass
from .groups.base import Coset, Element, GroupHandle, Subgroup

TRANSVERSAL_CAP = 200_000


def _transversal(G: GroupHandle, sub, sup) -> list:
    cache = G.__dict__.setdefault("_ring_transversals", {})
    key = (sub, sup)
    T = cache.get(key)
    if T is None:
        T = G._transversal(sub, sup, cap=TRANSVERSAL_CAP)
        cache[key] = T
    return T


def _refine_reps(G: GroupHandle, reps, D_old, D_new) -> frozenset:
    """Re-express a union of ``D_old``-cosets as a set of ``D_new``-coset reps."""
    if D_old == D_new or not reps:
        return frozenset(reps)
    T = _transversal(G, D_new, D_old)
    return frozenset(G._coset_rep(D_new, G._mul(x, t)) for x in reps for t in T)


def _meet_cosets(G: GroupHandle, k1, x, k2, y):
    pt = G._coset_meet_point(k1, x, k2, y)
    if pt is None:
        return None
    k = G._sub_intersect(k1, k2)
    return (k, G._coset_rep(k, pt))


class CosetRingElement:
    __slots__ = ("group", "D", "reps", "inf")

    def __init__(self, group: GroupHandle, D, reps: Iterable, inf: Iterable = ()):
        self.group = group
        reps = frozenset(reps)
        self.D = D if reps else group._whole_key()
        self.reps = reps
        counts = Counter(inf)
        self.inf = tuple(sorted((c for c, k in counts.items() if k % 2),
                                key=lambda c: (c[0], group._order_key(c[1]))))

    # ---- construction ----------------------------------------------------
    @classmethod
    def empty(cls, G: GroupHandle) -> "CosetRingElement":
        return cls(G, G._whole_key(), ())

    @classmethod
    def whole(cls, G: GroupHandle) -> "CosetRingElement":
        D = G._whole_key()
        return cls(G, D, (G._coset_rep(D, G.one),))

    @classmethod
    def from_coset(cls, c: Coset) -> "CosetRingElement":
        G = c.group
        key = c.subgroup.key
        if G._sub_index(key) is not None:
            return cls(G, key, (c.rep,))
        return cls(G, G._whole_key(), (), ((key, c.rep),))

    # ---- accessors -------------------------------------------------------
    @property
    def denominator(self) -> Subgroup:
        return self.group._wrap(self.D)

    def finite_cosets(self) -> list[Coset]:
        H = self.denominator
        return [Coset(H, r) for r in sorted(self.reps, key=self.group._order_key)]

    def infinite_cosets(self) -> list[Coset]:
        return [Coset(self.group._wrap(k), r) for k, r in self.inf]

    def is_empty(self) -> bool:
        return not self.reps and not self.inf

    def _same(self, other: "CosetRingElement") -> None:
        if not isinstance(other, CosetRingElement):
            raise TypeError(f"expected CosetRingElement, got {type(other).__name__}")
        if other.group is not self.group:
            raise MixedGroups("ring elements belong to different groups")

    def refine(self, D_new: Subgroup) -> "CosetRingElement":
        """The same set with its finite part written over a deeper ``D_new ≤ D``."""
        G = self.group
        k = G._own(D_new)
        if G._sub_index(k) is None:
            raise UnsupportedForClass("denominator must have finite index")
        if G._sub_intersect(k, self.D) != k:
            raise ValueError("new denominator must be contained in the current one")
        out = CosetRingElement.__new__(CosetRingElement)
        out.group, out.D, out.inf = G, k, self.inf
        out.reps = _refine_reps(G, self.reps, self.D, k)
        return out

    def _common(self, other: "CosetRingElement"):
        G = self.group
        if not self.reps:
            return other.D, frozenset(), other.reps
        if not other.reps:
            return self.D, self.reps, frozenset()
        D = G._sub_intersect(self.D, other.D)
        return D, _refine_reps(G, self.reps, self.D, D), _refine_reps(G, other.reps, other.D, D)

    # ---- ring operations -------------------------------------------------
    def __xor__(self, other: "CosetRingElement") -> "CosetRingElement":
        self._same(other)
        D, a, b = self._common(other)
        return CosetRingElement(self.group, D, a ^ b, self.inf + other.inf)

    def __and__(self, other: "CosetRingElement") -> "CosetRingElement":
        self._same(other)
        G = self.group
        if self.reps and other.reps:
            D, a, b = self._common(other)
            fin = a & b
        else:
            D, fin = G._whole_key(), frozenset()
        inf = []
        for (Dk, reps), cosets in ((self.D, self.reps), other.inf), ((other.D, other.reps), self.inf):
            for x in reps:
                for k, y in cosets:
                    c = _meet_cosets(G, Dk, x, k, y)
                    if c is not None:
                        inf.append(c)
        for k1, x in self.inf:
            for k2, y in other.inf:
                c = _meet_cosets(G, k1, x, k2, y)
                if c is not None:
                    inf.append(c)
        return CosetRingElement(G, D, fin, inf)

    def complement(self) -> "CosetRingElement":
        return self ^ CosetRingElement.whole(self.group)

    def __or__(self, other: "CosetRingElement") -> "CosetRingElement":
        return (self ^ other) ^ (self & other)

    def __eq__(self, other: object) -> bool:
        """Finite parts compared as sets; infinite parts compared syntactically."""
        if not isinstance(other, CosetRingElement) or other.group is not self.group:
            return NotImplemented
        if self.inf != other.inf:
            return False
        _, a, b = self._common(other)
        return a == b

    # equality refines finite parts, so hashing can only use the infinite part
    def __hash__(self) -> int:
        return hash(self.inf)

    # ---- measure and membership ------------------------------------------
    def measure(self) -> Fraction:
        if not self.reps:
            return Fraction(0)
        return Fraction(len(self.reps), self.group._sub_index(self.D))

    def contains(self, g: Element) -> bool:
        G = self.group
        x = G._raw(g)
        inside = bool(self.reps) and G._coset_rep(self.D, x) in self.reps
        for k, r in self.inf:
            if G._sub_contains(k, G._mul(G._inv(r), x)):
                inside = not inside
        return inside

    def __contains__(self, g: Element) -> bool:
        return self.contains(g)

    def decompose(self) -> tuple["CosetRingElement", list[Coset]]:
        fin = CosetRingElement(self.group, self.D, self.reps)
        return fin, self.infinite_cosets()

    def __repr__(self) -> str:
        return (f"CosetRingElement(measure={self.measure()}, finite={len(self.reps)} of "
                f"index {self.group._sub_index(self.D)}, infinite={len(self.inf)})")


# ---- functional API -----------------------------------------------------------

def from_coset(c: Coset) -> CosetRingElement:
    return CosetRingElement.from_coset(c)


def from_cosets(cosets: Sequence[Coset]) -> CosetRingElement:
    """Symmetric difference of the given cosets."""
    if not cosets:
        raise ValueError("need at least one coset")
    X = from_coset(cosets[0])
    for c in cosets[1:]:
        X = X ^ from_coset(c)
    return X


def xor(X: CosetRingElement, Y: CosetRingElement) -> CosetRingElement:
    return X ^ Y


def meet(X: CosetRingElement, Y: CosetRingElement) -> CosetRingElement:
    return X & Y


def decompose(X: CosetRingElement):
    return X.decompose()


def measure(X: CosetRingElement) -> Fraction:
    return X.measure()


def contains(X: CosetRingElement, g: Element) -> bool:
    return X.contains(g)


@dataclass(frozen=True)
class NeumannResult:
    covers: bool
    reciprocal_sum: Fraction
    uncovered: Optional[Element] = None


def neumann_check(cosets: Sequence[Coset], group: Optional[GroupHandle] = None) -> NeumannResult:
    """Decide whether the cosets cover their group; report Σ 1/[G:H_i].

    Infinite-index cosets cannot help to cover, since any uncovered region of
    the finite-index ones contains a coset of a finite-index subgroup, and no
    such coset is covered by finitely many infinite-index cosets.  So only the
    finite-index cosets are checked, residue by residue modulo their common
    intersection.
    """
    if not cosets and group is None:
        raise ValueError("empty cover needs an explicit group")
    G = group if group is not None else cosets[0].group
    for c in cosets:
        if c.group is not G:
            raise MixedGroups("cosets belong to different groups")
    total = sum((c.subgroup.index().reciprocal() for c in cosets), Fraction(0))
    finite = [c for c in cosets if G._sub_index(c.subgroup.key) is not None]
    if not finite:
        return NeumannResult(False, total, G.identity())
    D = finite[0].subgroup.key
    for c in finite[1:]:
        D = G._sub_intersect(D, c.subgroup.key)
    for t in _transversal(G, D, G._whole_key()):
        if not any(G._coset_rep(c.subgroup.key, t) == c.rep for c in finite):
            return NeumannResult(False, total, Element(G, t))
    if total < 1:
        raise InvariantViolation(f"cover found with reciprocal sum {total} < 1")
    return NeumannResult(True, total)
