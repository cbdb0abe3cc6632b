"""Value types shared by the three group classes, plus class-independent algorithms.

Every group class stores elements as plain hashable coordinate tuples ("raw"
coordinates) and exposes a small raw interface (``_mul``, ``_inv``,
``_sub_make``, ``_coset_rep`` ...).  The public surface wraps raw coordinates
in :class:`Element` so operands from different handles can be told apart.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Hashable, Iterable, Iterator, Optional, Sequence

from ..errors import MixedGroups, UnsupportedForClass

Raw = Hashable
SubKey = Hashable

CONJUGATE_CAP = 512


class ExtendedIndex:
    """A subgroup index: a positive integer or the value ``INFINITE``."""

    __slots__ = ("value",)

    def __init__(self, value: Optional[int]):
        if value is not None and value < 1:
            raise ValueError("index must be positive")
        self.value = value

    @property
    def is_finite(self) -> bool:
        return self.value is not None

    def reciprocal(self) -> Fraction:
        return Fraction(0) if self.value is None else Fraction(1, self.value)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ExtendedIndex):
            return self.value == other.value
        if isinstance(other, int):
            return self.value == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.value)

    def __int__(self) -> int:
        if self.value is None:
            raise ValueError("infinite index has no integer value")
        return self.value

    def __repr__(self) -> str:
        return "Infinite" if self.value is None else f"ExtendedIndex({self.value})"

    def __str__(self) -> str:
        return "Infinite" if self.value is None else str(self.value)


INFINITE = ExtendedIndex(None)


class Element:
    """A group element: raw coordinates tied to their owning handle."""

    __slots__ = ("group", "coords")

    def __init__(self, group: "GroupHandle", coords: Raw):
        self.group = group
        self.coords = coords

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Element):
            return NotImplemented
        return self.group is other.group and self.coords == other.coords

    def __hash__(self) -> int:
        return hash(self.coords)

    def __mul__(self, other: "Element") -> "Element":
        return self.group.multiply(self, other)

    def inverse(self) -> "Element":
        return self.group.invert(self)

    def sort_key(self):
        return self.group._order_key(self.coords)

    def __lt__(self, other: "Element") -> bool:
        return self.sort_key() < other.sort_key()

    def __repr__(self) -> str:
        return self.group.format(self.coords)


class Subgroup:
    """Canonical subgroup data plus the generator list it was built from."""

    __slots__ = ("group", "key", "source_gens")

    def __init__(self, group: "GroupHandle", key: SubKey, source_gens: tuple = ()):
        self.group = group
        self.key = key
        self.source_gens = source_gens

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.group is other.group and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __contains__(self, g: Element) -> bool:
        return self.group._sub_contains(self.key, self.group._raw(g))

    def index(self) -> ExtendedIndex:
        return ExtendedIndex(self.group._sub_index(self.key))

    @property
    def order(self) -> Optional[int]:
        """Number of elements, or None when the subgroup is infinite."""
        return self.group._sub_order(self.key)

    def generators(self) -> list[Element]:
        """Generators read off the canonical data."""
        return [Element(self.group, x) for x in self.group._sub_gens(self.key)]

    def __repr__(self) -> str:
        return f"Subgroup({self.group.name}, index={self.index()})"


class Coset:
    """The left coset ``rep * subgroup`` with a canonical representative."""

    __slots__ = ("subgroup", "rep")

    def __init__(self, subgroup: Subgroup, rep: Raw):
        self.subgroup = subgroup
        self.rep = rep

    @property
    def group(self) -> "GroupHandle":
        return self.subgroup.group

    @property
    def element(self) -> Element:
        return Element(self.subgroup.group, self.rep)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Coset):
            return NotImplemented
        return self.subgroup == other.subgroup and self.rep == other.rep

    def __hash__(self) -> int:
        return hash((self.subgroup.key, self.rep))

    def __contains__(self, g: Element) -> bool:
        G = self.group
        x = G._raw(g)
        return G._sub_contains(self.subgroup.key, G._mul(G._inv(self.rep), x))

    def sort_key(self):
        return (self.subgroup.key, self.group._order_key(self.rep))

    def __repr__(self) -> str:
        return f"Coset({self.group.format(self.rep)} * H[index={self.subgroup.index()}])"


def shell_rank(z: int) -> int:
    """Position of ``z`` in the order 0, -1, 1, -2, 2, ..."""
    return 2 * z if z >= 0 else -2 * z - 1


class GroupHandle:
    """Base class for the supported group classes."""

    name: str = "G"
    class_tag: str = ""

    # ---- raw interface implemented by subclasses -------------------------
    one: Raw

    @property
    def is_finite(self) -> bool:
        raise NotImplementedError

    @property
    def order(self) -> Optional[int]:
        raise NotImplementedError

    def _mul(self, x: Raw, y: Raw) -> Raw:
        raise NotImplementedError

    def _inv(self, x: Raw) -> Raw:
        raise NotImplementedError

    def _generators(self) -> list[Raw]:
        raise NotImplementedError

    def _order_key(self, x: Raw) -> Any:
        raise NotImplementedError

    def _iter_shell(self, r: int) -> Iterator[Raw]:
        """Elements whose free coordinates have max norm exactly ``r``."""
        raise NotImplementedError

    def _check(self, x: Raw) -> Raw:
        raise NotImplementedError

    def format(self, x: Raw) -> str:
        return repr(x)

    def _sub_make(self, gens: Sequence[Raw]) -> SubKey:
        raise NotImplementedError

    def _sub_contains(self, key: SubKey, x: Raw) -> bool:
        raise NotImplementedError

    def _sub_index(self, key: SubKey) -> Optional[int]:
        raise NotImplementedError

    def _sub_order(self, key: SubKey) -> Optional[int]:
        raise NotImplementedError

    def _sub_gens(self, key: SubKey) -> list[Raw]:
        raise NotImplementedError

    def _coset_rep(self, key: SubKey, x: Raw) -> Raw:
        raise NotImplementedError

    def _sub_intersect(self, k1: SubKey, k2: SubKey) -> SubKey:
        raise NotImplementedError

    def _centralizer(self, x: Raw) -> SubKey:
        raise NotImplementedError

    def _coset_meet_point(self, k1: SubKey, x: Raw, k2: SubKey, y: Raw) -> Optional[Raw]:
        """Some element of ``x*H1 ∩ y*H2`` or None when they are disjoint."""
        raise NotImplementedError

    # ---- element level ---------------------------------------------------
    def _raw(self, g: Element) -> Raw:
        if not isinstance(g, Element):
            raise TypeError(f"expected Element, got {type(g).__name__}")
        if g.group is not self:
            raise MixedGroups(f"element {g!r} does not belong to {self.name}")
        return g.coords

    def element(self, coords: Raw) -> Element:
        return Element(self, self._check(coords))

    def identity(self) -> Element:
        return Element(self, self.one)

    def multiply(self, g: Element, h: Element) -> Element:
        return Element(self, self._mul(self._raw(g), self._raw(h)))

    def invert(self, g: Element) -> Element:
        return Element(self, self._inv(self._raw(g)))

    def _comm(self, x: Raw, y: Raw) -> Raw:
        return self._mul(self._mul(self._inv(x), self._inv(y)), self._mul(x, y))

    def commutator(self, g: Element, h: Element) -> Element:
        """``g^-1 h^-1 g h``."""
        return Element(self, self._comm(self._raw(g), self._raw(h)))

    def generators(self) -> list[Element]:
        return [Element(self, x) for x in self._generators()]

    def iter_raw(self) -> Iterator[Raw]:
        """All elements in the fixed order; infinite for infinite groups."""
        for r in itertools.count():
            shell = list(self._iter_shell(r))
            if not shell and self.is_finite:
                return
            yield from shell
            if self.is_finite:
                return

    def enumerate_elements(self, bound: int) -> list[Element]:
        if self.is_finite:
            return [Element(self, x) for x in self.iter_raw()]
        out = []
        for r in range(bound + 1):
            out.extend(Element(self, x) for x in self._iter_shell(r))
        return out

    # ---- subgroup level --------------------------------------------------
    def _wrap(self, key: SubKey, gens: Iterable[Raw] = ()) -> Subgroup:
        return Subgroup(self, key, tuple(gens))

    def subgroup(self, gens: Iterable[Element]) -> Subgroup:
        raw = [self._raw(g) for g in gens]
        return self._wrap(self._sub_make(raw), raw)

    def _own(self, H: Subgroup) -> SubKey:
        if not isinstance(H, Subgroup):
            raise TypeError(f"expected Subgroup, got {type(H).__name__}")
        if H.group is not self:
            raise MixedGroups(f"subgroup does not belong to {self.name}")
        return H.key

    def whole(self) -> Subgroup:
        gens = self._generators()
        return self._wrap(self._whole_key(), gens)

    def _whole_key(self) -> SubKey:
        key = getattr(self, "_whole_cache", None)
        if key is None:
            key = self._sub_make(self._generators())
            self._whole_cache = key
        return key

    def trivial(self) -> Subgroup:
        return self._wrap(self._sub_make([]))

    def coset(self, H: Subgroup, g: Element) -> Coset:
        key = self._own(H)
        return Coset(H, self._coset_rep(key, self._raw(g)))

    def intersect(self, H: Subgroup, K: Subgroup) -> Subgroup:
        return self._wrap(self._sub_intersect(self._own(H), self._own(K)))

    def centralizer(self, g: Element) -> Subgroup:
        return self._wrap(self._centralizer(self._raw(g)))

    def _sub_conjugate(self, key: SubKey, x: Raw) -> SubKey:
        xi = self._inv(x)
        return self._sub_make([self._mul(self._mul(x, h), xi) for h in self._sub_gens(key)])

    def conjugate(self, H: Subgroup, g: Element) -> Subgroup:
        """``g H g^-1``."""
        return self._wrap(self._sub_conjugate(self._own(H), self._raw(g)))

    def _gens_with_inverses(self) -> list[Raw]:
        out = []
        for s in self._generators():
            out.append(s)
            si = self._inv(s)
            if si != s:
                out.append(si)
        return out

    def _is_normal(self, key: SubKey) -> bool:
        hs = self._sub_gens(key)
        for s in self._gens_with_inverses():
            si = self._inv(s)
            for h in hs:
                if not self._sub_contains(key, self._mul(self._mul(s, h), si)):
                    return False
        return True

    def is_normal(self, H: Subgroup) -> bool:
        return self._is_normal(self._own(H))

    def _conjugates(self, key: SubKey, cap: int = CONJUGATE_CAP) -> list[SubKey]:
        seen = {key: None}
        queue = deque([key])
        gens = self._gens_with_inverses()
        while queue:
            k = queue.popleft()
            for s in gens:
                k2 = self._sub_conjugate(k, s)
                if k2 not in seen:
                    if len(seen) >= cap:
                        raise UnsupportedForClass(
                            f"more than {cap} conjugates; normal core not computable here"
                        )
                    seen[k2] = None
                    queue.append(k2)
        return list(seen)

    def normal_core(self, H: Subgroup) -> Subgroup:
        keys = self._conjugates(self._own(H))
        core = keys[0]
        for k in keys[1:]:
            core = self._sub_intersect(core, k)
        return self._wrap(core)

    def _center_key(self) -> SubKey:
        key = self._whole_key()
        for s in self._generators():
            key = self._sub_intersect(key, self._centralizer(s))
        return key

    def center(self) -> Subgroup:
        return self._wrap(self._center_key())

    def _derived_key(self, limit: int = 64) -> SubKey:
        gens = self._generators()
        comms = [self._comm(a, b) for a, b in itertools.combinations(gens, 2)]
        key = self._sub_make(comms)
        conj = self._gens_with_inverses()
        for _ in range(limit):
            hs = self._sub_gens(key)
            more = list(hs)
            for s in conj:
                si = self._inv(s)
                more.extend(self._mul(self._mul(s, h), si) for h in hs)
            new = self._sub_make(more)
            if new == key:
                return key
            key = new
        raise UnsupportedForClass("derived subgroup normal closure did not stabilise")

    def derived_subgroup(self) -> Subgroup:
        return self._wrap(self._derived_key())

    def centralizer_of_subgroup(self, K: Subgroup) -> Subgroup:
        key = self._whole_key()
        for k in self._sub_gens(self._own(K)):
            key = self._sub_intersect(key, self._centralizer(k))
        return self._wrap(key)

    def _transversal(self, sub: SubKey, sup: Optional[SubKey] = None, cap: Optional[int] = None) -> list[Raw]:
        """Canonical representatives of the left cosets of ``sub`` inside ``sup``."""
        if sup is None:
            sup = self._whole_key()
        start = self._coset_rep(sub, self.one)
        seen = {start: None}
        queue = deque([start])
        gens = []
        for s in self._sub_gens(sup):
            gens.append(s)
            gens.append(self._inv(s))
        while queue:
            x = queue.popleft()
            for s in gens:
                y = self._coset_rep(sub, self._mul(s, x))
                if y not in seen:
                    seen[y] = None
                    if cap is not None and len(seen) > cap:
                        from ..errors import QuotientTooLarge

                        raise QuotientTooLarge(f"more than {cap} cosets")
                    queue.append(y)
        return sorted(seen, key=self._order_key)

    def transversal(self, H: Subgroup, within: Optional[Subgroup] = None) -> list[Element]:
        """Canonical left coset representatives of ``H`` (in ``within`` or in G)."""
        key = self._own(H)
        if not self._sub_index(key):
            raise UnsupportedForClass("transversal of an infinite-index subgroup")
        sup = None if within is None else self._own(within)
        return [Element(self, x) for x in self._transversal(key, sup)]
