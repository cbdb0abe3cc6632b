"""Finite groups given by a multiplication table over element indices 0..n-1."""

from __future__ import annotations

from collections import deque
from typing import Iterator, Optional, Sequence

import numpy as np

from ..errors import InvalidTable
from .base import GroupHandle

MAX_CHECKED_ORDER = 256


class FiniteCayley(GroupHandle):
    """Elements are table indices; ``table[i][j]`` is the index of ``i*j``.

    User tables are checked in full (Latin square, identity, inverses,
    associativity) and refused above ``MAX_CHECKED_ORDER`` elements.  Builders
    that produce a table from a known group (products, permutation closures,
    quotients) pass ``trusted=True`` and skip the cubic associativity check.
    """

    class_tag = "finite"

    def __init__(self, labels: Sequence[str], table: Sequence[Sequence[int]], name: str = "G",
                 trusted: bool = False):
        n = len(table)
        if n == 0:
            raise InvalidTable("empty table")
        if len(labels) != n:
            raise InvalidTable(f"{len(labels)} labels for {n} rows")
        if len(set(labels)) != n:
            raise InvalidTable("duplicate labels")
        if not trusted and n > MAX_CHECKED_ORDER:
            raise InvalidTable(f"order {n} exceeds the checked maximum {MAX_CHECKED_ORDER}")
        try:
            T = np.asarray(table, dtype=np.int64)
        except (ValueError, TypeError) as exc:
            raise InvalidTable(f"malformed table: {exc}") from None
        if T.shape != (n, n):
            raise InvalidTable(f"table is not square {n}x{n}")
        if T.min() < 0 or T.max() >= n:
            raise InvalidTable("table entry out of range")
        full = np.arange(n)
        if not trusted:
            if not all((np.sort(T[i]) == full).all() for i in range(n)):
                raise InvalidTable("a row is not a permutation (not a Latin square)")
            if not all((np.sort(T[:, j]) == full).all() for j in range(n)):
                raise InvalidTable("a column is not a permutation (not a Latin square)")
        ids = [e for e in range(n) if (T[e] == full).all() and (T[:, e] == full).all()]
        if not ids:
            raise InvalidTable("no identity element")
        e = ids[0]
        inv = np.empty(n, dtype=np.int64)
        for i in range(n):
            hits = np.nonzero(T[i] == e)[0]
            if len(hits) != 1 or T[hits[0], i] != e:
                raise InvalidTable(f"element {labels[i]!r} has no two-sided inverse")
            inv[i] = hits[0]
        if not trusted and not (T[T, :] == T[:, T]).all():
            raise InvalidTable("table is not associative")

        self.name = name
        self.labels = tuple(str(x) for x in labels)
        self._label_index = {lab: i for i, lab in enumerate(self.labels)}
        self.table = tuple(tuple(int(x) for x in row) for row in T)
        self._inverse = tuple(int(x) for x in inv)
        self.one = e
        self._n = n
        self._member_cache: dict = {}
        self._gens_cache: dict = {}

    # ---- element level ---------------------------------------------------
    @property
    def is_finite(self) -> bool:
        return True

    @property
    def order(self) -> int:
        return self._n

    def _mul(self, x: int, y: int) -> int:
        return self.table[x][y]

    def _inv(self, x: int) -> int:
        return self._inverse[x]

    def _order_key(self, x: int) -> int:
        return x

    def _iter_shell(self, r: int) -> Iterator[int]:
        if r == 0:
            yield from range(self._n)

    def _check(self, x) -> int:
        if isinstance(x, str):
            if x not in self._label_index:
                raise ValueError(f"unknown element label {x!r}")
            return self._label_index[x]
        if not isinstance(x, (int, np.integer)) or not 0 <= x < self._n:
            raise ValueError(f"element index {x!r} out of range")
        return int(x)

    def format(self, x: int) -> str:
        return self.labels[x]

    def _generators(self) -> list[int]:
        return self._sub_gens(tuple(range(self._n)))

    def by_label(self, label: str):
        return self.element(label)

    # ---- subgroups: canonical data is the sorted tuple of member indices --
    def _closure(self, gens: Sequence[int]) -> set:
        seen = {self.one}
        queue = deque([self.one])
        gens = [g for g in set(gens) if g != self.one]
        T = self.table
        while queue:
            x = queue.popleft()
            for g in gens:
                y = T[x][g]
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return seen

    def _sub_make(self, gens: Sequence[int]) -> tuple:
        return tuple(sorted(self._closure(gens)))

    def _members(self, key: tuple) -> frozenset:
        s = self._member_cache.get(key)
        if s is None:
            s = frozenset(key)
            self._member_cache[key] = s
        return s

    def _sub_contains(self, key: tuple, x: int) -> bool:
        return x in self._members(key)

    def _sub_index(self, key: tuple) -> int:
        return self._n // len(key)

    def _sub_order(self, key: tuple) -> int:
        return len(key)

    def _sub_gens(self, key: tuple) -> list[int]:
        gens = self._gens_cache.get(key)
        if gens is None:
            gens = []
            cur = {self.one}
            for x in key:
                if x not in cur:
                    gens.append(x)
                    cur = self._closure(gens)
            self._gens_cache[key] = gens
        return list(gens)

    def _coset_rep(self, key: tuple, x: int) -> int:
        row = self.table[x]
        return min(row[h] for h in key)

    def _sub_intersect(self, k1: tuple, k2: tuple) -> tuple:
        return tuple(sorted(self._members(k1) & self._members(k2)))

    def _centralizer(self, x: int) -> tuple:
        T = self.table
        return tuple(h for h in range(self._n) if T[x][h] == T[h][x])

    def _coset_meet_point(self, k1: tuple, x: int, k2: tuple, y: int) -> Optional[int]:
        a = {self.table[x][h] for h in k1}
        b = {self.table[y][h] for h in k2}
        common = a & b
        return min(common) if common else None

    def _center_key(self) -> tuple:
        T = self.table
        return tuple(z for z in range(self._n) if all(T[z][g] == T[g][z] for g in self._generators()))

    def _is_normal(self, key: tuple) -> bool:
        mem = self._members(key)
        T = self.table
        for g in self._generators():
            gi = self._inv(g)
            if any(T[T[g][h]][gi] not in mem for h in key):
                return False
        return True

    # ---- structure used by the dc engine ---------------------------------
    def all_subgroups(self) -> list[tuple]:
        """Every subgroup, as canonical keys sorted by (order, members).

        Built by closing under joins starting from the cyclic subgroups, which
        reaches every subgroup since each one is generated by its cyclic
        subgroups.
        """
        cyclic = {self._sub_make([x]) for x in range(self._n)}
        found = set(cyclic)
        frontier = list(found)
        cyclic = sorted(cyclic)
        while frontier:
            nxt = []
            for H in frontier:
                Hs = self._members(H)
                for C in cyclic:
                    if not Hs.issuperset(C):
                        J = self._sub_make(list(H) + list(C))
                        if J not in found:
                            found.add(J)
                            nxt.append(J)
            frontier = nxt
        return sorted(found, key=lambda k: (len(k), k))

    def normal_subgroups(self) -> list[tuple]:
        return [k for k in self.all_subgroups() if self._is_normal(k)]

    def quotient(self, key: tuple, name: Optional[str] = None) -> "FiniteCayley":
        """The quotient by a normal subgroup, elements labelled by coset reps."""
        from ..errors import NotNormal

        if not self._is_normal(key):
            raise NotNormal("subgroup is not normal")
        reps = sorted({self._coset_rep(key, x) for x in range(self._n)})
        pos = {r: i for i, r in enumerate(reps)}
        table = [[pos[self._coset_rep(key, self.table[a][b])] for b in reps] for a in reps]
        labels = [self.labels[r] + "N" if len(key) > 1 else self.labels[r] for r in reps]
        return FiniteCayley(labels, table, name=name or f"{self.name}/N", trusted=True)
