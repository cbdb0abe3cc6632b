"""Semidirect products Z^n ⋊ Q with Q finite acting through integer matrices.

Elements are pairs ``(v, q)`` with ``v`` an integer tuple and ``q`` an index
of the point group.  The law is ``(v, q)(w, r) = (v + φ(q) w, q r)``.

A subgroup H is stored as ``(P, L, corr)``: the image P of H in Q (sorted
indices), the row HNF of the lattice ``L = H ∩ Z^n``, and for each p in P a
translation ``t_p`` reduced modulo L such that ``(t_p, p)`` lies in H.
"""

from __future__ import annotations

import itertools
from collections import deque
from typing import Iterator, Optional, Sequence

from .. import intlattice as lat
from ..errors import InvalidAction
from .base import GroupHandle, shell_rank
from .finite import FiniteCayley


class VirtuallyAbelian(GroupHandle):
    class_tag = "virtually_abelian"

    def __init__(self, rank: int, Q: FiniteCayley, phi: Sequence[Sequence[Sequence[int]]], name: str = "G"):
        if rank < 0:
            raise InvalidAction("rank must be non-negative")
        if len(phi) != Q.order:
            raise InvalidAction(f"need one matrix per point-group element ({Q.order}), got {len(phi)}")
        mats = []
        for q, M in enumerate(phi):
            M = tuple(tuple(int(x) for x in row) for row in M)
            if len(M) != rank or any(len(row) != rank for row in M):
                raise InvalidAction(f"matrix for {Q.labels[q]!r} is not {rank}x{rank}")
            if abs(lat.det(M)) != 1:
                raise InvalidAction(f"matrix for {Q.labels[q]!r} is not unimodular")
            mats.append(M)
        for q in range(Q.order):
            for r in range(Q.order):
                if lat.mat_mul(mats[q], mats[r]) != mats[Q._mul(q, r)]:
                    raise InvalidAction(
                        f"action is not a homomorphism at ({Q.labels[q]!r}, {Q.labels[r]!r})"
                    )
        self.name = name
        self.rank = rank
        self.Q = Q
        self.phi = tuple(mats)
        self.one = ((0,) * rank, Q.one)
        self._zero = (0,) * rank
        self._image_cache: dict = {}

    @property
    def is_finite(self) -> bool:
        return self.rank == 0

    @property
    def order(self) -> Optional[int]:
        return self.Q.order if self.rank == 0 else None

    def act(self, q: int, v: Sequence[int]) -> tuple:
        return lat.mat_vec(self.phi[q], v)

    def _mul(self, x, y):
        v, q = x
        w, r = y
        return (lat.add(v, self.act(q, w)), self.Q._mul(q, r))

    def _inv(self, x):
        v, q = x
        qi = self.Q._inv(q)
        return (tuple(-c for c in self.act(qi, v)), qi)

    def _generators(self):
        gens = []
        for i in range(self.rank):
            gens.append((tuple(int(i == j) for j in range(self.rank)), self.Q.one))
        for q in self.Q._generators():
            gens.append((self._zero, q))
        return gens

    def _order_key(self, x):
        v, q = x
        return (max((abs(c) for c in v), default=0), tuple(shell_rank(c) for c in v), q)

    def _iter_shell(self, r: int) -> Iterator:
        n = self.rank
        if n == 0:
            if r == 0:
                for q in range(self.Q.order):
                    yield (self._zero, q)
            return
        vs = [v for v in itertools.product(range(-r, r + 1), repeat=n) if max(map(abs, v)) == r]
        vs.sort(key=lambda v: tuple(shell_rank(c) for c in v))
        for v in vs:
            for q in range(self.Q.order):
                yield (v, q)

    def _check(self, x):
        try:
            v, q = x
            v = tuple(int(c) for c in v)
        except (TypeError, ValueError):
            raise ValueError(f"expected (vector, point-group element), got {x!r}") from None
        if len(v) != self.rank:
            raise ValueError(f"vector {v} has length {len(v)}, expected {self.rank}")
        return (v, self.Q._check(q))

    def format(self, x) -> str:
        v, q = x
        return f"({','.join(map(str, v))};{self.Q.labels[q]})"

    # ---- subgroups -------------------------------------------------------
    def _sub_make(self, gens):
        n = self.rank
        Q = self.Q
        u = {Q.one: self.one}
        queue = deque([Q.one])
        gens = [g for g in gens if g != self.one]
        schreier = []
        while queue:
            p = queue.popleft()
            up = u[p]
            for s in gens:
                x = self._mul(up, s)
                q2 = x[1]
                if q2 not in u:
                    u[q2] = x
                    queue.append(q2)
                else:
                    k = self._mul(x, self._inv(u[q2]))
                    if any(k[0]):
                        schreier.append(k[0])
        L = lat.hnf(schreier, n)
        P = tuple(sorted(u))
        corr = tuple(lat.reduce(u[p][0], L) for p in P)
        return (P, L, corr)

    def _corr(self, key, p) -> Optional[tuple]:
        P, L, corr = key
        try:
            return corr[P.index(p)]
        except ValueError:
            return None

    def _sub_contains(self, key, x) -> bool:
        t = self._corr(key, x[1])
        if t is None:
            return False
        return not any(lat.reduce(lat.sub(x[0], t), key[1]))

    def _sub_index(self, key) -> Optional[int]:
        P, L, _ = key
        li = lat.index(L, self.rank)
        if li is None:
            return None
        return (self.Q.order // len(P)) * li

    def _sub_order(self, key) -> Optional[int]:
        P, L, _ = key
        return len(P) if not L else None

    def _sub_gens(self, key):
        P, L, corr = key
        gens = [(row, self.Q.one) for row in L]
        for p, t in zip(P, corr):
            if p != self.Q.one:
                gens.append((t, p))
        return gens

    def _image_lattice(self, q: int, L: tuple) -> tuple:
        k = (q, L)
        out = self._image_cache.get(k)
        if out is None:
            out = lat.transform_basis(self.phi[q], L, self.rank)
            self._image_cache[k] = out
        return out

    def _coset_data(self, key, x, q2):
        """Translation part ``a`` and lattice with ``{(a + l, q2) : l}`` = xH ∩ (Z^n × {q2})."""
        v, q = x
        p = self.Q._mul(self.Q._inv(q), q2)
        t = self._corr(key, p)
        if t is None:
            return None
        a = lat.add(v, self.act(q, t))
        return a, self._image_lattice(q2, key[1])

    def _coset_rep(self, key, x):
        P = key[0]
        q = x[1]
        q2 = min(self.Q._mul(q, p) for p in P)
        a, Lam = self._coset_data(key, x, q2)
        return (lat.reduce(a, Lam), q2)

    def _sub_intersect(self, k1, k2):
        P1, L1, _ = k1
        P2, L2, _ = k2
        n = self.rank
        L = lat.intersect(L1, L2, n)
        gens = [(row, self.Q.one) for row in L]
        for p in sorted(set(P1) & set(P2)):
            # H and K meet over p iff (t1_p + L1) ∩ (t2_p + L2) is non-empty
            t1, t2 = self._corr(k1, p), self._corr(k2, p)
            z = lat.solve(list(L1) + list(L2), n, lat.sub(t2, t1))
            if z is not None:
                gens.append((lat.add(t1, lat.vec_mat(z[: len(L1)], L1, n)), p))
        return self._sub_make(gens)

    def _coset_meet_point(self, k1, x, k2, y):
        n = self.rank
        Q = self.Q
        qs1 = {Q._mul(x[1], p) for p in k1[0]}
        qs2 = {Q._mul(y[1], p) for p in k2[0]}
        for q2 in sorted(qs1 & qs2):
            a1, La = self._coset_data(k1, x, q2)
            a2, Lb = self._coset_data(k2, y, q2)
            rows = list(La) + list(Lb)
            z = lat.solve(rows, n, lat.sub(a2, a1))
            if z is None:
                continue
            pt = lat.add(a1, lat.vec_mat(z[: len(La)], La, n))
            return (pt, q2)
        return None

    def _centralizer(self, x):
        v, q = x
        n = self.rank
        Q = self.Q
        A = [[self.phi[q][i][j] - int(i == j) for j in range(n)] for i in range(n)]
        At = [list(col) for col in zip(*A)] if n else []
        gens = [(tuple(k), Q.one) for k in lat.left_kernel(At, n)]
        for r in range(Q.order):
            if Q._mul(q, r) != Q._mul(r, q):
                continue
            Br = [[self.phi[r][i][j] - int(i == j) for j in range(n)] for i in range(n)]
            b = lat.mat_vec(Br, v)
            w = lat.solve(At, n, b) if n else []
            if w is not None:
                gens.append((tuple(w), r))
        return self._sub_make(gens)
