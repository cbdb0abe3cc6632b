"""Central extensions of an abelian group A by an abelian group N.

Both A and N are given by a tuple of moduli, with 0 standing for a copy of Z.
An alternating pairing β on the generators of A with values in N defines the
cocycle ``c(a, b) = Σ_{i<j} a_i b_j β(e_i, e_j)`` and the law

    (ν, a)(μ, b) = (ν + μ + c(a, b), a + b),

so that ``[g, h] = (β(a, b), 0)`` and N is central.

A subgroup H is stored as ``(B, M, lifts)``: the row HNF of the preimage in
Z^r of the image of H in A (so it contains the torsion relations of A), the row
HNF of the preimage of ``H ∩ N`` (containing the relations of N), and for each
row ``b`` of B the N-coordinate of an element of H over ``b``, reduced mod M.
"""

from __future__ import annotations

import itertools
from math import prod
from typing import Iterator, Optional, Sequence

from .. import intlattice as lat
from ..errors import InvalidPairing
from .base import GroupHandle, shell_rank


def _relation_rows(moduli: Sequence[int]) -> list[tuple]:
    n = len(moduli)
    return [tuple(d if j == i else 0 for j in range(n)) for i, d in enumerate(moduli) if d]


class CentralPairing(GroupHandle):
    class_tag = "central_pairing"

    def __init__(self, a_moduli: Sequence[int], n_moduli: Sequence[int],
                 pairing: Sequence[Sequence[Sequence[int]]], name: str = "G"):
        self.amod = tuple(int(d) for d in a_moduli)
        self.nmod = tuple(int(d) for d in n_moduli)
        if any(d < 0 or d == 1 for d in self.amod + self.nmod):
            raise InvalidPairing("moduli must be 0 (for Z) or at least 2")
        ra, rn = len(self.amod), len(self.nmod)
        if len(pairing) != ra or any(len(row) != ra for row in pairing):
            raise InvalidPairing(f"pairing must be a {ra}x{ra} matrix of N-elements")
        P = []
        for i in range(ra):
            row = []
            for j in range(ra):
                val = tuple(int(x) for x in pairing[i][j])
                if len(val) != rn:
                    raise InvalidPairing(f"pairing entry ({i},{j}) must have {rn} coordinates")
                row.append(self._red_n(val))
            P.append(tuple(row))
        for i in range(ra):
            if any(P[i][i]):
                raise InvalidPairing(f"pairing is not alternating: β(e{i},e{i}) != 0")
            for j in range(ra):
                if self._red_n(lat.add(P[i][j], P[j][i])) != (0,) * rn:
                    raise InvalidPairing(f"pairing is not antisymmetric at ({i},{j})")
                d = self.amod[i]
                if d and any(self._red_n(lat.scale(d, P[i][j]))):
                    raise InvalidPairing(
                        f"pairing not well defined: {d}·β(e{i},e{j}) != 0 in N"
                    )
        self.name = name
        self.pairing = tuple(P)
        self.ra, self.rn = ra, rn
        self.RA = _relation_rows(self.amod)
        self.RN = _relation_rows(self.nmod)
        self._za = (0,) * ra
        self._zn = (0,) * rn
        self.one = (self._zn, self._za)

    # ---- arithmetic ------------------------------------------------------
    def _red_n(self, v) -> tuple:
        return tuple(c % m if m else c for c, m in zip(v, self.nmod))

    def _red_a(self, v) -> tuple:
        return tuple(c % m if m else c for c, m in zip(v, self.amod))

    def cocycle(self, a, b) -> tuple:
        out = [0] * self.rn
        for i in range(self.ra):
            if a[i]:
                for j in range(i + 1, self.ra):
                    if b[j]:
                        k = a[i] * b[j]
                        for t, x in enumerate(self.pairing[i][j]):
                            out[t] += k * x
        return tuple(out)

    def beta(self, a, b) -> tuple:
        """The pairing extended bilinearly (unreduced N-vector)."""
        return lat.sub(self.cocycle(a, b), self.cocycle(b, a))

    def _mul(self, x, y):
        (nu, a), (mu, b) = x, y
        return (self._red_n(lat.add(lat.add(nu, mu), self.cocycle(a, b))), self._red_a(lat.add(a, b)))

    def _inv(self, x):
        nu, a = x
        return (self._red_n(lat.add(lat.scale(-1, nu), self.cocycle(a, a))), self._red_a(lat.scale(-1, a)))

    def _pow(self, x, k: int):
        if k < 0:
            x, k = self._inv(x), -k
        nu, a = x
        c = self.cocycle(a, a)
        return (self._red_n(lat.add(lat.scale(k, nu), lat.scale(k * (k - 1) // 2, c))),
                self._red_a(lat.scale(k, a)))

    @property
    def is_finite(self) -> bool:
        return all(self.amod) and all(self.nmod)

    @property
    def order(self) -> Optional[int]:
        return prod(self.amod) * prod(self.nmod) if self.is_finite else None

    def _generators(self):
        gens = []
        for i in range(self.ra):
            gens.append((self._zn, tuple(int(i == j) for j in range(self.ra))))
        for i in range(self.rn):
            gens.append((tuple(int(i == j) for j in range(self.rn)), self._za))
        return gens

    def _order_key(self, x):
        coords = x[0] + x[1]
        mods = self.nmod + self.amod
        free = [abs(c) for c, m in zip(coords, mods) if not m]
        return (max(free, default=0), tuple(c if m else shell_rank(c) for c, m in zip(coords, mods)))

    def _iter_shell(self, r: int) -> Iterator:
        mods = self.nmod + self.amod
        if all(mods) and r > 0:
            return
        ranges = [range(m) if m else range(-r, r + 1) for m in mods]
        pts = []
        for c in itertools.product(*ranges):
            if max((abs(v) for v, m in zip(c, mods) if not m), default=0) == r:
                pts.append((c[: self.rn], c[self.rn:]))
        pts.sort(key=self._order_key)
        yield from pts

    def _check(self, x):
        try:
            nu, a = x
            nu = tuple(int(c) for c in nu)
            a = tuple(int(c) for c in a)
        except (TypeError, ValueError):
            raise ValueError(f"expected (N-coordinates, A-coordinates), got {x!r}") from None
        if len(nu) != self.rn or len(a) != self.ra:
            raise ValueError(f"coordinate lengths must be {self.rn} and {self.ra}")
        return (self._red_n(nu), self._red_a(a))

    def format(self, x) -> str:
        nu, a = x
        return f"({','.join(map(str, nu))}|{','.join(map(str, a))})"

    # ---- subgroups -------------------------------------------------------
    def _word(self, gens, exps):
        """``Π g_i^{e_i}`` in the given order."""
        x = self.one
        for g, e in zip(gens, exps):
            if e:
                x = self._mul(x, self._pow(g, e))
        return x

    def _sub_make(self, gens):
        ra, rn = self.ra, self.rn
        gens = [g for g in gens if g != self.one]
        k = len(gens)
        rows = [g[1] for g in gens] + self.RA
        B = lat.hnf(rows, ra)
        mrows = list(self.RN)
        for g, h in itertools.combinations(gens, 2):
            mrows.append(self.beta(g[1], h[1]))
        if rows:
            for x in lat.left_kernel(rows, ra):
                mrows.append(self._word(gens, x[:k])[0])
        M = lat.hnf(mrows, rn)
        lifts = []
        for b in B:
            y = lat.solve(rows, ra, b)
            lifts.append(lat.reduce(self._word(gens, y[:k])[0], M))
        return (B, M, tuple(lifts))

    def _lift(self, key, b):
        """An element of H whose A-part is ``b`` (a vector of the lattice B)."""
        B, _, lifts = key
        coeffs = lat.decompose(b, B)
        if coeffs is None:
            return None
        x = self.one
        for c, row, nu in zip(coeffs, B, lifts):
            if c:
                x = self._mul(x, self._pow((nu, self._red_a(row)), c))
        return x

    def _sub_contains(self, key, x) -> bool:
        w = self._lift(key, x[1])
        if w is None:
            return False
        d = self._mul(self._inv(w), x)
        return not any(lat.reduce(d[0], key[1]))

    def _sub_index(self, key) -> Optional[int]:
        ia = lat.index(key[0], self.ra)
        im = lat.index(key[1], self.rn)
        if ia is None or im is None:
            return None
        return ia * im

    @staticmethod
    def _finite_quotient_order(basis, relations) -> Optional[int]:
        """``|L / R|`` for lattices ``R ⊆ L`` given by HNF rows, or None when infinite."""
        if len(basis) != len(relations):
            return None
        lead = lambda row: next(x for x in row if x)
        return prod(map(lead, relations)) // prod(map(lead, basis))

    def _sub_order(self, key) -> Optional[int]:
        ob = self._finite_quotient_order(key[0], self.RA)
        om = self._finite_quotient_order(key[1], self.RN)
        if ob is None or om is None:
            return None
        return ob * om

    def _sub_gens(self, key):
        B, M, lifts = key
        gens = [(nu, self._red_a(b)) for b, nu in zip(B, lifts)]
        gens += [(self._red_n(m), self._za) for m in M]
        return [g for g in gens if g != self.one]

    def _coset_rep(self, key, x):
        B, M, _ = key
        nu, a = x
        a2 = lat.reduce(a, B)
        h = self._lift(key, lat.sub(a2, a))
        y = self._mul(x, h)
        return (lat.reduce(y[0], M), self._red_a(a2))

    def _nu(self, key, b) -> tuple:
        return self._lift(key, b)[0]

    def _sub_intersect(self, k1, k2):
        ra, rn = self.ra, self.rn
        B1, M1, _ = k1
        B2, M2, _ = k2
        J = list(M1) + list(M2)
        gens = [(self._red_n(m), self._za) for m in lat.intersect(M1, M2, rn)]
        D = lat.intersect(B1, B2, ra)
        delta = [lat.sub(self._nu(k1, d), self._nu(k2, d)) for d in D]
        if D:
            for z in lat.left_kernel(delta + J, rn):
                d = lat.vec_mat(z[: len(D)], D, ra)
                nu1 = self._nu(k1, d)
                y = lat.solve(J, rn, lat.sub(self._nu(k2, d), nu1))
                m1 = lat.vec_mat(y[: len(M1)], M1, rn)
                gens.append((self._red_n(lat.add(nu1, m1)), self._red_a(d)))
        return self._sub_make(gens)

    def _coset_meet_point(self, k1, x, k2, y):
        ra, rn = self.ra, self.rn
        B1, M1, _ = k1
        B2, M2, _ = k2
        nu, ag = self._mul(self._inv(x), y)
        s = lat.solve(list(B1) + list(B2), ra, ag)
        if s is None:
            return None
        a0 = lat.vec_mat(s[: len(B1)], B1, ra)
        b0 = lat.vec_mat(s[len(B1):], B2, ra)
        const = lat.add(lat.add(self._nu(k1, a0), self._nu(k2, b0)), self.cocycle(a0, b0))
        D = lat.intersect(B1, B2, ra)
        delta = [lat.add(lat.sub(self._nu(k1, d), self._nu(k2, d)), self.beta(d, b0)) for d in D]
        J = list(M1) + list(M2)
        z = lat.solve(delta + J, rn, lat.sub(nu, const))
        if z is None:
            return None
        d = lat.vec_mat(z[: len(D)], D, ra)
        alpha = lat.add(a0, d)
        bet = lat.sub(b0, d)
        nu1 = self._nu(k1, alpha)
        rest = lat.sub(lat.sub(lat.sub(nu, nu1), self._nu(k2, bet)), self.cocycle(alpha, bet))
        w = lat.solve(J, rn, rest)
        m1 = lat.vec_mat(w[: len(M1)], M1, rn)
        return self._mul(x, (self._red_n(lat.add(nu1, m1)), self._red_a(alpha)))

    def annihilator_rows(self, a) -> list[tuple]:
        """N-vectors ``β(a, e_j)`` for each generator ``e_j`` of A."""
        ra, rn = self.ra, self.rn
        out = []
        for j in range(ra):
            e = tuple(int(i == j) for i in range(ra))
            out.append(self.beta(a, e))
        return out

    def _centralizer(self, x):
        ra, rn = self.ra, self.rn
        gens = []
        if ra:
            w = self.annihilator_rows(x[1])
            gens = [(self._zn, self._red_a(k[:ra])) for k in lat.left_kernel(w + list(self.RN), rn)]
        gens += [g for g in self._generators() if not any(g[1])]
        return self._sub_make(gens)
