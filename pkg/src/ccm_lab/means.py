"""Finitely additive means on finite groups: defects, smoothing and class counts.

On a finite group a mean is just a probability vector, and the supremum of
``|μ(gA) - μ(A)|`` over subsets A is attained at ``A = {x : μ(gx) > μ(x)}``, so
the defect is a maximum of total-variation distances.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .errors import InvariantViolation
from .groups.base import Element
from .groups.finite import FiniteCayley
from .dc import centralizer_orders


@dataclass(frozen=True)
class MeanVector:
    group: FiniteCayley
    weights: tuple

    def __post_init__(self):
        w = tuple(Fraction(x) for x in self.weights)
        if len(w) != self.group.order:
            raise ValueError(f"need {self.group.order} weights, got {len(w)}")
        if any(x < 0 for x in w):
            raise ValueError("weights must be non-negative")
        if sum(w) != 1:
            raise ValueError(f"weights sum to {sum(w)}, not 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, G: FiniteCayley) -> "MeanVector":
        return cls(G, (Fraction(1, G.order),) * G.order)

    @classmethod
    def point_mass(cls, G: FiniteCayley, g: Optional[Element] = None) -> "MeanVector":
        x = G.one if g is None else G._raw(g)
        return cls(G, tuple(Fraction(int(i == x)) for i in range(G.order)))

    @classmethod
    def from_labels(cls, G: FiniteCayley, weights: Mapping[str, object]) -> "MeanVector":
        """Weights keyed by element label; missing labels get weight 0."""
        w = [Fraction(0)] * G.order
        for label, val in weights.items():
            w[G._raw(G.by_label(label))] = Fraction(val)
        return cls(G, tuple(w))

    def to_labels(self) -> dict:
        return {self.group.labels[i]: w for i, w in enumerate(self.weights) if w}

    def of(self, A) -> Fraction:
        """μ(A) for a set of elements."""
        G = self.group
        return sum((self.weights[G._raw(a)] for a in set(A)), Fraction(0))


def random_mean(G: FiniteCayley, rng: random.Random, max_den: int = 64,
                support: Optional[float] = None) -> MeanVector:
    """Rational weights with denominators at most ``max_den``, normalised exactly."""
    raw = [Fraction(rng.randint(0, max_den), rng.randint(1, max_den)) for _ in range(G.order)]
    if support is not None:
        raw = [x if rng.random() < support else Fraction(0) for x in raw]
    if not any(raw):
        raw[rng.randrange(G.order)] = Fraction(1)
    total = sum(raw)
    return MeanVector(G, tuple(x / total for x in raw))


# ---- defects --------------------------------------------------------------------------

def _tv(w: Sequence[Fraction], perm: Sequence[int]) -> Fraction:
    return sum((w[p] - w[x] for x, p in enumerate(perm) if w[p] > w[x]), Fraction(0))


def defect_left(mu: MeanVector) -> Fraction:
    """max_g Σ_x max(μ(gx) - μ(x), 0), which is sup_A |μ(gA) - μ(A)|."""
    G, w = mu.group, mu.weights
    return max(_tv(w, G.table[g]) for g in range(G.order))


def defect_right(mu: MeanVector) -> Fraction:
    G, w = mu.group, mu.weights
    cols = [[G.table[x][g] for x in range(G.order)] for g in range(G.order)]
    return max(_tv(w, c) for c in cols)


def defect_left_bruteforce(mu: MeanVector) -> Fraction:
    """The defining supremum, over all 2^|G| subsets."""
    G, w = mu.group, mu.weights
    n = G.order
    best = Fraction(0)
    for g in range(n):
        diff = [w[G.table[g][x]] - w[x] for x in range(n)]
        sums = [Fraction(0)] * (1 << n)
        for mask in range(1, 1 << n):
            low = (mask & -mask).bit_length() - 1
            sums[mask] = sums[mask & (mask - 1)] + diff[low]
        best = max(best, max(abs(x) for x in sums))
    return best


def smooth_mean(mu: MeanVector, check: bool = True) -> MeanVector:
    """μ̄({x}) = Σ_h μ({h}) μ({hx}), the average of the left translates of μ."""
    G, w = mu.group, mu.weights
    T = G.table
    out = [Fraction(0)] * G.order
    for h, wh in enumerate(w):
        if wh:
            row = T[h]
            for x in range(G.order):
                out[x] += wh * w[row[x]]
    bar = MeanVector(G, tuple(out))
    if check:
        dl, dr = defect_left(mu), defect_right(mu)
        if defect_right(bar) > dr:
            raise InvariantViolation("smoothing increased the right defect")
        if defect_left(bar) > (1 + dr) / 2 * dl:
            raise InvariantViolation("smoothing broke the left-defect bound")
    return bar


# ---- conjugacy ------------------------------------------------------------------------

@dataclass(frozen=True)
class ConjugacyPartition:
    group: FiniteCayley
    classes: tuple

    @property
    def count(self) -> int:
        return len(self.classes)


def conjugacy_partition(G: FiniteCayley) -> ConjugacyPartition:
    T = G.table
    gens = G._generators()
    inv = [G._inv(g) for g in gens]
    seen = [False] * G.order
    classes = []
    for x in range(G.order):
        if seen[x]:
            continue
        cls = {x}
        frontier = [x]
        while frontier:
            new = []
            for y in frontier:
                for g, gi in zip(gens, inv):
                    z = T[T[g][y]][gi]
                    if z not in cls:
                        cls.add(z)
                        new.append(z)
            frontier = new
        for y in cls:
            seen[y] = True
        classes.append(tuple(sorted(cls)))
    return ConjugacyPartition(G, tuple(classes))


def k_uniform(G: FiniteCayley) -> Fraction:
    """cc(G)/|G|."""
    return Fraction(conjugacy_partition(G).count, G.order)


def k_mu(G: FiniteCayley, mu: MeanVector) -> Fraction:
    """Least μ-weight of a set of class representatives: the sum of class minima."""
    if mu.group is not G:
        raise ValueError("mean belongs to another group")
    return sum((min(mu.weights[x] for x in c) for c in conjugacy_partition(G).classes), Fraction(0))


@dataclass(frozen=True)
class KmuCheck:
    lhs: Fraction
    rhs: Fraction
    holds: bool


def kmu_strata_inequality(G: FiniteCayley, mu: MeanVector, n: int) -> KmuCheck:
    """(n+1)·k_μ(G) <= 1 + n·μ(X_n)."""
    if n < 1:
        raise ValueError("n must be positive")
    order = G.order
    xn = [x for x, c in enumerate(centralizer_orders(G)) if order <= n * c]
    lhs = (n + 1) * k_mu(G, mu)
    rhs = 1 + n * sum((mu.weights[x] for x in xn), Fraction(0))
    return KmuCheck(lhs, rhs, lhs <= rhs)
