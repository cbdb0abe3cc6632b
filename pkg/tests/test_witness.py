import random
from fractions import Fraction

import pytest

from ccm_lab.coset_ring import CosetRingElement, from_coset, from_cosets
from ccm_lab.errors import AtomTooSmall, NotAPartition
from ccm_lab.groups import (
    dihedral,
    free_abelian,
    infinite_dihedral,
    integral_heisenberg,
    mod2_symplectic,
    symmetric,
    z2_rot4,
)
from ccm_lab.witness import (
    approximate_mean,
    build_witness,
    disjoint_translates_witness,
    folner_amplify,
    folner_set,
    recompute_certificate,
)


def classes(G, F, H):
    """Partition F by left H-cosets using only membership tests."""
    out = []
    for x in F:
        for cls in out:
            if H.__contains__(G.multiply(G.invert(cls[0]), x)):
                cls.append(x)
                break
        else:
            out.append([x])
    return out


def oracle_deviation(G, F, H):
    cls = classes(G, F, H)
    idx = H.index()
    target = idx.reciprocal()
    dev = max(abs(Fraction(len(c), len(F)) - target) for c in cls)
    if idx.is_finite and len(cls) < int(idx):
        dev = max(dev, target)
    return dev


def oracle_ratio(G, F, g):
    S = {x.coords for x in F}
    T = {(g * x).coords for x in F}
    return Fraction(len(S ^ T), len(S))


# ---- examples -------------------------------------------------------------------------

def Zel(Z, k):
    return Z.element(((k,), 0))


def test_build_witness_examples():
    Z = free_abelian(1)
    two = Z.subgroup([Zel(Z, 2)])
    w = build_witness(Z, [(two, Fraction(1, 2))])
    assert [x.coords[0][0] for x in w.elements] == [0, -1]
    assert w.deviations == [0]
    w = build_witness(Z, [(two, Fraction(1, 2)), (Z.trivial(), Fraction(1, 3))])
    assert sorted(x.coords[0][0] for x in w.elements) == [-2, -1, 0, 1]
    assert w.deviations == [0, Fraction(1, 4)]
    Z2 = free_abelian(2)
    line = Z2.subgroup([Z2.element(((1, 0), 0))])
    w = build_witness(Z2, [(line, Fraction(1, 4))])
    assert len(w) == 5 and len({x.coords[0][1] for x in w.elements}) == 5
    assert w.deviations == [Fraction(1, 5)]


def test_approximate_mean_examples():
    Z = free_abelian(1)
    two = Z.subgroup([Zel(Z, 2)])
    ev, od = from_coset(Z.coset(two, Zel(Z, 0))), from_coset(Z.coset(two, Zel(Z, 1)))
    w = approximate_mean(Z, [(ev, Fraction(1, 2)), (od, Fraction(1, 2))], 4)
    vals = [x.coords[0][0] for x in w.elements]
    assert sum(v % 2 == 0 for v in vals) == 2 and len(vals) == 4
    w = approximate_mean(Z, [(ev, 1), (od, 0)], 5)
    assert all(x.coords[0][0] % 2 == 0 for x in w.elements)
    three = Z.subgroup([Zel(Z, 3)])
    atoms = [(from_coset(Z.coset(three, Zel(Z, r))), Fraction(1, 3)) for r in range(3)]
    w = approximate_mean(Z, atoms, 3)
    assert sorted(x.coords[0][0] % 3 for x in w.elements) == [0, 1, 2] and w.deviations == [0, 0, 0]


def test_disjoint_translates_examples():
    Z = free_abelian(1)
    two = Z.subgroup([Zel(Z, 2)])
    ev, od = from_coset(Z.coset(two, Zel(Z, 0))), from_coset(Z.coset(two, Zel(Z, 1)))
    atoms = [(ev, Fraction(1, 2)), (od, Fraction(1, 2))]
    w = disjoint_translates_witness(Z, atoms, 4, [Zel(Z, 1)])
    vals = sorted(x.coords[0][0] for x in w.elements)
    assert vals == [-5, -2, 0, 3]
    assert all(abs(a - b) != 1 for a in vals for b in vals)
    assert disjoint_translates_witness(Z, atoms, 4, []).elements == approximate_mean(Z, atoms, 4).elements
    Z2 = free_abelian(2)
    w = disjoint_translates_witness(Z2, [(CosetRingElement.whole(Z2), 1)], 3, [Z2.element(((1, 0), 0))])
    pts = [x.coords[0] for x in w.elements]
    assert len(pts) == 3
    assert not any((a[0] + 1, a[1]) in pts for a in pts)


def test_folner_examples():
    Z = free_abelian(1)
    S = folner_set(Z, [Zel(Z, 1)], Fraction(1, 2))
    assert sorted(x.coords[0][0] for x in S) == [0, 1, 2, 3, 4]
    assert oracle_ratio(Z, S, Zel(Z, 1)) == Fraction(2, 5)
    S3 = symmetric(3)
    assert len(folner_set(S3, S3.generators(), Fraction(1, 100))) == 6
    Z2 = free_abelian(2)
    K = [Z2.element(((1, 0), 0)), Z2.element(((0, 1), 0))]
    S = folner_set(Z2, K, Fraction(1, 4))
    assert len(S) == 81 and all(oracle_ratio(Z2, S, g) == Fraction(2, 9) for g in K)


def test_folner_amplify_examples():
    Z = free_abelian(1)
    two = Z.subgroup([Zel(Z, 2)])
    ev, od = from_coset(Z.coset(two, Zel(Z, 0))), from_coset(Z.coset(two, Zel(Z, 1)))
    w = folner_amplify(Z, [(ev, Fraction(1, 2)), (od, Fraction(1, 2))], [Zel(Z, 1)], Fraction(1, 2))
    assert len(w) == w.core_size * w.folner_size
    assert w.folner[repr(Zel(Z, 1))] < Fraction(1, 2) and all(d < Fraction(1, 2) for d in w.deviations)
    w0 = folner_amplify(Z, [(ev, Fraction(1, 2)), (od, Fraction(1, 2))], [], Fraction(1, 2))
    assert w0.folner_size == 1
    D4 = dihedral(4)
    w = folner_amplify(D4, [(CosetRingElement.whole(D4), 1)], D4.generators(), Fraction(1, 3))
    assert len(w) == 8 and all(r == 0 for r in w.folner.values()) and w.deviations == [0]


def test_partition_errors():
    Z = free_abelian(1)
    two = Z.subgroup([Zel(Z, 2)])
    ev = from_coset(Z.coset(two, Zel(Z, 0)))
    with pytest.raises(NotAPartition):
        approximate_mean(Z, [(ev, Fraction(1, 2)), (ev, Fraction(1, 2))], 4)
    with pytest.raises(NotAPartition):
        approximate_mean(Z, [(ev, Fraction(1, 2))], 4)
    point = from_coset(Z.coset(Z.trivial(), Zel(Z, 0)))
    with pytest.raises(AtomTooSmall):
        approximate_mean(Z, [(point, Fraction(1, 2)), (point.complement(), Fraction(1, 2))], 4)
    S3 = symmetric(3)
    elems = S3.enumerate_elements(0)
    with pytest.raises(AtomTooSmall):
        approximate_mean(S3, [(elems[:1], Fraction(1, 2)), (elems[1:], Fraction(1, 2))], 6)
    with pytest.raises(NotAPartition):
        approximate_mean(S3, [(elems[:2], Fraction(1, 2)), (elems[1:], Fraction(1, 2))], 2)


# ---- randomized suites ---------------------------------------------------------------------

CORPUS = [free_abelian(1), free_abelian(2), infinite_dihedral(), z2_rot4(), mod2_symplectic(),
          integral_heisenberg(), dihedral(5), symmetric(4)]


def random_subgroup(G, rng, finite_index=None):
    ball = G.enumerate_elements(2)
    for _ in range(100):
        H = G.subgroup([rng.choice(ball) for _ in range(rng.randint(1, 3))])
        fi = H.index().is_finite
        if finite_index is None or fi == finite_index:
            if not fi or int(H.index()) <= 16:
                return H
    return G.whole()


def random_partition(G, rng):
    """Cosets of one finite-index subgroup, optionally with a line split off."""
    H = random_subgroup(G, rng, True)
    atoms = [from_coset(c) for c in (G.coset(H, t) for t in G.transversal(H))]
    if not G.is_finite and rng.random() < 0.5:
        K = random_subgroup(G, rng, False)
        if not K.index().is_finite:
            piece = atoms[0] & from_coset(G.coset(K, G.identity()))
            atoms = [piece, atoms[0] ^ piece] + atoms[1:]
    weights = [rng.randint(0, 4) for _ in atoms]
    if not any(weights):
        weights[0] = 1
    total = sum(weights)
    targets = [Fraction(w, total) for w in weights]
    if not G.is_finite:
        return list(zip(atoms, targets))
    return list(zip(atoms, targets))


@pytest.mark.parametrize("G", CORPUS, ids=lambda G: G.name)
def test_build_witness_random(G):
    rng = random.Random(23)
    for _ in range(12):
        cons = []
        for _ in range(rng.randint(1, 3)):
            H = random_subgroup(G, rng)
            cons.append((H, Fraction(1, rng.randint(2, 6))))
        w = build_witness(G, cons)
        F = list(w.elements)
        assert len(set(F)) == len(F)
        for (H, eps), dev in zip(cons, w.deviations):
            assert oracle_deviation(G, F, H) == dev
            if H.index().is_finite:
                assert dev == 0
            else:
                assert dev < eps
        assert recompute_certificate(w, constraints=cons).deviations == w.deviations
        assert build_witness(G, cons).elements == w.elements


@pytest.mark.parametrize("G", CORPUS, ids=lambda G: G.name)
def test_mean_and_disjoint_random(G):
    rng = random.Random(29)
    for _ in range(12):
        atoms = random_partition(G, rng)
        if G.is_finite and any(t > 0 and len([g for g in G.enumerate_elements(0) if A.contains(g)]) < 12 * t for A, t in atoms):
            continue
        N = rng.randint(1, 12)
        ball = [g for g in G.enumerate_elements(1) if g != G.identity()]
        S = rng.sample(ball, 2) if not G.is_finite else []
        try:
            w = disjoint_translates_witness(G, atoms, N, S)
        except AtomTooSmall:
            # only legitimate when some atom is a finite set asked for too many points
            assert any(not A.reps and all(G._sub_order(k) is not None for k, _ in A.inf) and t > 0
                       for A, t in atoms)
            continue
        F = list(w.elements)
        assert len(F) == N == len(set(F))
        for (A, t), dev in zip(atoms, w.deviations):
            hits = sum(A.contains(x) for x in F)
            assert abs(Fraction(hits, N) - t) == dev <= Fraction(1, N)
        for s in S:
            assert not ({(s * x).coords for x in F} & {x.coords for x in F})
            assert oracle_ratio(G, F, s) == 2


@pytest.mark.parametrize("G", CORPUS, ids=lambda G: G.name)
def test_folner_amplify_random(G):
    rng = random.Random(31)
    for _ in range(4):
        H = random_subgroup(G, rng, True)
        atoms = [(from_coset(c), c.subgroup.index().reciprocal()) for c in (G.coset(H, t) for t in G.transversal(H))]
        K = rng.sample(G.enumerate_elements(1), 2)
        # the Heisenberg box grows like L^4, so keep its tolerance coarse
        eps = Fraction(1, 2) if G.name == "Heis_Z" else Fraction(1, rng.randint(2, 3))
        w = folner_amplify(G, atoms, K, eps)
        F = list(w.elements)
        assert len(set(F)) == len(F)
        if not G.is_finite:
            assert len(F) == w.core_size * w.folner_size
        for g in K:
            assert oracle_ratio(G, F, g) < eps
        for (A, t) in atoms:
            assert abs(Fraction(sum(A.contains(x) for x in F), len(F)) - t) < eps
