import itertools
import random
from fractions import Fraction

import pytest

from ccm_lab.coset_ring import CosetRingElement
from ccm_lab.dc import (
    NotFAF,
    NotFound,
    QuotientChain,
    centralizer_index_sum,
    centralizer_strata,
    commuting_set,
    commuting_transversal,
    dc_finite,
    dc_rf_chain,
    dc_strata,
    faf_witness,
    gallagher_check,
    product_mean_finite,
    small_commuting_sum,
    square,
    subgroup_cayley,
    xn_check,
)
from ccm_lab.errors import HypothesisFails, NotNormal, UnsupportedForClass
from ccm_lab.groups import (
    abelian,
    alternating,
    congruence_subgroup,
    cyclic,
    dihedral,
    finite_library,
    free_abelian,
    heisenberg_f2,
    heisenberg_mod,
    infinite_dihedral,
    integral_heisenberg,
    mod2_symplectic,
    quaternion,
    quotient,
    symmetric,
    to_cayley,
    z2_rot4,
)

LIBRARY = finite_library(48)
INFINITE = [free_abelian(1), free_abelian(2), infinite_dihedral(), z2_rot4(), mod2_symplectic(),
            integral_heisenberg()]


def brute_dc(G):
    """Commuting pairs counted from the multiplication table directly."""
    n = G.order
    T = G.table
    return Fraction(sum(1 for a in range(n) for b in range(n) if T[a][b] == T[b][a]), n * n)


def brute_index(G, g):
    """[G : C(g)] by counting the elements commuting with g, on a finite group."""
    x = G._raw(g)
    T = G.table
    return G.order // sum(1 for y in range(G.order) if T[x][y] == T[y][x])


# ---- finite examples ---------------------------------------------------------------

def test_dc_finite_examples():
    assert dc_finite(cyclic(6)) == 1
    assert dc_finite(symmetric(3)) == Fraction(1, 2)
    assert dc_finite(dihedral(4)) == Fraction(5, 8) == dc_finite(quaternion())
    assert dc_finite(symmetric(4)) == Fraction(5, 24)


def test_product_mean_examples():
    S3 = symmetric(3)
    elems = S3.enumerate_elements(0)
    assert product_mean_finite(S3, [(g, h) for g in elems for h in elems]) == 1
    assert product_mean_finite(S3, commuting_set(S3)) == Fraction(1, 2)
    assert product_mean_finite(S3, lambda g, h: g * h == h * g) == dc_finite(S3)
    # a coset of the diagonal in S3 x S3
    t = S3.by_label("(12)")
    diag = [(g, t * g) for g in elems]
    assert product_mean_finite(S3, diag) == Fraction(1, 6)


@pytest.mark.parametrize("G", LIBRARY, ids=lambda G: G.name)
def test_library_dc_oracles(G):
    d = dc_finite(G)
    assert d == brute_dc(G) == dc_strata(G)
    abelian_ = all(G.table[a][b] == G.table[b][a] for a in range(G.order) for b in range(G.order))
    assert (d == 1) == abelian_
    if not abelian_:
        assert d <= Fraction(5, 8)
    T = centralizer_strata(G)
    assert sum(T.measures.values()) == 1
    for g in G.enumerate_elements(0):
        assert T.index_of(g) == brute_index(G, g)


def test_product_mean_on_cosets_of_square():
    """Cosets of subgroups of G^2 get measure 1/index."""
    H = symmetric(3)
    H2 = square(H)
    rng = random.Random(5)
    subs = H2.all_subgroups()
    for _ in range(25):
        key = rng.choice(subs)
        g = rng.randrange(H2.order)
        pairs = [divmod(H2.table[g][k], H.order) for k in key]
        S = [(H.element(a), H.element(b)) for a, b in pairs]
        assert product_mean_finite(H, S) == Fraction(len(key), H2.order)


# ---- strata on infinite groups ------------------------------------------------------

def test_strata_examples():
    T = centralizer_strata(free_abelian(2))
    assert [m for m, _ in T.strata] == [1] and T.measures[1] == 1
    D = infinite_dihedral()
    T = centralizer_strata(D)
    assert T.measures == {1: 0, 2: Fraction(1, 2), "inf": Fraction(1, 2)}
    assert T.stratum(1).contains(D.identity())
    for g in D.enumerate_elements(6):
        v, q = g.coords
        expect = 1 if g == D.identity() else (2 if q == 0 else None)
        assert T.index_of(g) == expect
    S = mod2_symplectic()
    T = centralizer_strata(S)
    assert T.measures == {1: Fraction(1, 4), 2: Fraction(3, 4), "inf": 0}
    for g in S.enumerate_elements(3):
        _, a = g.coords
        assert T.index_of(g) == (1 if a[0] % 2 == 0 and a[1] % 2 == 0 else 2)


def test_dc_strata_anchors():
    assert dc_strata(infinite_dihedral()) == Fraction(1, 4)
    assert dc_strata(mod2_symplectic()) == Fraction(5, 8)
    assert dc_strata(integral_heisenberg()) == 0
    assert dc_strata(z2_rot4()) == Fraction(1, 16)
    assert dc_strata(free_abelian(3)) == 1


def quotient_indexer(G, m):
    """g -> [Q : C_Q(gN)] for Q = G/N_m; a lower bound for the index of C_G(g)."""
    N = congruence_subgroup(G, m)
    Q = quotient(G, N)
    pos = {label: i for i, label in enumerate(Q.labels)}
    return lambda g: brute_index(Q, Q.element(pos[G.format(G._coset_rep(N.key, g.coords))]))


@pytest.mark.parametrize("G", INFINITE, ids=lambda G: G.name)
def test_strata_against_centralizer_solver(G):
    """Each element's stratum agrees with the index of its computed centralizer."""
    T = centralizer_strata(G)
    T.verify(G.enumerate_elements(2))
    for g in G.enumerate_elements(3):
        idx = G.centralizer(g).index()
        m = T.index_of(g)
        assert m == (int(idx) if idx.is_finite else None)


@pytest.mark.parametrize("G,moduli", [(infinite_dihedral(), (5, 15)), (z2_rot4(), (3, 7)),
                                      (mod2_symplectic(), (4, 8))], ids=["Dinf", "Z2xC4", "Symp2"])
def test_strata_against_finite_quotients(G, moduli):
    """Centralizer indices in deep quotients settle at the stratum index or keep growing."""
    T = centralizer_strata(G)
    idx = [quotient_indexer(G, m) for m in moduli]
    for g in G.enumerate_elements(2):
        m = T.index_of(g)
        qs = [f(g) for f in idx]
        if m is None:
            assert qs[1] > qs[0]
        else:
            assert qs == [m, m]


@pytest.mark.parametrize("G", INFINITE, ids=lambda G: G.name)
def test_strata_conjugation_invariant(G):
    T = centralizer_strata(G)
    rng = random.Random(3)
    ball = G.enumerate_elements(3)
    for _ in range(100):
        g, x = rng.choice(ball), rng.choice(ball)
        y = G.multiply(G.multiply(G.invert(g), x), g)
        for _, U in T.strata:
            assert U.contains(x) == U.contains(y)


@pytest.mark.parametrize("G", INFINITE, ids=lambda G: G.name)
def test_quotients_dominate_strata(G):
    base = dc_strata(G)
    for m in (2, 3, 4):
        N = congruence_subgroup(G, m)
        assert dc_finite(quotient(G, N)) >= base


def test_heisenberg_pairing_groups_match_brute_force():
    for G in (heisenberg_f2(1), heisenberg_f2(2), heisenberg_mod(3)):
        assert dc_strata(G) == dc_finite(to_cayley(G))


# ---- chains -----------------------------------------------------------------------------

def test_dc_rf_chain_examples():
    D = infinite_dihedral()
    r = dc_rf_chain(D, [congruence_subgroup(D, k) for k in (3, 5, 7)])
    assert r.orders == [6, 10, 14]
    assert r.values == [Fraction(1, 2), Fraction(2, 5), Fraction(5, 14)]
    assert r.nested == [False, False] and r.dominates
    for k, v in zip((3, 5, 7), r.values):
        assert Fraction(1, 4) <= v <= Fraction(1, 4) + Fraction(1, k)
    r = dc_rf_chain(D, [congruence_subgroup(D, k) for k in (2, 4, 8, 16)])
    assert all(r.nested) and r.monotone
    Z2 = free_abelian(2)
    assert dc_rf_chain(Z2, [congruence_subgroup(Z2, k) for k in (2, 6)]).values == [1, 1]
    H = integral_heisenberg()
    r = dc_rf_chain(H, [congruence_subgroup(H, p) for p in (2, 3, 5)])
    assert r.orders == [8, 27, 125]
    assert r.values == [Fraction(p * p + p - 1, p ** 3) for p in (2, 3, 5)]


def test_chain_errors():
    D = infinite_dihedral()
    refl = D.subgroup([D.element(((0,), 1))])
    with pytest.raises(UnsupportedForClass):
        QuotientChain(D, [refl])
    half = D.subgroup([D.element(((2,), 0)), D.element(((0,), 1))])
    QuotientChain(D, [half])
    S3 = symmetric(3)
    t = S3.subgroup([S3.by_label("(12)")])
    with pytest.raises(NotNormal):
        gallagher_check(S3, t)


# ---- Gallagher and X_n -------------------------------------------------------------

def test_gallagher_examples():
    D4 = dihedral(4)
    r = gallagher_check(D4, D4.center())
    assert (r.lhs, r.rhs, r.holds) == (Fraction(5, 8), 1, True)
    S3 = symmetric(3)
    A3 = S3.subgroup([S3.by_label("(123)")])
    assert gallagher_check(S3, A3) == gallagher_check(S3, A3)
    assert gallagher_check(S3, A3).rhs == 1
    S4 = symmetric(4)
    V4 = S4.subgroup([S4.by_label("(12)(34)"), S4.by_label("(13)(24)")])
    r = gallagher_check(S4, V4)
    assert r.lhs == Fraction(5, 24) and r.rhs == Fraction(1, 2) and r.holds


@pytest.mark.parametrize("G", [G for G in LIBRARY if G.order <= 24], ids=lambda G: G.name)
def test_gallagher_all_normal_subgroups(G):
    for key in G.normal_subgroups():
        N = G._wrap(key)
        r = gallagher_check(G, N)
        assert r.holds
        assert subgroup_cayley(G, N).order == len(key)


def test_xn_examples():
    r = xn_check(symmetric(3), 2)
    assert r.xn_measure == Fraction(1, 2) and r.bound_holds
    r = xn_check(dihedral(4), 1)
    assert r.xn_measure == Fraction(1, 4) and r.bound_holds
    assert all(xn_check(abelian([2, 4]), n).xn_measure == 1 for n in (1, 5))


@pytest.mark.parametrize("G", LIBRARY, ids=lambda G: G.name)
def test_xn_bound_all_n(G):
    for n in range(1, G.order + 1):
        assert xn_check(G, n).bound_holds


# ---- FAF -------------------------------------------------------------------------------

def test_faf_examples():
    S = mod2_symplectic()
    w = faf_witness(S)
    assert w.is_faf and w.n0.order == 2 and w.h0 == S.whole()
    Z = z2_rot4()
    w = faf_witness(Z)
    assert w.is_faf and w.n0 == Z.trivial() and w.h0.index() == 4
    r = faf_witness(integral_heisenberg())
    assert isinstance(r, NotFAF) and not r.is_faf and "derived" in r.reason
    assert all(faf_witness(G).is_faf for G in LIBRARY[:10])


def test_faf_dichotomy_matches_dc():
    for G in INFINITE + [heisenberg_f2(2), symmetric(4)]:
        assert faf_witness(G).is_faf == (dc_strata(G) > 0)


# ---- small sums and transversals ----------------------------------------------------------

def test_small_commuting_sum():
    H = integral_heisenberg()
    r = small_commuting_sum(H, 3, Fraction(1, 100))
    assert len(r.elements) == 3 and r.total == 0
    Z = H.center()
    for a, b in itertools.combinations(r.elements, 2):
        assert H.multiply(H.invert(a), b) not in Z
    assert centralizer_index_sum(H, r.elements) == 0
    assert small_commuting_sum(H, 1, Fraction(1, 2)).total == 0
    with pytest.raises(HypothesisFails):
        small_commuting_sum(mod2_symplectic(), 3, Fraction(1, 2))
    with pytest.raises(HypothesisFails):
        small_commuting_sum(symmetric(3), 2, Fraction(1, 2))
    r = small_commuting_sum(H, 6, Fraction(1, 100))
    assert r.total == 0 and len(set(r.elements)) == 6


def test_commuting_transversal_abelian():
    H = abelian([2, 2])
    H2 = square(H)
    for key in H2.all_subgroups()[:10]:
        K = H2._wrap(key)
        for g in H2.enumerate_elements(0)[:5]:
            c = commuting_transversal(H, K, g)
            assert c.coords == H2._coset_rep(key, g.coords)


def test_commuting_transversal_heisenberg():
    H = to_cayley(heisenberg_f2(2))
    H2 = square(H)
    L = H.subgroup([g for g in H.enumerate_elements(0) if H.labels[g.coords].split("|")[1].startswith("0")])
    assert L.index() == 2
    # L x L inside H x H, pairs (a, b) stored at a·|H| + b
    K = H2.subgroup([H2.element(a * H.order) for a in L.key] + [H2.element(b) for b in L.key])
    assert K.order == len(L.key) ** 2
    for t in H2.transversal(K):
        c = commuting_transversal(H, K, t)
        assert c is not NotFound
        a, b = divmod(c.coords, H.order)
        assert H.table[a][b] == H.table[b][a] and c in H2.coset(K, t)


def test_commuting_transversal_not_found():
    H = to_cayley(heisenberg_f2(1))
    H2 = square(H)
    Z = H.center()
    K = H2.subgroup([H2.element(z * H.order + w) for z in Z.key for w in Z.key])
    gens = [x for x in range(H.order) if H.table[x][1] != H.table[1][x]]
    g = H2.element(1 * H.order + gens[0])
    assert commuting_transversal(H, K, g) is NotFound
    assert not NotFound and repr(NotFound) == "NotFound"
