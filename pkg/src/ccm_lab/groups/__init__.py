"""Group kernel: three concrete group classes with exact subgroup arithmetic."""

from __future__ import annotations

from .base import INFINITE, Coset, Element, ExtendedIndex, GroupHandle, Subgroup
from .central_pairing import CentralPairing
from .finite import FiniteCayley
from .library import (
    BUILDERS,
    abelian,
    alternating,
    build_group,
    congruence_subgroup,
    cyclic,
    dicyclic,
    dihedral,
    direct_product,
    finite_library,
    free_abelian,
    gl2,
    heisenberg_f2,
    heisenberg_mod,
    infinite_dihedral,
    integral_heisenberg,
    mod2_symplectic,
    quaternion,
    quotient,
    sl2,
    symmetric,
    to_cayley,
    z2_rot4,
)
from .virtually_abelian import VirtuallyAbelian


def multiply(g: Element, h: Element) -> Element:
    return g.group.multiply(g, h)


def invert(g: Element) -> Element:
    return g.group.invert(g)


def identity(G: GroupHandle) -> Element:
    return G.identity()


def commutator(g: Element, h: Element) -> Element:
    return g.group.commutator(g, h)


def subgroup_from_generators(G: GroupHandle, gens) -> Subgroup:
    return G.subgroup(gens)


def index(G: GroupHandle, H: Subgroup) -> ExtendedIndex:
    G._own(H)
    return H.index()


def centralizer(G: GroupHandle, g: Element) -> Subgroup:
    return G.centralizer(g)


def intersect(H: Subgroup, K: Subgroup) -> Subgroup:
    return H.group.intersect(H, K)


def conjugate(H: Subgroup, g: Element) -> Subgroup:
    return H.group.conjugate(H, g)


def normal_core(H: Subgroup) -> Subgroup:
    return H.group.normal_core(H)


def center(G: GroupHandle) -> Subgroup:
    return G.center()


def derived_subgroup(G: GroupHandle) -> Subgroup:
    return G.derived_subgroup()


def centralizer_of_subgroup(G: GroupHandle, K: Subgroup) -> Subgroup:
    return G.centralizer_of_subgroup(K)


def enumerate_elements(G: GroupHandle, bound: int) -> list[Element]:
    return G.enumerate_elements(bound)


def coset_of(H: Subgroup, g: Element) -> Coset:
    return H.group.coset(H, g)


__all__ = [name for name in dir() if not name.startswith("_")]
