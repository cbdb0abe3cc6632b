"""Exact integer lattice arithmetic on row-style Hermite normal forms.

Lattices are given by lists of integer row vectors and are always treated as
the integer row span of those vectors.  The canonical form is the row HNF:
rows in echelon order, positive pivots, and every entry above a pivot reduced
into ``[0, pivot)``.  Zero rows are dropped, so the HNF of the zero lattice is
the empty tuple.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

Vector = tuple[int, ...]
Basis = tuple[Vector, ...]


def _rows(rows: Iterable[Sequence[int]]) -> list[list[int]]:
    return [list(r) for r in rows]


def hnf_with_transform(
    rows: Iterable[Sequence[int]], ncols: int
) -> tuple[list[list[int]], list[list[int]], int]:
    """Return ``(A, U, rank)`` with ``U @ M == A`` and ``U`` unimodular.

    The first ``rank`` rows of ``A`` are the HNF of the row span of ``M``; the
    remaining rows are zero, and the matching rows of ``U`` are a basis of the
    left kernel of ``M``.
    """
    A = _rows(rows)
    m = len(A)
    for r in A:
        if len(r) != ncols:
            raise ValueError(f"row length {len(r)} != {ncols}")
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    pr = 0
    for col in range(ncols):
        if pr >= m:
            break
        while True:
            nz = [i for i in range(pr, m) if A[i][col] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(A[i][col]))
            if piv != pr:
                A[pr], A[piv] = A[piv], A[pr]
                U[pr], U[piv] = U[piv], U[pr]
            p = A[pr][col]
            done = True
            for i in range(pr + 1, m):
                a = A[i][col]
                if a:
                    q = a // p
                    Ai, Ap = A[i], A[pr]
                    for j in range(col, ncols):
                        Ai[j] -= q * Ap[j]
                    Ui, Up = U[i], U[pr]
                    for j in range(m):
                        Ui[j] -= q * Up[j]
                    if Ai[col]:
                        done = False
            if done:
                break
        if pr < m and A[pr][col] != 0:
            if A[pr][col] < 0:
                A[pr] = [-x for x in A[pr]]
                U[pr] = [-x for x in U[pr]]
            p = A[pr][col]
            for i in range(pr):
                q = A[i][col] // p
                if q:
                    Ai, Ap = A[i], A[pr]
                    for j in range(col, ncols):
                        Ai[j] -= q * Ap[j]
                    Ui, Up = U[i], U[pr]
                    for j in range(m):
                        Ui[j] -= q * Up[j]
            pr += 1
    return A, U, pr


def hnf(rows: Iterable[Sequence[int]], ncols: int) -> Basis:
    A, _, rank = hnf_with_transform(rows, ncols)
    return tuple(tuple(r) for r in A[:rank])


def pivots(basis: Basis) -> list[int]:
    out = []
    for row in basis:
        for j, x in enumerate(row):
            if x:
                out.append(j)
                break
    return out


def reduce(v: Sequence[int], basis: Basis) -> Vector:
    """Canonical representative of ``v`` modulo the lattice with HNF ``basis``."""
    w = list(v)
    for row in basis:
        for j, x in enumerate(row):
            if x:
                q = w[j] // x
                if q:
                    for k in range(j, len(w)):
                        w[k] -= q * row[k]
                break
    return tuple(w)


def decompose(v: Sequence[int], basis: Basis) -> Optional[list[int]]:
    """Coefficients ``c`` with ``c @ basis == v``, or None if ``v`` is outside."""
    w = list(v)
    coeffs = []
    for row in basis:
        for j, x in enumerate(row):
            if x:
                if w[j] % x:
                    return None
                q = w[j] // x
                coeffs.append(q)
                if q:
                    for k in range(j, len(w)):
                        w[k] -= q * row[k]
                break
    if any(w):
        return None
    return coeffs


def contains(basis: Basis, v: Sequence[int]) -> bool:
    return not any(reduce(v, basis))


def left_kernel(rows: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Basis of ``{x : x @ M == 0}`` for the matrix with the given rows."""
    if not rows:
        return []
    _, U, rank = hnf_with_transform(rows, ncols)
    return [list(u) for u in U[rank:]]


def solve(rows: Sequence[Sequence[int]], ncols: int, target: Sequence[int]) -> Optional[list[int]]:
    """One integer solution ``x`` of ``x @ M == target``, or None."""
    m = len(rows)
    if m == 0:
        return [] if not any(target) else None
    A, U, rank = hnf_with_transform(rows, ncols)
    basis = tuple(tuple(r) for r in A[:rank])
    c = decompose(target, basis)
    if c is None:
        return None
    x = [0] * m
    for ci, u in zip(c, U[:rank]):
        if ci:
            for j in range(m):
                x[j] += ci * u[j]
    return x


def vec_mat(x: Sequence[int], rows: Sequence[Sequence[int]], ncols: int) -> Vector:
    out = [0] * ncols
    for xi, r in zip(x, rows):
        if xi:
            for j in range(ncols):
                out[j] += xi * r[j]
    return tuple(out)


def mat_vec(M: Sequence[Sequence[int]], v: Sequence[int]) -> Vector:
    return tuple(sum(a * b for a, b in zip(row, v)) for row in M)


def add(u: Sequence[int], v: Sequence[int]) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Sequence[int], v: Sequence[int]) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def scale(k: int, v: Sequence[int]) -> Vector:
    return tuple(k * a for a in v)


def join(b1: Basis, b2: Basis, ncols: int) -> Basis:
    return hnf(list(b1) + list(b2), ncols)


def intersect(b1: Basis, b2: Basis, ncols: int) -> Basis:
    if not b1 or not b2:
        return ()
    ker = left_kernel(list(b1) + list(b2), ncols)
    k = len(b1)
    return hnf([vec_mat(x[:k], b1, ncols) for x in ker], ncols)


def index(basis: Basis, ncols: int) -> Optional[int]:
    """``[Z^n : L]`` or None when the lattice is not of full rank."""
    if len(basis) < ncols:
        return None
    d = 1
    for i, row in enumerate(basis):
        d *= row[i]
    return d


def transform_basis(M: Sequence[Sequence[int]], basis: Basis, ncols: int) -> Basis:
    """HNF of the image lattice ``{M v : v in L}`` (``M`` acting on columns)."""
    return hnf([mat_vec(M, row) for row in basis], ncols)


def det(M: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free elimination (Bareiss)."""
    n = len(M)
    if n == 0:
        return 1
    A = [list(r) for r in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k]:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def mat_mul(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]]) -> tuple[Vector, ...]:
    cols = list(zip(*B)) if B else []
    return tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in cols) for row in A)


def identity_matrix(n: int) -> tuple[Vector, ...]:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
