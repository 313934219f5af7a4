"""Exact arithmetic in F_p and dense linear algebra over it.

Matrices are plain ``numpy`` int64 arrays holding residues in ``[0, p)``.
The modulus is passed alongside, never stored per element.  With
``p <= 13`` (the supported range is any odd prime, but desk-scale work
stays small) every intermediate product fits comfortably in int64.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np


class Inconsistent(ValueError):
    """Raised by :func:`solve` when the right-hand side is not in the image."""


class BadPrime(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def check_prime(p: int) -> int:
    """Validate an odd prime characteristic and return it as an int."""
    p = int(p)
    if not is_prime(p) or p == 2:
        raise BadPrime(f"characteristic must be an odd prime, got {p}")
    return p


@lru_cache(maxsize=None)
def inverse_table(p: int) -> np.ndarray:
    inv = np.zeros(p, dtype=np.int64)
    for a in range(1, p):
        inv[a] = pow(a, -1, p)
    return inv


def inv(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError("0 has no inverse mod p")
    return pow(a, -1, p)


def as_matrix(M, p: int) -> np.ndarray:
    A = np.array(M, dtype=np.int64)
    if A.ndim == 1:
        A = A.reshape(1, -1) if A.size else A.reshape(0, 0)
    return A % p


def rref(M, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over F_p.

    Pivots are taken column by column, left to right, using the topmost
    nonzero entry at or below the current row.  The output is a pure
    function of the input entries.
    """
    A = as_matrix(M, p).copy()
    rows, cols = A.shape
    invs = inverse_table(p)
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
        A[r] = (A[r] * invs[A[r, c]]) % p
        col = A[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            A[hit] = (A[hit] - np.outer(col[hit], A[r])) % p
        pivots.append(c)
        r += 1
    return A, pivots


def rank(M, p: int) -> int:
    A = as_matrix(M, p)
    if A.size == 0:
        return 0
    return len(rref(A, p)[1])


def nullspace(M, p: int) -> list[np.ndarray]:
    """Basis of the right kernel ``{v : M v = 0}``, one vector per free column.

    Each basis vector has a 1 in its free column and zeros in the other
    free columns, so the list is already in echelon form.
    """
    A = as_matrix(M, p)
    cols = A.shape[1]
    if A.shape[0] == 0:
        return [np.eye(cols, dtype=np.int64)[j] for j in range(cols)]
    R, pivots = rref(A, p)
    pivot_set = set(pivots)
    basis = []
    for j in range(cols):
        if j in pivot_set:
            continue
        v = np.zeros(cols, dtype=np.int64)
        v[j] = 1
        for row, pc in enumerate(pivots):
            v[pc] = (-R[row, j]) % p
        basis.append(v)
    return basis


def solve(M, b, p: int) -> tuple[np.ndarray, list[np.ndarray]]:
    """Solve ``M x = b`` over F_p.

    Returns a particular solution (free variables set to zero) and a
    basis of ``ker M``.  Raises :class:`Inconsistent` when ``b`` is not in
    the column space.
    """
    A = as_matrix(M, p)
    rhs = np.array(b, dtype=np.int64).reshape(-1) % p
    rows, cols = A.shape
    if rows != rhs.size:
        raise ValueError(f"shape mismatch: {A.shape} vs rhs of length {rhs.size}")
    aug = np.concatenate([A, rhs.reshape(-1, 1)], axis=1)
    R, pivots = rref(aug, p)
    if pivots and pivots[-1] == cols:
        raise Inconsistent("right-hand side is not in the image")
    x = np.zeros(cols, dtype=np.int64)
    for row, pc in enumerate(pivots):
        x[pc] = R[row, cols]
    return x, nullspace(A, p)


def in_span(vectors, v, p: int) -> bool:
    """Whether ``v`` lies in the span of the given vectors."""
    v = np.asarray(v, dtype=np.int64) % p
    if not np.any(v):
        return True
    if len(vectors) == 0:
        return False
    B = np.array(vectors, dtype=np.int64) % p
    return rank(B, p) == rank(np.vstack([B, v]), p)


def independent_rows(vectors, p: int) -> list[int]:
    """Indices of a greedy (first-come) maximal independent subset."""
    B = np.array(vectors, dtype=np.int64) % p
    if B.size == 0:
        return []
    # pivots of the transposed matrix pick the earliest independent columns
    return rref(B.T, p)[1]


def matmul(A, B, p: int) -> np.ndarray:
    return (np.asarray(A, dtype=np.int64) @ np.asarray(B, dtype=np.int64)) % p


def mat_inverse(M, p: int) -> np.ndarray:
    A = as_matrix(M, p)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    R, pivots = rref(np.concatenate([A, np.eye(n, dtype=np.int64)], axis=1), p)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular mod p")
    return R[:, n:]
