"""Matrices over an arbitrary exact ring context.

A ring context is any object with ``zero() / one() / add(a, b) / neg(a) /
mul(a, b) / is_zero(a)`` producing and consuming opaque element values.
Matrices are dense lists of lists; sizes here are tiny (module ranks), the
entries carry all the weight.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, List, Sequence


class FractionRing:
    def zero(self):
        return Fraction(0)

    def one(self):
        return Fraction(1)

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def is_zero(self, a) -> bool:
        return not a


def mat_zero(ring, nrows: int, ncols: int) -> list:
    return [[ring.zero() for _ in range(ncols)] for _ in range(nrows)]


def mat_identity(ring, n: int) -> list:
    out = mat_zero(ring, n, n)
    for i in range(n):
        out[i][i] = ring.one()
    return out


def mat_add(ring, A: list, B: list) -> list:
    return [[ring.add(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_neg(ring, A: list) -> list:
    return [[ring.neg(a) for a in row] for row in A]


def mat_sub(ring, A: list, B: list) -> list:
    return mat_add(ring, A, mat_neg(ring, B))


def mat_mul(ring, A: list, B: list) -> list:
    n, k = len(A), len(B)
    m = len(B[0]) if B else 0
    out = mat_zero(ring, n, m)
    for i in range(n):
        for j in range(m):
            acc = ring.zero()
            for t in range(k):
                acc = ring.add(acc, ring.mul(A[i][t], B[t][j]))
            out[i][j] = acc
    return out

def mat_map(fn: Callable, A: list) -> list:
    return [[fn(a) for a in row] for row in A]


def mat_is_zero(ring, A: list) -> bool:
    return all(ring.is_zero(a) for row in A for a in row)


def mat_eq(ring, A: list, B: list) -> bool:
    return mat_is_zero(ring, mat_sub(ring, A, B))


def mat_trace(ring, A: list):
    acc = ring.zero()
    for i in range(len(A)):
        acc = ring.add(acc, A[i][i])
    return acc


def mat_inv_unipotent(ring, A: list, nil_bound: int) -> list:
    """Inverse of 1 + N with N nilpotent: geometric series, exact."""
    n = len(A)
    N = mat_sub(ring, A, mat_identity(ring, n))
    inv = mat_identity(ring, n)
    term = mat_identity(ring, n)
    for _ in range(nil_bound):
        term = mat_neg(ring, mat_mul(ring, N, term))
        if mat_is_zero(ring, term):
            break
        inv = mat_add(ring, inv, term)
    return inv
