"""Hecke index sets T(L), the matrices A(L, m, k) and orbit permutations.

Everything here is exact integer arithmetic: A(L, m, k) is handled through
its numerator [[m, k], [0, L/m]], the factor L^{-1/2} being common to all.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass

from .errors import InvalidIndex
from .sl2 import GroupElement, IntMatrix, int_det, int_mul


@dataclass(frozen=True, order=True)
class HeckeIndex:
    m: int
    k: int


def divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def index_set(L: int) -> list[HeckeIndex]:
    """T(L) = {(m, k): m | L, 0 <= k < L/m}, lexicographic."""
    if L < 1:
        raise ValueError("L must be positive")
    return [HeckeIndex(m, k) for m in divisors(L) for k in range(L // m)]


def check_index(L: int, idx: HeckeIndex) -> None:
    if idx.m < 1 or L % idx.m or not 0 <= idx.k < L // idx.m:
        raise InvalidIndex(f"{idx} not in T({L})")


def hecke_numerator(L: int, m: int, k: int) -> IntMatrix:
    return (m, k, 0, L // m)


def hecke_matrix(L: int, m: int, k: int) -> GroupElement:
    """A(L, m, k) = L^{-1/2} [[m, k], [0, L/m]]."""
    check_index(L, HeckeIndex(m, k))
    s = 1.0 / math.sqrt(L)
    return GroupElement(m * s, k * s, 0.0, (L // m) * s)


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        qt = a // b
        a, b = b, a - qt * b
        x0, x1 = x1, x0 - qt * x1
        y0, y1 = y1, y0 - qt * y1
    return a, x0, y0


def act_and_normalize(L: int, idx: HeckeIndex, a: IntMatrix) -> tuple[HeckeIndex, IntMatrix]:
    """Normal form of [[m, k], [0, L/m]] a under left SL(2, Z).

    Returns (m1, k1) and the cofactor c in SL(2, Z) with
    c [[m, k], [0, L/m]] a = [[m1, k1], [0, L/m1]], 0 <= k1 < L/m1.
    """
    p, q_, r, s = int_mul(hecke_numerator(L, idx.m, idx.k), a)
    g, x, y = _ext_gcd(p, r)
    if g < 0:
        g, x, y = -g, -x, -y
    c: IntMatrix = (x, y, -r // g, p // g)
    top = x * q_ + y * s
    bottom = (-r // g) * q_ + (p // g) * s
    m1 = g
    d1 = L // m1
    assert bottom == d1, "normal form lost the determinant"
    shift = top // d1
    c = int_mul((1, -shift, 0, 1), c)
    return HeckeIndex(m1, top - shift * d1), c


@dataclass(frozen=True)
class OrbitPermutation:
    L: int
    key: IntMatrix
    mapping: dict  # HeckeIndex -> HeckeIndex
    cofactors: dict  # HeckeIndex -> IntMatrix c with c A a = A'

    def __call__(self, idx: HeckeIndex) -> HeckeIndex:
        return self.mapping[idx]

    def inverse(self) -> dict:
        return {v: k for k, v in self.mapping.items()}

    def as_tuple(self) -> tuple:
        return tuple(self.mapping[i] for i in index_set(self.L))


def reduce_key(L: int, a: IntMatrix) -> IntMatrix:
    return tuple(x % L for x in a)


class PermutationCache:
    """Orbit permutations memoised by the key a mod L (thread-safe).

    The stored cofactors certify the first matrix seen for a key; the map
    itself is the same for every matrix congruent to it.
    """

    def __init__(self):
        self._tables: dict = {}
        self._lock = threading.Lock()
        self.builds = 0

    def get(self, L: int, a: IntMatrix) -> OrbitPermutation:
        key = (L, reduce_key(L, a))
        perm = self._tables.get(key)
        if perm is not None:
            return perm
        perm = build_permutation(L, a)
        with self._lock:
            if key not in self._tables:
                self._tables[key] = perm
                self.builds += 1
            return self._tables[key]

    def __len__(self) -> int:
        return len(self._tables)


def build_permutation(L: int, a: IntMatrix) -> OrbitPermutation:
    if int_det(a) != 1:
        raise ValueError("a must have determinant 1")
    mapping, cofs = {}, {}
    for idx in index_set(L):
        new, c = act_and_normalize(L, idx, a)
        mapping[idx] = new
        cofs[idx] = c
    return OrbitPermutation(L, reduce_key(L, a), mapping, cofs)


_default_cache = PermutationCache()


def permutation(L: int, a: IntMatrix, cache: PermutationCache | None = None) -> OrbitPermutation:
    """sigma_a on T(L), memoised by a mod L."""
    if int_det(a) != 1:
        raise ValueError("a must have determinant 1")
    return (cache if cache is not None else _default_cache).get(L, a)


def certify(L: int, idx: HeckeIndex, a: IntMatrix, new: HeckeIndex, c: IntMatrix) -> bool:
    """Exact check of c [[m,k],[0,L/m]] a = [[m1,k1],[0,L/m1]], det c = 1."""
    lhs = int_mul(int_mul(c, hecke_numerator(L, idx.m, idx.k)), a)
    return int_det(c) == 1 and lhs == hecke_numerator(L, new.m, new.k)
