"""Dirichlet characters in Conrey labelling, Gauss sums, and modulus splits.

A character mod q is stored through its prime-power components.  Values are
kept as exact angles (fractions of a turn) until the very end, which keeps
the split identities checkable in exact arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import numpy as np

from . import counters
from .errors import InvalidLabel, InvalidSplit, NonFactorable
from .numerics import csum


def factorize(n: int) -> list[tuple[int, int]]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def _order_mod(g: int, m: int, phi: int) -> int:
    for d in sorted(_divisors(phi)):
        if pow(g, d, m) == 1:
            return d
    return phi


def _divisors(n: int) -> list[int]:
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
    return small + large[::-1]


@lru_cache(maxsize=None)
def least_primitive_root(pe: int, p: int) -> int:
    phi = pe // p * (p - 1)
    for g in range(2, pe):
        if math.gcd(g, p) == 1 and _order_mod(g, pe, phi) == phi:
            return g
    return 1


@dataclass(frozen=True)
class Component:
    """Conrey character mod p^e, stored as angle numerators over ``den``."""

    p: int
    e: int
    label: int
    den: int
    numerators: tuple  # per residue mod p^e; -1 marks non-units

    @property
    def modulus(self) -> int:
        return self.p**self.e


@lru_cache(maxsize=None)
def _log_table(p: int, e: int) -> tuple:
    """Discrete-log data for (Z/p^e)^*.

    Odd p: (g, logs) with logs[n] = log_g n.  p = 2: (sign, exps) with
    n = (-1)^sign 5^exp; for e <= 2 exps are all zero.
    """
    pe = p**e
    if p != 2:
        g = least_primitive_root(pe, p)
        logs = [-1] * pe
        x = 1
        for k in range(pe // p * (p - 1)):
            logs[x] = k
            x = x * g % pe
        return (g, tuple(logs))
    sign = [-1] * pe
    exps = [-1] * pe
    if e == 1:
        sign[1], exps[1] = 0, 0
        return (tuple(sign), tuple(exps))
    half = 1 if e == 2 else 2 ** (e - 2)
    x = 1
    for a in range(half):
        sign[x], exps[x] = 0, a
        sign[(-x) % pe], exps[(-x) % pe] = 1, a
        x = x * 5 % pe
    return (tuple(sign), tuple(exps))


@lru_cache(maxsize=1024)
def make_component(p: int, e: int, label: int) -> Component:
    pe = p**e
    label %= pe
    if math.gcd(label, p) != 1:
        raise InvalidLabel(f"label {label} not a unit mod {pe}")
    if p != 2:
        _, logs = _log_table(p, e)
        phi = pe // p * (p - 1)
        lm = logs[label]
        nums = tuple(-1 if logs[n] < 0 else (lm * logs[n]) % phi for n in range(pe))
        return Component(p, e, label, phi, nums)
    sign, exps = _log_table(2, e)
    if e == 1:
        return Component(2, 1, 1, 1, (-1, 0))
    if e == 2:
        return Component(2, 2, label, 2, tuple(
            -1 if sign[n] < 0 else (sign[label] * sign[n]) % 2 for n in range(pe)))
    den = 2 ** (e - 2)
    nums = []
    for n in range(pe):
        if sign[n] < 0:
            nums.append(-1)
        else:
            nums.append((sign[label] * sign[n] * den // 2 + exps[label] * exps[n]) % den)
    return Component(2, e, label, den, tuple(nums))


@dataclass(frozen=True)
class DirichletCharacter:
    modulus: int
    label: int
    components: tuple = field(repr=False)

    @property
    def primitive(self) -> bool:
        return all(_component_primitive(c) for c in self.components)

    def angle(self, n: int) -> Fraction | None:
        """chi(n) = e(angle), or None when gcd(n, q) > 1."""
        total = Fraction(0)
        for c in self.components:
            num = c.numerators[n % c.modulus]
            if num < 0:
                return None
            total += Fraction(num, c.den)
        return total - math.floor(total)

    def __call__(self, n: int) -> complex:
        return eval_char(self, n)

    def values(self, ns) -> np.ndarray:
        """Vectorised evaluation on an integer array."""
        ns = np.asarray(ns, dtype=np.int64)
        counters.bump(char_evals=int(ns.size))
        if not self.components:
            return np.ones(ns.shape, dtype=complex)
        D = 1
        for c in self.components:
            D = D * c.den // math.gcd(D, c.den)
        total = np.zeros(ns.shape, dtype=np.int64)
        unit = np.ones(ns.shape, dtype=bool)
        for c in self.components:
            tab = np.asarray(c.numerators, dtype=np.int64)
            num = tab[ns % c.modulus]
            unit &= num >= 0
            total += np.where(num >= 0, num, 0) * (D // c.den)
        total %= D
        vals = np.exp(2j * np.pi * total / D)
        # exact values at the quarter turns
        vals = np.where(4 * total == 0, 1.0, vals)
        vals = np.where(4 * total == 2 * D, -1.0, vals)
        vals = np.where(4 * total == D, 1j, vals)
        vals = np.where(4 * total == 3 * D, -1j, vals)
        return np.where(unit, vals, 0.0)

    @property
    def parity(self) -> int:
        return 1 if self.angle(-1) == 0 else -1

    def conj(self) -> "DirichletCharacter":
        if self.modulus == 1:
            return self
        return char_from_label(self.modulus, pow(self.label, -1, self.modulus))

    def restrict(self, primes: Iterable[int]) -> "DirichletCharacter":
        """The CRT component supported on the given primes."""
        primes = set(primes)
        comps = tuple(c for c in self.components if c.p in primes)
        mod = math.prod(c.modulus for c in comps)
        return DirichletCharacter(mod, self.label % mod if mod > 1 else 1, comps)


def _component_primitive(c: Component) -> bool:
    step = c.p ** (c.e - 1)
    rng = range(1, c.p) if c.e == 1 else range(1, c.modulus, step)
    return any(c.numerators[n] > 0 for n in rng)


def char_from_label(q: int, label: int) -> DirichletCharacter:
    """Conrey character chi_q(label, .)."""
    if q < 1:
        raise InvalidLabel("modulus must be positive")
    if math.gcd(label, q) != 1:
        raise InvalidLabel(f"gcd({label}, {q}) > 1")
    comps = tuple(make_component(p, e, label) for p, e in factorize(q))
    return DirichletCharacter(q, label % q if q > 1 else 1, comps)


def parse_char_spec(spec: str) -> DirichletCharacter:
    """'q:label' as used on the command line."""
    try:
        q_s, l_s = spec.split(":")
        return char_from_label(int(q_s), int(l_s))
    except ValueError as exc:
        raise InvalidLabel(f"bad character spec {spec!r}") from exc


def eval_char(chi: DirichletCharacter, n: int) -> complex:
    counters.bump(char_evals=1)
    ang = chi.angle(n)
    if ang is None:
        return 0j
    return _root(ang)


def _root(ang: Fraction) -> complex:
    if ang == 0:
        return 1 + 0j
    if ang == Fraction(1, 2):
        return -1 + 0j
    if ang == Fraction(1, 4):
        return 1j
    if ang == Fraction(3, 4):
        return -1j
    t = 2 * math.pi * float(ang)
    return complex(math.cos(t), math.sin(t))


def label_is_primitive(p: int, e: int, a: int) -> bool:
    """Primitivity of chi_{p^e}(a, .) from the label alone.

    Odd p: the group is cyclic and labels preserve order, so the character
    comes from p^{e-1} exactly when a^{phi(p^{e-1})} = 1 mod p^e.
    """
    pe = p**e
    a %= pe
    if p == 2:
        if e == 1:
            return False
        return a % 4 == 3 if e == 2 else a % 8 in (3, 5)
    phi_lower = p ** (e - 2) * (p - 1) if e >= 2 else 1
    return pow(a, phi_lower, pe) != 1


def primitive_labels(q: int) -> list[int]:
    fac = factorize(q)
    return [
        a
        for a in range(1, q + 1)
        if math.gcd(a, q) == 1 and all(label_is_primitive(p, e, a) for p, e in fac)
    ]


# -- Gauss sums ---------------------------------------------------------------


def _gauss_direct(chi: DirichletCharacter) -> complex:
    q = chi.modulus
    k = np.arange(q)
    vals = chi.values(k) * np.exp(2j * np.pi * k / q)
    return csum(vals)


def gauss_sum_direct(chi: DirichletCharacter) -> complex:
    """O(q) reference sum."""
    return _gauss_direct(chi)


def gauss_sum(chi: DirichletCharacter) -> complex:
    """tau(chi) = prod_i chi_i(q / q_i) tau(chi_i) over prime-power parts."""
    q = chi.modulus
    out = 1 + 0j
    for c in chi.components:
        part = DirichletCharacter(c.modulus, c.label, (c,))
        out *= eval_char(part, q // c.modulus) * _gauss_direct(part)
    return out


# -- splits --------------------------------------------------------------------


@dataclass(frozen=True)
class CharacterSplit:
    chi: DirichletCharacter
    M: int
    N: int
    M1: int
    M2: int
    chi_M2: DirichletCharacter
    chi_M1N: DirichletCharacter
    b: int

    @property
    def q(self) -> int:
        return self.M * self.N

    @property
    def case(self) -> str:
        if self.M1 == 1:
            return "coprime"
        if self.M2 == 1:
            return "divides"
        return "mixed"


def split_character(chi: DirichletCharacter, M: int, N: int) -> CharacterSplit:
    q = chi.modulus
    if M < 1 or N < 1 or M * N != q:
        raise InvalidSplit(f"{M} x {N} != {q}")
    shared = {p for p, _ in factorize(math.gcd(M, N))}
    M1 = math.prod(p**e for p, e in factorize(M) if p in shared)
    M2 = M // M1
    if N % M1:
        raise NonFactorable(f"M1 = {M1} does not divide N = {N}")
    primes_N = {p for p, _ in factorize(N)}
    primes_M2 = {p for p, _ in factorize(M2)}
    chi_M2 = chi.restrict(primes_M2)
    chi_M1N = chi.restrict(primes_N)
    assert chi_M2.modulus == M2 and chi_M1N.modulus == M1 * N
    ang = chi_M1N.angle(1 + N) if M1 > 1 else Fraction(0)
    b_frac = ang * M1
    if b_frac.denominator != 1:
        raise InvalidSplit("chi(1 + N) is not an M1-th root of unity")
    b = int(b_frac) % M1 if M1 > 1 else 0
    for k in range(M1):
        if chi_M1N.angle(1 + k * N) != Fraction(b * k % M1, M1) % 1:
            raise InvalidSplit(f"b-identity fails at k={k}")
    return CharacterSplit(chi, M, N, M1, M2, chi_M2, chi_M1N, b)


def check_split_product(split: CharacterSplit) -> bool:
    """Exact check that chi_M2 * chi_M1N reproduces chi on all units."""
    chi = split.chi
    for n in range(chi.modulus):
        a = chi.angle(n)
        if a is None:
            continue
        tot = split.chi_M2.angle(n) + split.chi_M1N.angle(n)
        if (tot - a) % 1 != 0:
            return False
    return True
