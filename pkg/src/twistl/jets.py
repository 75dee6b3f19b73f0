"""Truncated multivariate power series ("jets") along one-parameter flows.

A jet space is attached to a word of flows, e.g. ("n", "a", "K", "a"),
meaning the map s -> n(s1) a(s2) K(s3) a(s4).  Exponents are truncated by
group caps: each group of variables has a bound on the sum of its
exponents.  The monomial set is downward closed, so products and
compositions computed in it are exact up to truncation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class JetShape:
    flows: tuple  # of "n", "a", "K"
    groups: tuple  # of (tuple of variable positions, cap)

    @property
    def nvars(self) -> int:
        return len(self.flows)

    @property
    def degree(self) -> int:
        return sum(cap for _, cap in self.groups)


class JetSpace:
    def __init__(self, shape: JetShape):
        self.shape = shape
        nv = shape.nvars
        caps = [0] * nv
        for vars_, cap in shape.groups:
            for v in vars_:
                caps[v] = cap
        self.caps = caps
        grids = np.indices([c + 1 for c in caps]).reshape(nv, -1).T
        keep = np.ones(len(grids), dtype=bool)
        for vars_, cap in shape.groups:
            keep &= grids[:, list(vars_)].sum(axis=1) <= cap
        exps = grids[keep]
        order = np.lexsort(exps.T[::-1])
        exps = exps[order]
        self.exps = exps
        self.size = len(exps)
        self.index = {tuple(int(x) for x in e): i for i, e in enumerate(exps)}
        self.factorials = np.array(
            [math.prod(math.factorial(int(x)) for x in e) for e in exps], dtype=float
        )
        self.total = exps.sum(axis=1)
        self._build_tables()

    def _build_tables(self) -> None:
        radix = np.array([c + 1 for c in self.caps])
        place = np.concatenate(([1], np.cumprod(radix[::-1])[:-1]))[::-1]
        lookup = np.full(int(np.prod(radix)), -1, dtype=np.int64)
        lookup[self.exps @ place] = np.arange(self.size)
        ii, jj, tt = [], [], []
        for i in range(self.size):
            s = self.exps[i] + self.exps
            ok = np.all(s <= radix - 1, axis=1)
            idx = np.where(ok)[0]
            tgt = lookup[s[idx] @ place]
            good = tgt >= 0
            ii.append(np.full(good.sum(), i))
            jj.append(idx[good])
            tt.append(tgt[good])
        self._i = np.concatenate(ii)
        self._j = np.concatenate(jj)
        self._t = np.concatenate(tt)

    # -- construction --------------------------------------------------
    def const(self, c: complex) -> np.ndarray:
        out = np.zeros(self.size, dtype=complex)
        out[0] = c
        return out

    def univariate(self, var: int, coeffs: Sequence[complex]) -> np.ndarray:
        out = np.zeros(self.size, dtype=complex)
        for p, c in enumerate(coeffs):
            if p > self.caps[var]:
                break
            e = [0] * self.shape.nvars
            e[var] = p
            i = self.index.get(tuple(e))
            if i is not None:
                out[i] = c
        return out

    # -- arithmetic ----------------------------------------------------
    def mul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        prod = x[self._i] * y[self._j]
        re = np.bincount(self._t, weights=prod.real, minlength=self.size)
        im = np.bincount(self._t, weights=prod.imag, minlength=self.size)
        return re + 1j * im

    def compose(self, coeffs: Sequence[complex], x: np.ndarray) -> np.ndarray:
        """sum_m coeffs[m] x^m for a jet x with zero constant term."""
        out = self.const(0)
        for c in reversed(list(coeffs)[: self.shape.degree + 1]):
            out = self.mul(out, x)
            out[0] += c
        return out

    def powers(self, x: np.ndarray, top: int) -> list:
        out = [self.const(1.0)]
        for _ in range(top):
            out.append(self.mul(out[-1], x))
        return out

    def derivative(self, jet: np.ndarray, exps: Sequence[int]) -> complex:
        i = self.index[tuple(exps)]
        return complex(jet[i] * self.factorials[i])


def _flow_matrix(space: JetSpace, var: int, kind: str):
    cap = space.caps[var]
    if kind == "n":
        return (space.const(1), space.univariate(var, [0, 1]), space.const(0), space.const(1))
    if kind == "a":
        ep = space.univariate(var, [0.5**p / math.factorial(p) for p in range(cap + 1)])
        em = space.univariate(var, [(-0.5) ** p / math.factorial(p) for p in range(cap + 1)])
        return (ep, space.const(0), space.const(0), em)
    if kind == "K":
        cs = [0.0] * (cap + 1)
        sn = [0.0] * (cap + 1)
        for p in range(cap + 1):
            if p % 2 == 0:
                cs[p] = (-1) ** (p // 2) / math.factorial(p)
            else:
                sn[p] = (-1) ** (p // 2) / math.factorial(p)
        c, s = space.univariate(var, cs), space.univariate(var, sn)
        return (c, s, -s, c)
    raise ValueError(f"unknown flow {kind!r}")


def _mat_mul(space: JetSpace, x, y):
    m = space.mul
    return (
        m(x[0], y[0]) + m(x[1], y[2]),
        m(x[0], y[1]) + m(x[1], y[3]),
        m(x[2], y[0]) + m(x[3], y[2]),
        m(x[2], y[1]) + m(x[3], y[3]),
    )


def _binom_neg(n: float, r: int) -> float:
    """Generalised binomial coefficient binom(-n, r)."""
    out = 1.0
    for i in range(r):
        out *= (-n - i) / (i + 1)
    return out


class FlowBasis:
    """Jets of the flow word at the identity.

    With u(s) the flow word, w(s) = u(s) . i and delta = w - i:

    * ``cocycle`` is j(u(s), i)^{-k}
    * ``hol[j]`` is j(u(s), i)^{-k} delta^j
    * ``real(a, b)`` is delta^a conj(delta)^b (weight zero only)
    """

    def __init__(self, shape: JetShape, weight: int):
        self.shape = shape
        self.weight = weight
        self.space = space = JetSpace(shape)
        mat = (space.const(1), space.const(0), space.const(0), space.const(1))
        for var, kind in enumerate(shape.flows):
            mat = _mat_mul(space, mat, _flow_matrix(space, var, kind))
        a, b, c, d = mat
        den = c * 1j + d  # constant term 1
        eps = den.copy()
        eps[0] -= 1.0
        D = shape.degree
        inv = space.compose([(-1.0) ** m for m in range(D + 1)], eps)
        w = space.mul(a * 1j + b, inv)
        delta = w.copy()
        delta[0] -= 1j
        self.delta = delta
        self.cocycle = space.compose([_binom_neg(weight, m) for m in range(D + 1)], eps)
        pw = space.powers(delta, D)
        self.hol = np.array([space.mul(self.cocycle, p) for p in pw])
        self._pw = pw
        self._real = None

    def real_basis(self) -> np.ndarray:
        """Array indexed [a, b] of delta^a conj(delta)^b (zero where a+b > D)."""
        if self._real is None:
            D = self.shape.degree
            sp = self.space
            out = np.zeros((D + 1, D + 1, sp.size), dtype=complex)
            conj = [np.conj(p) for p in self._pw]
            for a in range(D + 1):
                for b in range(D + 1 - a):
                    out[a, b] = sp.mul(self._pw[a], conj[b])
            self._real = out
        return self._real


@lru_cache(maxsize=64)
def flow_basis(shape: JetShape, weight: int) -> FlowBasis:
    return FlowBasis(shape, weight)


def derivative_shape(beta_cap: int, l_cap: int, dx: bool = False) -> JetShape:
    """Shape for d^beta d_2^l g with g = f~ (or d_1 f~ when dx is set).

    Flow word n a K | a | (n): the first three variables carry beta, the
    fourth carries the geodesic order l, the optional fifth the single
    horocycle derivative of the dx variant.
    """
    flows = ["n", "a", "K", "a"]
    groups = [((0, 1, 2), beta_cap), ((3,), l_cap)]
    if dx:
        flows.append("n")
        groups.append(((4,), 1))
    return JetShape(tuple(flows), tuple(groups))


def geodesic_shape(l_cap: int, dx: bool = False) -> JetShape:
    """Shape for pure geodesic derivatives d_2^l g (one variable, plus dx)."""
    if dx:
        return JetShape(("a", "n"), (((0,), l_cap), ((1,), 1)))
    return JetShape(("a",), (((0,), l_cap),))
