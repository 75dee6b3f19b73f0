"""Twisted orbit sums S = sum_k chi(k) d_2^l f~(n(k/q) a(t)).

The fast path writes k = j + sN, so that n(k/q) a(t) = A(M, 1, s) v_j with
v_j = n(j/N) a(t + log M).  Reducing v_j = gamma_j x_j and using left
invariance of f~, the inner sum over s becomes a weighted sum over the Hecke
points A(M, m, k) x_j with weight h_{j mod M} composed with the inverse of
the orbit permutation of gamma_j.  Nearby x_j share their Hecke-point jets
through a Taylor transfer inside boxes of the reduced coordinates.
"""
from __future__ import annotations

import contextvars
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np

from . import counters
from .dirichlet import CharacterSplit, DirichletCharacter
from .errors import InvalidSplit, MissingOrder, NonInvertibleResidue, NonPrimitiveCharacter, OrderTooHigh, TooFar
from .forms import MAX_ORDER, CuspForm, MultiIndex, jet_derivatives, lift_jet, multi_indices
from .hecke import HeckeIndex, PermutationCache, hecke_matrix, index_set
from .jets import derivative_shape
from .numerics import csum, e
from .sl2 import (
    GroupElement,
    IwasawaCoords,
    box_sort,
    in_neighborhood,
    offset_coords,
    orbit_point,
    reduce,
)

# Typical offset between a box member and its representative, in box sides.
# Pairs can reach ~2.4 sides; those show up in the per-box residual.
OFFSET_RATIO = 1.0
# Box side cap in units of 1 / R (R = growth rate of the form's derivatives).
BOX_CAP = 0.6


# -- weight functions --------------------------------------------------------


@dataclass(frozen=True)
class OrbitWeightFunction:
    L: int
    values: Mapping  # HeckeIndex -> complex
    id: tuple = ()

    def __call__(self, idx: HeckeIndex) -> complex:
        return self.values.get(idx, 0j)

    def support(self) -> list[HeckeIndex]:
        return [i for i in index_set(self.L) if self.values.get(i, 0) != 0]

    def compose_inverse(self, perm) -> "OrbitWeightFunction":
        """r = h o sigma^{-1}, i.e. r(sigma(p)) = h(p)."""
        vals = {perm(p): v for p, v in self.values.items()}
        return OrbitWeightFunction(self.L, vals, self.id + (perm.key,))


def _inverse_mod(l: int, m: int) -> int:
    if m == 1:
        return 0
    try:
        return pow(l, -1, m)
    except ValueError:
        raise NonInvertibleResidue(f"{l} is not invertible mod {m}") from None


def h_mixed(b: int, M1: int, chi_M2: DirichletCharacter, N: int, l: int) -> OrbitWeightFunction:
    """h_l(1, k) = e(b l^{-1} k0 / M1) chi_M2(l + kN) with k0 = k mod M1."""
    M = M1 * chi_M2.modulus
    linv = _inverse_mod(l, M1)
    vals = {}
    for k in range(M):
        phase = e(b * linv * (k % M1) / M1) if M1 > 1 else 1 + 0j
        vals[HeckeIndex(1, k)] = phase * chi_M2(l + k * N)
    return OrbitWeightFunction(M, vals, ("mixed", l % M))


def h_coprime(chi_M: DirichletCharacter, N: int, l: int) -> OrbitWeightFunction:
    """h_l(1, k) = chi_M(l + kN)."""
    w = h_mixed(0, 1, chi_M, N, l)
    return OrbitWeightFunction(w.L, w.values, ("coprime", l % w.L))


def h_divides(b: int, M: int, l: int) -> OrbitWeightFunction:
    """h_l(1, k) = e(b l^{-1} k / M)."""
    linv = _inverse_mod(l, M)
    vals = {HeckeIndex(1, k): e(b * linv * k / M) for k in range(M)}
    return OrbitWeightFunction(M, vals, ("divides", l % M))


def h_for_split(split: CharacterSplit, l: int) -> OrbitWeightFunction:
    if split.case == "coprime":
        return h_coprime(split.chi_M2, split.N, l)
    if split.case == "divides":
        return h_divides(split.b, split.M, l)
    return h_mixed(split.b, split.M1, split.chi_M2, split.N, l)


# -- J-sums and Taylor transfer -----------------------------------------------


def _derivative_block(form: CuspForm, g: GroupElement, d: int, l: int, dx: bool) -> np.ndarray:
    """D[beta, l'] = d^beta d_2^{l'} G at g for |beta| <= d, l' <= l, where
    G is f~ (or d_1 f~ when dx is set)."""
    shape = derivative_shape(d, l, dx)
    basis, jet = lift_jet(form, g, shape)
    der = jet_derivatives(basis, jet)
    index = basis.space.index
    tail = (1,) if dx else ()
    out = np.empty((len(multi_indices(d)), l + 1), dtype=complex)
    for bi, beta in enumerate(multi_indices(d)):
        for lp in range(l + 1):
            out[bi, lp] = der[index[beta.as_tuple() + (lp,) + tail]]
    return out


def j_sum(
    form: CuspForm,
    l: int,
    beta: MultiIndex,
    r: OrbitWeightFunction,
    x: GroupElement,
    M: int,
    dx: bool = False,
) -> complex:
    """J(beta, r, x) = sum over T(M) of r(m, k) d^beta g(A(M, m, k) x)."""
    if beta.order + l + int(dx) > MAX_ORDER:
        raise OrderTooHigh(f"order {beta.order + l} exceeds {MAX_ORDER}")
    terms = []
    bi = multi_indices(beta.order).index(beta)
    for idx in index_set(M):
        w = r(idx)
        if w == 0:
            continue
        P = hecke_matrix(M, idx.m, idx.k) @ x
        terms.append(w * _derivative_block(form, P, beta.order, l, dx)[bi, l])
    return csum(terms)


def j_values(
    form: CuspForm, r: OrbitWeightFunction, x: GroupElement, M: int, d: int, l: int = 0, dx: bool = False
) -> dict:
    """{beta: J(beta, r, x)} for every |beta| <= d, from one jet per Hecke point."""
    parts = []
    for idx in index_set(M):
        w = r(idx)
        if w != 0:
            parts.append(w * _derivative_block(form, hecke_matrix(M, idx.m, idx.k) @ x, d, l, dx)[:, l])
    return {beta: csum(p[bi] for p in parts) for bi, beta in enumerate(multi_indices(d))}


@dataclass(frozen=True)
class TaylorStencil:
    offsets: IwasawaCoords
    degree: int
    coefficients: Mapping  # MultiIndex -> float

    def vector(self) -> np.ndarray:
        return np.array([self.coefficients[b] for b in multi_indices(self.degree)])


@lru_cache(maxsize=16)
def _exponents(d: int) -> tuple[np.ndarray, np.ndarray]:
    betas = multi_indices(d)
    exps = np.array([b.as_tuple() for b in betas], dtype=float).reshape(-1, 3)
    fact = np.array([b.factorial for b in betas], dtype=float)
    return exps, fact


def stencil_vector(o: IwasawaCoords, d: int) -> np.ndarray:
    exps, fact = _exponents(d)
    return o.t ** exps[:, 0] * o.v ** exps[:, 1] * o.theta ** exps[:, 2] / fact


def stencil_from_offsets(o: IwasawaCoords, d: int) -> TaylorStencil:
    vec = stencil_vector(o, d)
    return TaylorStencil(o, d, dict(zip(multi_indices(d), vec.tolist())))


def taylor_stencil(x: GroupElement, y: GroupElement, d: int, eta: float = 0.1) -> TaylorStencil:
    """c_beta = t0^b1 v0^b2 theta0^b3 / beta! for the offset x^{-1} y."""
    if not in_neighborhood(x, y, eta):
        raise TooFar(f"offset {offset_coords(x, y)} outside the {eta} neighbourhood")
    return stencil_from_offsets(offset_coords(x, y), d)


def taylor_transfer(stencil: TaylorStencil, J_values: Mapping) -> tuple[complex, float]:
    """sum_beta c_beta J(beta); returns (value, size of the top-degree layer)."""
    terms, top = [], []
    for b, c in stencil.coefficients.items():
        if b not in J_values:
            raise MissingOrder(f"no J value for {b}")
        terms.append(c * J_values[b])
        if b.order == stencil.degree:
            top.append(c * J_values[b])
    residual = abs(csum(top)) if stencil.degree > 0 else 0.0
    return csum(terms), residual


@dataclass
class JTable:
    """J(beta, r, x_rep) for every weight id met in a box; values carry all
    derivative orders l' <= l in their last axis."""

    entries: dict = field(default_factory=dict)  # (weight id, rep index) -> (n_beta, l+1)

    def value(self, beta: MultiIndex, weight_id, rep: int, l: int) -> complex:
        d = _degree_of(self.entries[(weight_id, rep)].shape[0])
        return complex(self.entries[(weight_id, rep)][multi_indices(d).index(beta), l])


def _degree_of(n_beta: int) -> int:
    d = 0
    while (d + 1) * (d + 2) * (d + 3) // 6 < n_beta:
        d += 1
    return d


# -- requests ------------------------------------------------------------------


@dataclass(frozen=True)
class SumRequest:
    form: CuspForm
    split: CharacterSplit
    t: float
    l: int = 0
    eps: float = 0.25
    gamma_prec: float = 8.0
    d: int | None = None
    dx: bool = False
    cache: bool = True
    threads: int | None = None
    check_primitive: bool = True
    eta: float | None = None  # box side override

    @property
    def q(self) -> int:
        return self.split.q


@dataclass
class SumResult:
    values: np.ndarray  # S for l' = 0..l
    degree: int
    eta: float
    boxes: int
    points: int
    weight_ids: int
    max_residual: float
    counts: dict
    jtables: JTable | None = None

    @property
    def value(self) -> complex:
        return complex(self.values[-1])


def default_threads() -> int:
    env = os.environ.get("TWISTL_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def box_side(form: CuspForm, q: int, eps: float) -> float:
    """q^{-eps}, capped so that transfers converge for the form's growth rate."""
    return min(q ** (-eps), BOX_CAP / form.derivative_bound)


def transfer_degree(form: CuspForm, eta: float, gamma_prec: float, l: int, dx: bool = False) -> int:
    """Smallest d whose Taylor remainder (R eta)^{d+1}/(d+1)! is below
    10^{-gamma_prec}, limited by the total order budget."""
    cap = MAX_ORDER - l - int(dx)
    x = form.derivative_bound * OFFSET_RATIO * eta
    for d in range(cap + 1):
        if x ** (d + 1) / math.factorial(d + 1) <= 10.0 ** (-gamma_prec):
            return d
    return cap


def _validate(req: SumRequest) -> None:
    if req.check_primitive and not req.split.chi.primitive:
        raise NonPrimitiveCharacter(f"chi_{req.q}({req.split.chi.label}, .) is not primitive")
    if req.split.M > req.split.N:
        raise InvalidSplit("the split needs M <= N")
    if req.l < 0 or req.l + int(req.dx) > MAX_ORDER:
        raise OrderTooHigh(f"derivative order {req.l} out of range")


def fast_orbit_sums(req: SumRequest) -> SumResult:
    """All S_{l'} for l' = 0..req.l by orbit decomposition."""
    _validate(req)
    split, form = req.split, req.form
    M, N, q = split.M, split.N, split.q
    counter = counters.current()
    before = counter.snapshot() if counter else None

    # orbit points v_j, skipping j with chi_{M1 N}(j) = 0
    tv = req.t + math.log(M)
    js = [j for j in range(N) if math.gcd(j, N) == 1]
    outer = split.chi_M1N.values(js) if js else np.zeros(0, dtype=complex)
    pts = [reduce(orbit_point(N, j, tv), index=j) for j in js]

    eta = req.eta if req.eta is not None else box_side(form, q, req.eps)
    d = req.d if req.d is not None else transfer_degree(form, eta, req.gamma_prec, req.l, req.dx)
    if d + req.l + int(req.dx) > MAX_ORDER:
        raise OrderTooHigh(f"d + l = {d + req.l} exceeds {MAX_ORDER}")
    part = box_sort(pts, eta) if M > 1 else None

    perms = PermutationCache()
    h_cache: dict = {}
    w_cache: dict = {}

    def weight(pos: int) -> OrbitWeightFunction:
        j = pts[pos].index
        key = (j % M, tuple(x % M for x in pts[pos].gamma))
        w = w_cache.get(key)
        if w is None:
            h = h_cache.get(j % M)
            if h is None:
                h = h_cache.setdefault(j % M, h_for_split(split, j))
            w = h.compose_inverse(perms.get(M, pts[pos].gamma))
            w = w_cache.setdefault(key, w)
        return w

    if M == 1:
        # T(1) = {(1, 0)}: the direct sum in the same j order
        blocks = [_derivative_block(form, p.x, 0, req.l, req.dx)[0] for p in pts]
        vals = np.array(
            [csum(outer[i] * blocks[i][lp] for i in range(len(pts))) for lp in range(req.l + 1)]
        )
        return SumResult(vals, 0, eta, len(pts), len(pts), 1 if pts else 0, 0.0, _delta(counter, before))

    boxes = [(rep, members) for rep, members in zip(part.representatives, part.boxes.values())]
    table = JTable()

    def run_box(item):
        rep, members = item
        x = pts[rep].x
        dd = d if len(members) > 1 else 0
        hecke_pts = {}
        jets: dict = {}
        out = {}
        resid = 0.0
        by_weight: dict = {}
        for pos in members:
            by_weight.setdefault(weight(pos).id, []).append(pos)
        local_tables = {}
        for wid, poss in by_weight.items():
            r = weight(poss[0])
            J = np.zeros((len(multi_indices(dd)), req.l + 1), dtype=complex)
            terms = []
            for idx in r.support():
                if req.cache and idx in jets:
                    D = jets[idx]
                else:
                    P = hecke_pts.setdefault(idx, hecke_matrix(M, idx.m, idx.k) @ x)
                    D = _derivative_block(form, P, dd, req.l, req.dx)
                    if req.cache:
                        jets[idx] = D
                terms.append(r(idx) * D)
            # exact-rounded reduction over the Hecke points
            if terms:
                stack = np.stack(terms)
                for bi in range(J.shape[0]):
                    for lp in range(J.shape[1]):
                        J[bi, lp] = csum(stack[:, bi, lp])
            local_tables[(wid, rep)] = J
            for pos in poss:
                if pos == rep or dd == 0:
                    out[pos] = J[0].copy()
                    continue
                c = stencil_vector(offset_coords(x, pts[pos].x), dd)
                vals = np.array([csum(c * J[:, lp]) for lp in range(J.shape[1])])
                top = _exponents(dd)[0].sum(axis=1) == dd
                resid = max(resid, float(np.max(np.abs(c[top] @ J[top]))))
                out[pos] = vals
        return out, resid, local_tables

    nthreads = req.threads or default_threads()
    if nthreads > 1 and len(boxes) > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as ex:
            futs = [ex.submit(contextvars.copy_context().run, run_box, b) for b in boxes]
            results = [f.result() for f in futs]
    else:
        results = [run_box(b) for b in boxes]

    per_point: dict = {}
    max_resid = 0.0
    for out, resid, local in results:
        per_point.update(out)
        max_resid = max(max_resid, resid)
        table.entries.update(local)
    vals = np.array(
        [
            csum(outer[pos] * per_point[pos][lp] for pos in range(len(pts)))
            for lp in range(req.l + 1)
        ]
    )
    return SumResult(
        vals, d, eta, part.count, len(pts), len(w_cache), max_resid, _delta(counter, before), table
    )


def _delta(counter, before) -> dict:
    if counter is None:
        return {}
    now = counter.snapshot()
    return {k: now[k] - before[k] for k in now}


def fast_orbit_sum(req: SumRequest) -> complex:
    return complex(fast_orbit_sums(req).values[req.l])


# -- the O(q) oracle -----------------------------------------------------------


def naive_orbit_sums(
    form: CuspForm, chi: DirichletCharacter, q: int, t: float, l: int, dx: bool = False
) -> np.ndarray:
    """sum_k chi(k) d_2^{l'} G(n(k/q) a(t)) for l' = 0..l, k in increasing order."""
    if chi.modulus != q:
        raise ValueError("character modulus differs from q")
    ks = [k for k in range(q) if math.gcd(k, q) == 1]
    cvals = chi.values(ks)
    blocks = [_derivative_block(form, orbit_point(q, k, t), 0, l, dx)[0] for k in ks]
    return np.array([csum(cvals[i] * blocks[i][lp] for i in range(len(ks))) for lp in range(l + 1)])


def naive_orbit_sum(
    form: CuspForm, chi: DirichletCharacter, q: int, t: float, l: int = 0, dx: bool = False
) -> complex:
    return complex(naive_orbit_sums(form, chi, q, t, l, dx)[l])
