"""Level-one cusp forms: Fourier evaluation, the lift to SL(2,R), derivatives.

The lift of a weight-k form is f~(g) = (ci + d)^{-k} f(g . i).  Every value
is computed at the reduced representative of g, where the Fourier series
converges fast; automorphy makes this exact.

Ordered derivatives d_1^{b1} d_2^{b2} d_3^{b3} d_2^l f~ are read off a jet
of s -> f~(g n(s1) a(s2) K(s3) a(s4)).  Writing u = u(s) and P the reduced
point, f~(P u) = j(u, i)^{-k} F_P(u . i) with F_P(w) = j(P, w)^{-k} f(P w),
so the jet is a fixed basis (depending only on the flow word) contracted
with the Taylor coefficients of F_P at i, which have a closed form.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from . import counters
from .errors import (
    InsufficientCoefficients,
    MissingSpectralParameter,
    OrderTooHigh,
    ParseError,
)
from .jets import FlowBasis, JetShape, _binom_neg, derivative_shape, flow_basis
from .numerics import bessel_k_ir, bessel_k_ir_derivatives
from .sl2 import (
    GroupElement,
    a_mat,
    check_unimodular,
    k_mat,
    n_mat,
    reduce,
)

MAX_ORDER = 12
HOLOMORPHIC = "holomorphic"
MAASS_EVEN = "maass_even"


@dataclass(frozen=True)
class MultiIndex:
    b1: int = 0
    b2: int = 0
    b3: int = 0

    def __post_init__(self):
        if min(self.b1, self.b2, self.b3) < 0:
            raise ValueError("multi-index entries must be nonnegative")

    @property
    def order(self) -> int:
        return self.b1 + self.b2 + self.b3

    @property
    def factorial(self) -> int:
        return math.factorial(self.b1) * math.factorial(self.b2) * math.factorial(self.b3)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.b1, self.b2, self.b3)


def multi_indices(d: int) -> list[MultiIndex]:
    """All beta with |beta| <= d, in lexicographic order."""
    return [
        MultiIndex(i, j, k)
        for i in range(d + 1)
        for j in range(d + 1 - i)
        for k in range(d + 1 - i - j)
    ]


@dataclass(frozen=True)
class EvalConfig:
    target_abs_error: float = 1e-13
    max_terms: int = 2000
    fd_step: float = 0.02

    def __post_init__(self):
        if self.target_abs_error < 1e-12 * 1e-3:
            raise ValueError("target_abs_error below supported floor")


@dataclass(eq=False)
class CuspForm:
    kind: str
    weight: int
    coefficients: np.ndarray
    r: float | None = None
    name: str = ""
    _bound: float | None = field(default=None, repr=False)

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=complex)
        if self.kind == HOLOMORPHIC:
            if self.weight < 12 or self.weight % 2 or self.r is not None:
                raise ValueError("holomorphic forms need even weight >= 12 and no r")
        elif self.kind == MAASS_EVEN:
            if self.weight != 0 or self.r is None:
                raise ValueError("even Maass forms need weight 0 and a spectral parameter")
        else:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.coefficients.size == 0:
            raise ValueError("no coefficients")

    @property
    def coefficient_count(self) -> int:
        return int(self.coefficients.size)

    @property
    def is_holomorphic(self) -> bool:
        return self.kind == HOLOMORPHIC

    @property
    def derivative_bound(self) -> float:
        if self._bound is None:
            self._bound = estimate_derivative_bound(self)
        return self._bound


# -- coefficient sources -------------------------------------------------


@lru_cache(maxsize=8)
def _tau_table(n_max: int) -> tuple[int, ...]:
    # prod (1 - x^m)^24 = sum p_n x^n with n p_n = -24 sum_{j<=n} sigma(j) p_{n-j}
    sig = [0] * (n_max + 1)
    for dvs in range(1, n_max + 1):
        for mult in range(dvs, n_max + 1, dvs):
            sig[mult] += dvs
    p = [0] * n_max
    p[0] = 1
    for n in range(1, n_max):
        acc = 0
        for j in range(1, n + 1):
            acc += sig[j] * p[n - j]
        p[n] = -24 * acc // n
    return tuple(p)


def delta_coefficients(n_max: int) -> list[int]:
    """Ramanujan tau(1..n_max), exact integers."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    return list(_tau_table(n_max))


def delta_form(n_terms: int = 400) -> CuspForm:
    return CuspForm(HOLOMORPHIC, 12, np.array(delta_coefficients(n_terms), dtype=float), name="delta")


def load_maass(path) -> CuspForm:
    """Read the plain-text Maass coefficient format.

    Line 1 is ``maass-even``, line 2 ``r <decimal>``, then ``n re [im]`` for
    n = 1, 2, ... without gaps.  ``#`` starts a comment.
    """
    lines = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append(body)
    if not lines or lines[0] != "maass-even":
        raise ParseError("missing 'maass-even' header")
    if len(lines) < 2 or not lines[1].startswith("r "):
        raise MissingSpectralParameter("second line must be 'r <decimal>'")
    try:
        r = float(lines[1].split()[1])
    except (IndexError, ValueError) as exc:
        raise MissingSpectralParameter(str(exc)) from exc
    coeffs = []
    for expected, line in enumerate(lines[2:], start=1):
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(f"malformed coefficient line {line!r}")
        try:
            n = int(parts[0])
            val = complex(float(parts[1]), float(parts[2]) if len(parts) == 3 else 0.0)
        except ValueError as exc:
            raise ParseError(f"malformed coefficient line {line!r}") from exc
        if n != expected:
            raise ParseError(f"expected index {expected}, got {n}")
        coeffs.append(val)
    if not coeffs:
        raise ParseError("empty coefficient list")
    return CuspForm(MAASS_EVEN, 0, np.array(coeffs), r=r, name=str(path))


def write_maass(form: CuspForm, path) -> None:
    out = ["maass-even", f"r {float(form.r)!r}"]
    for n, c in enumerate(form.coefficients, start=1):
        out.append(f"{n} {float(c.real)!r} {float(c.imag)!r}")
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


# -- Fourier evaluation ----------------------------------------------------


def terms_needed(form: CuspForm, y: float, order: int = 0, tol: float = 1e-13, relative: bool = False) -> int:
    """Length of Fourier truncation whose tail (with order-th derivative
    factors (2 pi n)^order) is below tol."""
    cap = form.coefficient_count
    n = np.arange(1, cap + 1, dtype=float)
    growth = form.weight / 2 + 1.0 if form.is_holomorphic else 1.0
    logb = growth * np.log(n) + order * np.log(2 * math.pi * n) - 2 * math.pi * n * y
    if not form.is_holomorphic:
        logb = logb + math.pi * abs(form.r) / 2
    if relative:
        logb = logb - logb.max()
    bad = np.nonzero(logb > math.log(tol) - 3.0)[0]
    need = int(bad[-1]) + 2 if bad.size else 1
    if need > cap:
        raise InsufficientCoefficients(
            f"need {need} coefficients at y={y:.3g}, only {cap} supplied"
        )
    return need


def eval_point(form: CuspForm, z: complex, cfg: EvalConfig = EvalConfig()) -> complex:
    """Truncated Fourier series at z (Im z > 0)."""
    y = z.imag
    if y <= 0:
        raise ValueError("z must lie in the upper half-plane")
    N = min(terms_needed(form, y, 0, cfg.target_abs_error), cfg.max_terms)
    if N < terms_needed(form, y, 0, cfg.target_abs_error):
        raise InsufficientCoefficients("max_terms too small for requested accuracy")
    n = np.arange(1, N + 1)
    c = form.coefficients[:N]
    if form.is_holomorphic:
        return complex(np.sum(c * np.exp(2j * math.pi * n * z)))
    kv = bessel_k_ir_derivatives(form.r, 2 * math.pi * n * y, 0)[0]
    return complex(np.sum(c * 2 * np.sqrt(n * y) * kv * np.cos(2 * math.pi * n * z.real)))


def lift_eval(form: CuspForm, g: GroupElement, cfg: EvalConfig = EvalConfig()) -> complex:
    """f~(g) = (ci + d)^{-k} f(g . i), evaluated at the reduced representative."""
    check_unimodular(g)
    x = reduce(g).x
    counters.bump(lift_evals=1)
    z = x.point()
    val = eval_point(form, z, cfg)
    if form.weight:
        val *= complex(x.c * 1j + x.d) ** (-form.weight)
    return val


# -- jets --------------------------------------------------------------------


def _hol_taylor(form: CuspForm, x: GroupElement, D: int) -> np.ndarray:
    """Taylor coefficients at w = i of F(w) = j(x, w)^{-k} f(x w)."""
    z0 = x.point()
    C0 = complex(x.c * 1j + x.d)
    rho = x.c / C0
    k = form.weight
    N = terms_needed(form, z0.imag, D, 1e-18, relative=True)
    n = np.arange(1, N + 1, dtype=float)
    base = form.coefficients[:N] * np.exp(2j * math.pi * n * z0)
    fm = np.empty(D + 1, dtype=complex)
    fac = np.ones(N, dtype=complex)
    for m in range(D + 1):
        fm[m] = np.sum(base * fac)
        fac = fac * (2j * math.pi * n) / (m + 1)
    out = np.zeros(D + 1, dtype=complex)
    c0k = C0 ** (-k)
    inv2 = C0 ** (-2)
    for j in range(D + 1):
        acc = 0j
        for m in range(j + 1):
            acc += fm[m] * inv2**m * _binom_neg(m + k, j - m) * rho ** (j - m)
        out[j] = c0k * acc
    return out


@lru_cache(maxsize=32)
def _wirtinger_tensor(D: int) -> np.ndarray:
    """T[a, g, mu, nu] with d_z^a d_zbar^g = sum T d_x^mu d_y^nu."""
    T = np.zeros((D + 1, D + 1, D + 1, D + 1), dtype=complex)
    for a in range(D + 1):
        for g in range(D + 1 - a):
            for p in range(a + 1):
                for r in range(g + 1):
                    coef = math.comb(a, p) * math.comb(g, r) * (-1j) ** (a - p) * (1j) ** (g - r)
                    T[a, g, p + r, a - p + g - r] += coef / 2 ** (a + g)
    return T


def _maass_partials(form: CuspForm, z0: complex, D: int) -> np.ndarray:
    """P[mu, nu] = d_x^mu d_y^nu f(z0) for mu + nu <= D."""
    x0, y0 = z0.real, z0.imag
    N = terms_needed(form, y0, D, 1e-18, relative=True)
    n = np.arange(1, N + 1, dtype=float)
    w = 2 * math.pi * n
    X = np.array([w**mu * np.cos(w * x0 + mu * math.pi / 2) for mu in range(D + 1)])
    Kd = bessel_k_ir_derivatives(form.r, w * y0, D)  # (D+1, N)
    sq = np.empty(D + 1)  # derivatives of sqrt(y) at y0
    c = 1.0
    for j in range(D + 1):
        sq[j] = c * y0 ** (0.5 - j)
        c *= 0.5 - j
    Y = np.zeros((D + 1, N))
    for nu in range(D + 1):
        for p in range(nu + 1):
            Y[nu] += math.comb(nu, p) * sq[nu - p] * w**p * Kd[p]
    Y *= 2 * np.sqrt(n)
    P = (X * form.coefficients[:N]) @ Y.T
    return P


def _maass_taylor(form: CuspForm, x: GroupElement, D: int) -> np.ndarray:
    """C[a, b]: coefficient of delta^a conj(delta)^b in f(x (i + delta))."""
    z0 = x.point()
    C0 = complex(x.c * 1j + x.d)
    rho = x.c / C0
    P = _maass_partials(form, z0, D)
    W = np.einsum("agmn,mn->ag", _wirtinger_tensor(D), np.where(
        np.add.outer(np.arange(D + 1), np.arange(D + 1)) <= D, P, 0))
    fact = np.array([math.factorial(i) for i in range(D + 1)], dtype=float)
    W = W / np.outer(fact, fact)
    E = np.zeros((D + 1, D + 1), dtype=complex)  # E[alpha, p]
    for al in range(D + 1):
        for p in range(al, D + 1):
            E[al, p] = C0 ** (-2 * al) * _binom_neg(al, p - al) * rho ** (p - al)
    return E.T @ W @ np.conj(E)


def lift_jet(form: CuspForm, g: GroupElement, shape: JetShape) -> tuple:
    """Jet of s -> f~(g u(s)) for the flow word in ``shape``.

    Returns (basis, coefficient vector); ``derivatives`` converts it.
    """
    check_unimodular(g)
    x = reduce(g).x
    basis = flow_basis(shape, form.weight)
    D = shape.degree
    if form.is_holomorphic:
        jet = _hol_taylor(form, x, D) @ basis.hol
    else:
        C = _maass_taylor(form, x, D)
        R = basis.real_basis()
        mask = np.add.outer(np.arange(D + 1), np.arange(D + 1)) <= D
        jet = np.tensordot(np.where(mask, C, 0), R, axes=([0, 1], [0, 1]))
    counters.bump(lift_evals=1, lift_derivative_evals=basis.space.size)
    return basis, jet


def jet_derivatives(basis: FlowBasis, jet: np.ndarray) -> np.ndarray:
    """All derivative values, indexed like ``basis.space.exps``."""
    return jet * basis.space.factorials


def lift_derivative(
    form: CuspForm,
    g: GroupElement,
    beta: MultiIndex = MultiIndex(),
    l: int = 0,
    cfg: EvalConfig = EvalConfig(),
    method: str = "jet",
) -> complex:
    """d_1^{b1} d_2^{b2} d_3^{b3} d_2^l f~ at g (operators in that order)."""
    if beta.order + l > MAX_ORDER:
        raise OrderTooHigh(f"order {beta.order + l} exceeds {MAX_ORDER}")
    if method == "stencil":
        return stencil_derivative(form, g, beta, l, cfg)
    shape = derivative_shape(beta.order, l)
    basis, jet = lift_jet(form, g, shape)
    return basis.space.derivative(jet, beta.as_tuple() + (l,))


# -- finite-difference cross-check --------------------------------------------


@lru_cache(maxsize=64)
def central_weights(order: int, half_width: int) -> np.ndarray:
    """Central-difference weights for the order-th derivative on 2h+1 nodes."""
    nodes = np.arange(-half_width, half_width + 1, dtype=float)
    V = np.vander(nodes, increasing=True).T
    rhs = np.zeros(len(nodes))
    rhs[order] = math.factorial(order)
    return np.linalg.solve(V, rhs)


def stencil_derivative(
    form: CuspForm, g: GroupElement, beta: MultiIndex, l: int, cfg: EvalConfig = EvalConfig()
) -> complex:
    """Same quantity as ``lift_derivative`` by tensor central differences on
    the exact flow s -> f~(g n(s1) a(s2) K(s3) a(s4))."""
    orders = beta.as_tuple() + (l,)
    flows = (n_mat, a_mat, k_mat, a_mat)
    h = cfg.fd_step
    axes = []
    for o in orders:
        if o == 0:
            axes.append((np.array([0.0]), np.array([1.0])))
        else:
            hw = o // 2 + 3
            axes.append((np.arange(-hw, hw + 1) * h, central_weights(o, hw) / h**o))
    total = 0j
    for i1, (s1, w1) in enumerate(zip(*axes[0])):
        for s2, w2 in zip(*axes[1]):
            for s3, w3 in zip(*axes[2]):
                for s4, w4 in zip(*axes[3]):
                    pt = g @ flows[0](s1) @ flows[1](s2) @ flows[2](s3) @ flows[3](s4)
                    total += w1 * w2 * w3 * w4 * lift_eval(form, pt, cfg)
    return total


def estimate_derivative_bound(form: CuspForm, samples: int = 1000, seed: int = 0) -> float:
    """Empirical growth rate R: max first-derivative size over max |f~| on
    a sample of fundamental-domain points, so |d^beta f~| ~ scale R^|beta|."""
    with counters.counting():  # calibration work is not part of any run
        return _estimate_bound(form, samples, seed)


def _estimate_bound(form: CuspForm, samples: int, seed: int) -> float:
    rng = np.random.default_rng(seed)
    shape = derivative_shape(1, 0)
    basis = flow_basis(shape, form.weight)
    top_val = 0.0
    top_der = 0.0
    idx1 = [basis.space.index[e] for e in ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0))]
    for _ in range(samples):
        x = rng.uniform(-0.5, 0.5)
        y = math.sqrt(max(0.0, 1 - x * x)) + rng.exponential(0.8)
        g = n_mat(x) @ a_mat(math.log(y))
        _, jet = lift_jet(form, g, shape)
        der = jet_derivatives(basis, jet)
        top_val = max(top_val, abs(der[0]))
        top_der = max(top_der, max(abs(der[i]) for i in idx1))
    return max(1.0, top_der / top_val) if top_val > 0 else 1.0


def sup_norm(form: CuspForm, samples: int = 400, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    best = 0.0
    with counters.counting():
        for _ in range(samples):
            x = rng.uniform(-0.5, 0.5)
            y = math.sqrt(max(0.0, 1 - x * x)) + rng.exponential(0.8)
            best = max(best, abs(lift_eval(form, n_mat(x) @ a_mat(math.log(y)))))
    return best
