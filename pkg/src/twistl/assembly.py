"""L(s, f x chi) from twisted orbit sums.

For a primitive character psi mod q and G = f~ (or d_1 f~ on the odd Maass
route) the window integral

    I(s) = sum_j psi(j) int_{-c log q}^{c log q} G(n(j/q) a(t)) e^{t(s - 1/2)} dt

equals Lambda(s) L(s, f x conj(psi)) up to tails that are negligible once c
is past 2 (plus a margin, see ``choose_c``).  To get L(s, f x chi) the sums
run with psi = conj(chi).  The t-integral is discretised on cells of length
h with the Taylor rule int_0^h G(t_x + u) du = sum_l G^{(l)}(t_x) h^{l+1}/(l+1)!,
and the derivatives come from the orbit sums, which return all orders at once.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from . import counters
from .dirichlet import DirichletCharacter, gauss_sum, split_character
from .errors import GammaPole, NonPrimitiveCharacter, ProviderFailure
from .forms import CuspForm
from .numerics import csum, gamma
from .orbit_sum import SumRequest, fast_orbit_sums, naive_orbit_sums

KAPPA = 3.0
ORDER_CAP = 6


class Route(str, Enum):
    STANDARD = "standard"
    DX_VARIANT = "dx_variant"
    ZERO = "zero"


@dataclass(frozen=True)
class PrecisionConfig:
    """Accuracy knobs.

    ``order_cap`` bounds N'; the discretisation accuracy lost by the cap is
    recovered with the grid refinement ``refine`` (cells of length
    q^{-eps}/refine), chosen automatically when left as None.
    """

    gamma_prec: float = 4.0
    eps: float = 0.25
    s: complex = 0.5
    kappa: float = KAPPA
    order_cap: int = ORDER_CAP
    refine: int | None = None
    c: float | None = None
    mode: str = "taylor"  # or "gauss"
    gauss_nodes: int = 8

    def __post_init__(self):
        if not 0 < self.eps <= 0.5:
            raise ValueError("eps must lie in (0, 1/2]")
        if self.gamma_prec <= 0:
            raise ValueError("gamma_prec must be positive")
        if not 0 <= self.order_cap <= 12:
            raise ValueError("order_cap must lie in [0, 12]")
        if self.mode not in ("taylor", "gauss"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def n_prime(self) -> int:
        return min(self.order_cap, math.ceil(self.kappa * (1 + self.gamma_prec) / self.eps))


def choose_c(q: int, eps: float, c_floor: float = 2.0) -> float:
    """Smallest c > c_floor with c q^eps log q an integer."""
    if q < 2:
        raise ValueError("q must be at least 2")
    X = q**eps * math.log(q)
    return (math.floor(c_floor * X) + 1) / X


def cusp_height(form: CuspForm, gamma_prec: float) -> float:
    """A height Y beyond which |f~| ~ Y^{k/2+1} e^{-2 pi Y} drops below
    10^{-(gamma_prec + 2)}; sets the lower window edge via y' = 1/(q^2 y)."""
    target = -(gamma_prec + 2) * math.log(10)
    Y = 1.0
    while (form.weight / 2 + 1) * math.log(Y) - 2 * math.pi * Y > target:
        Y += 0.05
    return Y


def c_floor_for(form: CuspForm, q: int, gamma_prec: float) -> float:
    return 2.0 + math.log(cusp_height(form, gamma_prec)) / math.log(q)


@dataclass(frozen=True)
class AssemblyConstants:
    q: int
    c: float
    n: int  # c q^eps log q
    refine: int
    h: float
    n_prime: int
    d: tuple  # d_l = h^{l+1}/(l+1)!
    C1: float  # C' = q^{c |Re(s - 1/2)|}

    @property
    def grid(self) -> range:
        return range(-self.n * self.refine, self.n * self.refine)

    def t_of(self, x: int) -> float:
        return x * self.h


def auto_refine(form: CuspForm, q: int, cfg: PrecisionConfig) -> int:
    """Cells short enough that (R h)^{N'+1}/(N'+1)! <= 10^{-(gamma+2)}."""
    m = cfg.n_prime + 1
    h_max = (10.0 ** (-(cfg.gamma_prec + 2)) * math.factorial(m)) ** (1 / m) / form.derivative_bound
    return max(1, math.ceil(q ** (-cfg.eps) / h_max))


def assembly_constants(form: CuspForm, q: int, cfg: PrecisionConfig) -> AssemblyConstants:
    c = cfg.c if cfg.c is not None else choose_c(q, cfg.eps, c_floor_for(form, q, cfg.gamma_prec))
    X = q**cfg.eps * math.log(q)
    n = round(c * X)
    if abs(n - c * X) > 1e-9 * max(1.0, n):
        raise ValueError("c q^eps log q must be an integer")
    refine = cfg.refine or auto_refine(form, q, cfg)
    h = q ** (-cfg.eps) / refine
    Np = cfg.n_prime
    d = tuple(h ** (l + 1) / math.factorial(l + 1) for l in range(Np + 1))
    C1 = q ** (c * abs((complex(cfg.s) - 0.5).real))
    return AssemblyConstants(q, c, n, refine, h, Np, d, C1)


def parity_route(form: CuspForm, chi: DirichletCharacter) -> Route:
    if form.is_holomorphic or chi.parity == 1:
        return Route.STANDARD
    return Route.DX_VARIANT


def standard_prefactor(chi: DirichletCharacter) -> int:
    """1 + chi(-1): the factor multiplying the even Maass identity."""
    return 1 + chi.parity


def mellin_factor(form: CuspForm, psi: DirichletCharacter, s: complex, route: Route) -> complex:
    """Lambda with I(s) = Lambda L(s, f x conj(psi)) (untruncated integrals)."""
    s = complex(s)
    tau = gauss_sum(psi)
    if form.is_holomorphic:
        w = s + (form.weight - 1) / 2
        return tau * gamma(w) / (2 * math.pi) ** w
    r = form.r
    if route == Route.STANDARD:
        gg = gamma((s + 1j * r) / 2) * gamma((s - 1j * r) / 2)
        return tau * standard_prefactor(psi) * gg / (4 * cmath.exp(s * math.log(math.pi)))
    gg = gamma((s + 1 + 1j * r) / 2) * gamma((s + 1 - 1j * r) / 2)
    return 1j * tau * (1 - psi.parity) * gg / (2 * cmath.exp(s * math.log(math.pi)))


# -- providers -----------------------------------------------------------------

Provider = Callable[[float], np.ndarray]  # t -> S_m(t) for m = 0..N'


def naive_provider(form: CuspForm, psi: DirichletCharacter, n_prime: int, dx: bool) -> Provider:
    q = psi.modulus
    return lambda t: naive_orbit_sums(form, psi, q, t, n_prime, dx)


@dataclass
class FastProvider:
    form: CuspForm
    psi: DirichletCharacter
    M: int
    N: int
    n_prime: int
    dx: bool
    eps: float
    gamma_prec: float
    threads: int | None = None
    max_residual: float = 0.0

    def __post_init__(self):
        self.split = split_character(self.psi, self.M, self.N)

    def __call__(self, t: float) -> np.ndarray:
        res = fast_orbit_sums(
            SumRequest(
                self.form, self.split, t, self.n_prime, self.eps, self.gamma_prec + 2,
                dx=self.dx, threads=self.threads,
            )
        )
        self.max_residual = max(self.max_residual, res.max_residual)
        return res.values


# -- assembly --------------------------------------------------------------------


def _leibniz(alpha: complex, n_prime: int) -> np.ndarray:
    """W[l, m] = binom(l, m) alpha^{l - m}: d^l[G e^{alpha t}] = e^{alpha t} sum_m W[l, m] G^{(m)}."""
    W = np.zeros((n_prime + 1, n_prime + 1), dtype=complex)
    for l in range(n_prime + 1):
        for m in range(l + 1):
            W[l, m] = math.comb(l, m) * alpha ** (l - m)
    return W


def discretized_integral(
    consts: AssemblyConstants,
    cfg: PrecisionConfig,
    provider: Provider,
) -> tuple[complex, float]:
    """Sum over grid cells and orders l <= N' of d_l d_t^l[G e^{alpha t}]/C'.

    Returns the bracket and an estimate of the discretisation error (the
    size of the last retained order).
    """
    alpha = complex(cfg.s) - 0.5
    Np = consts.n_prime
    W = _leibniz(alpha, Np)
    d = np.array(consts.d)
    terms, top = [], []
    if cfg.mode == "gauss":
        nodes, weights = np.polynomial.legendre.leggauss(cfg.gauss_nodes)
        u = (nodes + 1) / 2 * consts.h
        wts = weights / 2 * consts.h
    for x in consts.grid:
        t0 = consts.t_of(x)
        if cfg.mode == "gauss":
            for ui, wi in zip(u, wts):
                S = _call(provider, t0 + ui)
                terms.append(wi * cmath.exp(alpha * (t0 + ui)) * S[0] / consts.C1)
            continue
        S = _call(provider, t0)
        derivs = W @ S[: Np + 1]  # d_t^l [G e^{alpha t}] e^{-alpha t}
        scale = cmath.exp(alpha * t0) / consts.C1
        layer = d * derivs * scale
        terms.extend(layer.tolist())
        top.append(abs(layer[-1]))
    err = math.fsum(top) if top else 0.0
    return csum(terms), err


def _call(provider: Provider, t: float) -> np.ndarray:
    try:
        out = np.asarray(provider(t), dtype=complex)
    except Exception as exc:  # surfaced with the grid point attached
        raise ProviderFailure(f"provider failed at t={t:.6g}: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise ProviderFailure(f"non-finite provider output at t={t:.6g}")
    return out


@dataclass
class LValue:
    value: complex
    err_estimate: float
    route: Route
    constants: AssemblyConstants
    bracket: complex
    factor: complex  # C'' = C' / Lambda
    counts: dict = field(default_factory=dict)


def assemble_L(
    form: CuspForm,
    chi: DirichletCharacter,
    cfg: PrecisionConfig = PrecisionConfig(),
    engine: str = "fast",
    split: tuple[int, int] | None = None,
    threads: int | None = None,
    route: Route | None = None,
) -> LValue:
    """L(s, f x chi) through the geometric approximate functional equation."""
    if not chi.primitive:
        raise NonPrimitiveCharacter(f"chi_{chi.modulus}({chi.label}, .) is not primitive")
    q = chi.modulus
    psi = chi.conj()
    route = route or parity_route(form, chi)
    consts = assembly_constants(form, q, cfg)
    lam = mellin_factor(form, psi, cfg.s, route)
    if lam == 0:
        raise GammaPole("the identity degenerates: zero prefactor on this route")
    dx = route == Route.DX_VARIANT
    Np = consts.n_prime
    if engine == "naive":
        provider: Provider = naive_provider(form, psi, Np, dx)
    elif engine == "fast":
        M, N = split if split is not None else suggest_split(q)
        provider = FastProvider(form, psi, M, N, Np, dx, cfg.eps, cfg.gamma_prec, threads)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    counter = counters.EvalCounter()
    with counters.counting(counter):
        bracket, disc_err = discretized_integral(consts, cfg, provider)
    factor = consts.C1 / lam
    value = factor * bracket
    resid = getattr(provider, "max_residual", 0.0)
    err = abs(factor) * (disc_err + resid * len(consts.grid) * consts.h) + 10.0 ** (-cfg.gamma_prec) * abs(value)
    return LValue(value, err, route, consts, bracket, factor, counter.snapshot())


def suggest_split(q: int) -> tuple[int, int]:
    """Divisor pair (M, N) with M <= N and M1 | N minimising M^5 + N."""
    from .dirichlet import factorize

    best = (1, q)
    best_cost = 1 + q
    for M in range(2, q + 1):
        if q % M:
            continue
        N = q // M
        if M > N:
            break
        shared = {p for p, _ in factorize(math.gcd(M, N))}
        M1 = math.prod(p**e for p, e in factorize(M) if p in shared)
        if N % M1:
            continue
        cost = M**5 + N
        if cost < best_cost:
            best, best_cost = (M, N), cost
    return best
