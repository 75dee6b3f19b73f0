"""Independent O(q) checks: direct Mellin integrals, truncation tails, and the
scaling report used for the complexity claim."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from . import counters
from .assembly import (
    PrecisionConfig,
    Route,
    c_floor_for,
    choose_c,
    mellin_factor,
    parity_route,
)
from .dirichlet import DirichletCharacter, char_from_label, primitive_labels, split_character
from .errors import NonPrimitiveCharacter, QuadratureError, TooLarge
from .forms import CuspForm, MultiIndex, eval_point, lift_derivative, lift_eval, sup_norm
from .numerics import csum
from .orbit_sum import SumRequest, fast_orbit_sums, naive_orbit_sum
from .sl2 import orbit_point

Q_GUARD = 100_000


def _quad_complex(fn, a: float, b: float, tol: float, points=None) -> complex:
    out = []
    for part in (lambda t: fn(t).real, lambda t: fn(t).imag):
        val, err = integrate.quad(part, a, b, epsabs=tol, epsrel=1e-12, limit=400, points=points)
        if not err <= 100 * max(tol, 1e-12 * abs(val)):
            raise QuadratureError(f"quadrature error estimate {err:.3g} on [{a:.3g}, {b:.3g}]")
        out.append(val)
    return complex(out[0], out[1])


def _integrand(form: CuspForm, q: int, j: int, alpha: complex, dx: bool):
    if dx:
        beta = MultiIndex(1, 0, 0)
        return lambda t: lift_derivative(form, orbit_point(q, j, t), beta) * np.exp(alpha * t)
    return lambda t: lift_eval(form, orbit_point(q, j, t)) * np.exp(alpha * t)


def direct_integral_L(
    form: CuspForm,
    chi: DirichletCharacter,
    s: complex = 0.5,
    gamma_prec: float = 4.0,
    c: float | None = None,
    route: Route | None = None,
) -> complex:
    """L(s, f x chi) from per-j adaptive quadrature of the window integrals.

    Shares nothing with the orbit machinery or the Taylor discretisation;
    only the lift evaluation and the Mellin constant are common.
    """
    q = chi.modulus
    if q > Q_GUARD:
        raise TooLarge(f"q = {q} above the O(q) oracle guard {Q_GUARD}")
    if not chi.primitive:
        raise NonPrimitiveCharacter(f"chi_{q}({chi.label}, .) is not primitive")
    psi = chi.conj()
    route = route or parity_route(form, chi)
    dx = route == Route.DX_VARIANT
    c = c if c is not None else choose_c(q, 0.25, c_floor_for(form, q, gamma_prec))
    T = c * math.log(q)
    alpha = complex(s) - 0.5
    tol = 10.0 ** (-(gamma_prec + 6))
    # the integrand lives where the orbit point is not deep in a cusp
    breaks = [-2 * math.log(q), -math.log(q), 0.0, 1.0]
    total = []
    for j in range(q):
        if math.gcd(j, q) != 1:
            continue
        fn = _integrand(form, q, j, alpha, dx)
        total.append(psi(j) * _quad_complex(fn, -T, T, tol, points=[b for b in breaks if -T < b < T]))
    return csum(total) / mellin_factor(form, psi, s, route)


def reflect_lift(form: CuspForm, n: int, q: int, t: float) -> complex:
    """f~(n(n/q) a(t)) through f(n/q + iy) = (qiy)^{-k} f(n'/q + i/(q^2 y)),
    n n' = -1 mod q.  Accurate for tiny y, where the image is high in the cusp."""
    k = form.weight
    n2 = (-pow(n, -1, q)) % q
    Y = math.exp(-t) / q**2
    z = complex(n2 / q, Y)
    return (1j) ** (-k) * Y ** (k / 2) * eval_point(form, z)


def direct_lift(form: CuspForm, n: int, q: int, t: float) -> complex:
    """f~(n(n/q) a(t)) straight from the Fourier series, no reduction."""
    y = math.exp(t)
    return y ** (form.weight / 2) * eval_point(form, complex(n / q, y))


def reflection_residual(form: CuspForm, q: int, n: int, y: float) -> float:
    """Relative gap between the two sides of the reflection identity at n/q + iy.

    Points that land deep in a cusp have values near 1e-17, where a relative
    gap only measures round-off; the denominator is floored at 1e-4 sup|f~|.
    """
    t = math.log(y)
    lhs = direct_lift(form, n, q, t)
    rhs = reflect_lift(form, n, q, t)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-4 * sup_norm(form))


def truncation_check(
    form: CuspForm, q: int, c1: float, c2: float, s: complex = 0.5, samples: int = 8, seed: int = 0
) -> float:
    """max over sampled n coprime to q of |I(c1) - I(c2)| for
    I(c) = int_{q^-c}^{q^c} f(n/q + iy) y^{s + (k-3)/2} dy.

    The difference is integrated directly over the two tails; the lower one
    uses the reflection formula."""
    if not 2 < c1 < c2:
        raise ValueError("need 2 < c1 < c2")
    units = [n for n in range(1, q) if math.gcd(n, q) == 1]
    rng = np.random.default_rng(seed)
    picks = sorted(rng.choice(units, size=min(samples, len(units)), replace=False).tolist())
    alpha = complex(s) - 0.5
    L = math.log(q)
    worst = 0.0
    for n in picks:
        low = _quad_complex(
            lambda t: reflect_lift(form, n, q, t) * np.exp(alpha * t), -c2 * L, -c1 * L, 1e-16
        )
        high = _quad_complex(
            lambda t: direct_lift(form, n, q, t) * np.exp(alpha * t), c1 * L, c2 * L, 1e-16
        )
        worst = max(worst, abs(low) + abs(high))
    return worst


# -- scaling report ----------------------------------------------------------------


CSV_HEADER = [
    "q", "M", "N", "time_ms", "lift_evals", "lift_deriv_evals", "char_evals",
    "fast_re", "fast_im", "naive_re", "naive_im", "rel_dev",
]


@dataclass
class BenchRow:
    q: int
    M: int
    N: int
    time_ms: float
    lift_evals: int
    lift_deriv_evals: int
    char_evals: int
    fast_re: float
    fast_im: float
    naive_re: float | None
    naive_im: float | None
    rel_dev: float | None

    @property
    def evals_per_q(self) -> float:
        return self.lift_evals / self.q


@dataclass
class BenchReport:
    rows: list = field(default_factory=list)
    tolerance: float = 1e-6

    @property
    def passed(self) -> bool:
        return all(r.rel_dev is None or r.rel_dev <= self.tolerance for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow(["" if getattr(r, h) is None else repr(getattr(r, h)) for h in CSV_HEADER])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {"tolerance": self.tolerance, "passed": self.passed, "rows": [asdict(r) for r in self.rows]},
            indent=2,
            sort_keys=True,
        )


@dataclass(frozen=True)
class BenchConfig:
    t: float = 0.0
    l: int = 0
    eps: float = 0.25
    gamma_prec: float = 8.0
    naive_limit: int = 20_000
    threads: int | None = 1


def first_primitive(q: int) -> DirichletCharacter:
    labels = primitive_labels(q)
    if not labels:
        raise NonPrimitiveCharacter(f"no primitive character mod {q}")
    return char_from_label(q, labels[0])


def scaling_report(
    cases: list, form: CuspForm, cfg: BenchConfig = BenchConfig(), tolerance: float = 1e-6
) -> BenchReport:
    """Fast (and, below ``naive_limit``, naive) orbit sums for each (q, M, N)."""
    report = BenchReport(tolerance=tolerance)
    for q, M, N in cases:
        chi = first_primitive(q)
        split = split_character(chi, M, N)
        req = SumRequest(form, split, cfg.t, cfg.l, cfg.eps, cfg.gamma_prec, threads=cfg.threads)
        t0 = time.perf_counter()
        with counters.counting() as cnt:
            fast = complex(fast_orbit_sums(req).values[cfg.l])
        ms = (time.perf_counter() - t0) * 1000
        snap = cnt.snapshot()
        naive = None
        if q <= cfg.naive_limit:
            naive = naive_orbit_sum(form, chi, q, cfg.t, cfg.l)
        dev = abs(fast - naive) / (1 + abs(naive)) if naive is not None else None
        report.rows.append(
            BenchRow(
                q, M, N, round(ms, 3), snap["lift_evals"], snap["lift_derivative_evals"],
                snap["char_evals"], fast.real, fast.imag,
                None if naive is None else naive.real, None if naive is None else naive.imag, dev,
            )
        )
    return report


def nearest_divisor_split(q: int, power: float = 1 / 6) -> tuple[int, int]:
    """(M, N) with M the divisor of q nearest q^power (ties to the smaller)."""
    target = q**power
    divs = [m for m in range(1, q + 1) if q % m == 0]
    M = min(divs, key=lambda m: (abs(m - target), m))
    return M, q // M
