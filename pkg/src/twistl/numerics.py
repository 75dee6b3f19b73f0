"""Small numerical helpers: exact-rounded complex sums, Gamma, and K_{ir}."""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable

import numpy as np
from scipy import special

from .errors import DomainError, GammaPole


def csum(values: Iterable[complex]) -> complex:
    """Correctly rounded sum of complex numbers.

    ``math.fsum`` is exact up to the final rounding, so the result does not
    depend on summation order; this is what makes reductions reproducible
    regardless of how work was scheduled.
    """
    re: list[float] = []
    im: list[float] = []
    for v in values:
        v = complex(v)
        re.append(v.real)
        im.append(v.imag)
    return complex(math.fsum(re), math.fsum(im))


def csum_array(arr: np.ndarray) -> complex:
    arr = np.asarray(arr, dtype=complex).ravel()
    return complex(math.fsum(arr.real.tolist()), math.fsum(arr.imag.tolist()))


def e(x: float) -> complex:
    """exp(2 pi i x)."""
    return complex(math.cos(2 * math.pi * x), math.sin(2 * math.pi * x))


def gamma(z: complex) -> complex:
    z = complex(z)
    if z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real):
        raise GammaPole(f"Gamma has a pole at {z}")
    return complex(np.exp(special.loggamma(z)))


# Trapezoid rule on K_{iv}(y) = int_0^inf exp(-y cosh t) cos(v t) dt.  The
# integrand is entire and decays doubly exponentially, so the plain
# trapezoid sum converges geometrically in 1/h.
_K_STEP = 0.01


@lru_cache(maxsize=64)
def _k_nodes(y_lo: float) -> tuple[np.ndarray, np.ndarray]:
    upper = math.acosh(max(1.0, 760.0 / y_lo)) + 1.0
    n = int(math.ceil(upper / _K_STEP))
    t = np.arange(n + 1) * _K_STEP
    w = np.full(t.shape, _K_STEP)
    w[0] *= 0.5
    return t, w


def bessel_k_ir_derivatives(r: float, y, order: int = 0) -> np.ndarray:
    """Derivatives d^p/dy^p K_{ir}(y) for p = 0..order.

    ``y`` may be an array; the result has shape ``(order + 1,) + shape(y)``.
    """
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DomainError("K_{ir}(y) requires y > 0")
    y_lo = float(2.0 ** math.floor(math.log2(float(y.min()))))
    t, w = _k_nodes(y_lo)
    ch = np.cosh(t)
    base = w * np.cos(r * t)
    flat = y.ravel()
    expo = np.exp(-np.outer(flat, ch))  # (ny, nt)
    out = np.empty((order + 1, flat.size))
    powc = np.ones_like(ch)
    for p in range(order + 1):
        out[p] = expo @ (base * powc)
        powc = powc * (-ch)
    return out.reshape((order + 1,) + y.shape)


def bessel_k_ir(r: float, y: float) -> float:
    """K_{ir}(y) for real r and y > 0."""
    if y <= 0:
        raise DomainError("K_{ir}(y) requires y > 0")
    return float(bessel_k_ir_derivatives(r, np.array([y]), 0)[0, 0])
