import math
import os

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from twistl.assembly import (
    PrecisionConfig,
    Route,
    assemble_L,
    assembly_constants,
    choose_c,
    mellin_factor,
    parity_route,
    standard_prefactor,
    suggest_split,
)
from twistl.dirichlet import char_from_label, primitive_labels, split_character
from twistl.errors import GammaPole, NonPrimitiveCharacter
from twistl.forms import delta_coefficients
from twistl.numerics import bessel_k_ir


@given(st.integers(2, 10**6), st.sampled_from([0.1, 0.25, 0.5]), st.floats(2.0, 4.0))
def test_choose_c_is_minimal(q, eps, floor):
    c = choose_c(q, eps, floor)
    X = q**eps * math.log(q)
    n = round(c * X)
    assert abs(c * X - n) < 1e-9 * n
    assert c > floor and (n - 1) / X <= floor


def test_config_validation():
    with pytest.raises(ValueError):
        PrecisionConfig(eps=0.0)
    with pytest.raises(ValueError):
        PrecisionConfig(gamma_prec=-1)
    with pytest.raises(ValueError):
        PrecisionConfig(order_cap=13)
    assert PrecisionConfig(gamma_prec=4, eps=0.25).n_prime == 6


def test_constants(delta):
    k = assembly_constants(delta, 16, PrecisionConfig())
    assert k.c > 2
    assert len(k.grid) == 2 * k.n * k.refine
    assert k.d[0] == pytest.approx(k.h) and k.d[2] == pytest.approx(k.h**3 / 6)
    assert k.C1 == 1.0  # s on the critical line


def _series(chi, s, n_terms=2000):
    tau = np.array([float(c) for c in delta_coefficients(n_terms)])
    n = np.arange(1, n_terms + 1)
    return np.sum(tau * chi.values(n) * n ** (-(s + 5.5)))


@pytest.mark.parametrize("engine", ["naive", "fast"])
@pytest.mark.parametrize("q", [5, 16])
def test_matches_dirichlet_series_at_s3(delta, q, engine):
    chi = char_from_label(q, primitive_labels(q)[0])
    got = assemble_L(delta, chi, PrecisionConfig(s=3.0), engine=engine, threads=1)
    ref = _series(chi, 3.0)
    assert abs(got.value - ref) <= 1e-8 * abs(ref)
    assert got.err_estimate < 1e-3 * abs(ref)


def test_complex_s_off_line(delta):
    chi = char_from_label(7, 3)
    s = complex(2.5, 1.5)
    got = assemble_L(delta, chi, PrecisionConfig(s=s), engine="naive")
    assert abs(got.value - _series(chi, s, 3000)) <= 1e-6 * abs(got.value)


def test_grid_refinement_converges(delta):
    chi = char_from_label(16, 3)
    a = assemble_L(delta, chi, PrecisionConfig(refine=4), engine="naive").value
    b = assemble_L(delta, chi, PrecisionConfig(refine=8), engine="naive").value
    assert abs(a - b) <= 1e-6 * abs(b)


def test_gauss_mode_agrees(delta):
    chi = char_from_label(5, 2)
    a = assemble_L(delta, chi, PrecisionConfig(), engine="naive").value
    b = assemble_L(delta, chi, PrecisionConfig(mode="gauss", refine=2), engine="naive").value
    assert abs(a - b) <= 1e-6 * abs(a)


def test_non_primitive_rejected(delta):
    with pytest.raises(NonPrimitiveCharacter):
        assemble_L(delta, char_from_label(9, 8), engine="naive")  # induced from mod 3


def test_suggest_split():
    for q in (16, 36, 360, 2520, 7776, 97):
        M, N = suggest_split(q)
        assert M * N == q and M <= N
        split_character(char_from_label(q, 1), M, N)  # admissible
    assert suggest_split(97) == (1, 97)


# -- even Maass routing and Gamma shifts ---------------------------------------


def _series_maass(form, x, y, dx):
    out = 0.0
    for n, c in enumerate(form.coefficients[:3].real, start=1):
        w = 2 * math.pi * n
        base = c * 2 * math.sqrt(n * y) * bessel_k_ir(form.r, w * y)
        out += base * (-w * math.sin(w * x) * y if dx else math.cos(w * x))
    return out


@pytest.mark.parametrize("q", [5, 7])
def test_maass_mellin_factors(synthetic_maass, q):
    """The route's Lambda turns the window integral of the finite series into
    its (finite) L-series; the dx route carries the shifted Gamma factors."""
    form, s = synthetic_maass, 1.7
    for lab in primitive_labels(q):
        chi = char_from_label(q, lab)
        psi = chi.conj()
        route = parity_route(form, chi)
        dx = route == Route.DX_VARIANT
        total = 0j
        for j in range(1, q):
            g = lambda t: _series_maass(form, j / q, math.exp(t), dx) * math.exp(t * (s - 0.5))
            val, _ = integrate.quad(g, -12, 3, limit=800, epsabs=1e-13)
            total += psi(j) * val
        L = sum(c * chi(n) * n ** (0.5 - s) for n, c in enumerate(form.coefficients[:3].real, start=1))
        ratio = total / (mellin_factor(form, psi, s, route) * L)
        assert ratio == pytest.approx(1.0, abs=1e-8)


def test_parity_routing(synthetic_maass, delta):
    odd = char_from_label(5, 2)
    even = char_from_label(5, 4)
    assert odd.parity == -1 and even.parity == 1
    assert standard_prefactor(odd) == 0
    assert parity_route(synthetic_maass, odd) == Route.DX_VARIANT
    assert parity_route(synthetic_maass, even) == Route.STANDARD
    assert parity_route(delta, odd) == Route.STANDARD
    assert mellin_factor(synthetic_maass, odd.conj(), 0.5, Route.STANDARD) == 0
    with pytest.raises(GammaPole):
        assemble_L(synthetic_maass, odd, engine="naive", route=Route.STANDARD)
    out = assemble_L(synthetic_maass, odd, PrecisionConfig(gamma_prec=3), engine="naive")
    assert out.route == Route.DX_VARIANT and np.isfinite(out.value)


@pytest.mark.skipif("TWISTL_MAASS_FILE" not in os.environ, reason="set TWISTL_MAASS_FILE to a maass-even coefficient file")
def test_maass_end_to_end_from_file():
    from twistl.forms import load_maass
    from twistl.oracle import direct_integral_L

    form = load_maass(os.environ["TWISTL_MAASS_FILE"])
    for chi in (char_from_label(5, 4), char_from_label(5, 2)):  # even and odd
        cfg = PrecisionConfig(gamma_prec=3)
        fast = assemble_L(form, chi, cfg, engine="fast").value
        naive = assemble_L(form, chi, cfg, engine="naive").value
        direct = direct_integral_L(form, chi, 0.5, 3)
        for a, b in ((fast, naive), (naive, direct)):
            assert abs(a - b) <= 1e-3 * abs(b)
