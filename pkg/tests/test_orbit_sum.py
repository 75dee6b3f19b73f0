import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistl import counters
from twistl.dirichlet import char_from_label, primitive_labels, split_character
from twistl.errors import MissingOrder, NonInvertibleResidue, NonPrimitiveCharacter, OrderTooHigh, TooFar
from twistl.forms import MultiIndex
from twistl.hecke import HeckeIndex, index_set, permutation
from twistl.numerics import e
from twistl.orbit_sum import (
    OrbitWeightFunction,
    SumRequest,
    box_side,
    fast_orbit_sums,
    h_divides,
    h_for_split,
    h_mixed,
    naive_orbit_sums,
    stencil_from_offsets,
    taylor_stencil,
    taylor_transfer,
    transfer_degree,
)
from twistl.sl2 import IwasawaCoords, a_mat, n_mat


def _split(q, M, N, which=0):
    labs = primitive_labels(q)
    return split_character(char_from_label(q, labs[which % len(labs)]), M, N)


@pytest.mark.parametrize("q,M,N", [(48, 4, 12), (60, 6, 10), (15, 3, 5), (36, 6, 6), (360, 8, 45)])
def test_weights_reproduce_character(q, M, N):
    # chi_{M1 N}(j) h_j(1, k) = chi(j + kN) for every unit j mod N and k mod M
    for lab in primitive_labels(q):
        split = _split(q, M, N, primitive_labels(q).index(lab))
        for j in range(1, N):
            if math.gcd(j, N) != 1:
                continue
            h = h_for_split(split, j)
            for k in range(M):
                assert split.chi_M1N(j) * h(HeckeIndex(1, k)) == pytest.approx(split.chi(j + k * N), abs=1e-12)


def test_h_divides_and_errors():
    h = h_divides(1, 4, 3)
    assert h(HeckeIndex(1, 1)) == pytest.approx(e(3 / 4))
    assert h(HeckeIndex(2, 0)) == 0
    with pytest.raises(NonInvertibleResidue):
        h_divides(1, 4, 2)
    with pytest.raises(NonInvertibleResidue):
        h_mixed(1, 2, char_from_label(3, 2), 6, 4)


def test_compose_inverse_moves_support():
    h = h_divides(1, 4, 1)
    perm = permutation(4, (1, 1, 0, 1))
    r = h.compose_inverse(perm)
    for p in h.support():
        assert r(perm(p)) == h(p)
    assert len(r.support()) == len(h.support())


def test_stencil_errors():
    x = n_mat(0.0)
    with pytest.raises(TooFar):
        taylor_stencil(x, n_mat(0.5), 4, eta=0.1)
    st_ = stencil_from_offsets(IwasawaCoords(0.01, 0.0, 0.0), 2)
    with pytest.raises(MissingOrder):
        taylor_transfer(st_, {MultiIndex(): 1.0})


def test_stencil_coefficients():
    st_ = stencil_from_offsets(IwasawaCoords(0.1, 0.2, 0.3), 3)
    assert st_.coefficients[MultiIndex(1, 1, 1)] == pytest.approx(0.1 * 0.2 * 0.3)
    assert st_.coefficients[MultiIndex(0, 2, 0)] == pytest.approx(0.04 / 2)
    assert st_.coefficients[MultiIndex(3, 0, 0)] == pytest.approx(0.001 / 6)


@settings(max_examples=12, deadline=None)
@given(st.sampled_from([(15, 3, 5), (36, 6, 6), (16, 4, 4), (60, 6, 10)]), st.floats(-6.0, 1.0), st.integers(0, 3))
def test_fast_matches_naive(delta, case, t, which):
    q, M, N = case
    split = _split(q, M, N, which)
    fast = fast_orbit_sums(SumRequest(delta, split, t, l=2, threads=1)).values
    naive = naive_orbit_sums(delta, split.chi, q, t, 2)
    assert np.all(np.abs(fast - naive) <= 1e-6 * (1 + np.abs(naive)))
    # the relative error is also small; the absolute bound above is loose for Delta
    assert np.max(np.abs(fast - naive)) <= 1e-7 * max(1e-12, np.max(np.abs(naive))) + 1e-15


def test_dx_route_sums(delta):
    split = _split(36, 6, 6)
    fast = fast_orbit_sums(SumRequest(delta, split, -1.0, l=1, dx=True, threads=1)).values
    naive = naive_orbit_sums(delta, split.chi, 36, -1.0, 1, dx=True)
    np.testing.assert_allclose(fast, naive, rtol=1e-8, atol=1e-14)


def test_trivial_split_is_the_direct_sum(delta):
    split = _split(5, 1, 5)
    fast = fast_orbit_sums(SumRequest(delta, split, -0.7, l=1, threads=1)).values
    naive = naive_orbit_sums(delta, split.chi, 5, -0.7, 1)
    assert np.array_equal(fast, naive)


def test_disabling_cache_costs_more(delta):
    # boxes here hold points with several weight ids, so jets get shared
    split = _split(2520, 8, 315)
    counts = {}
    for cache in (True, False):
        with counters.counting() as c:
            fast_orbit_sums(SumRequest(delta, split, -2.0, cache=cache, threads=1))
        counts[cache] = c.lift_derivative_evals
    assert counts[False] > counts[True]


def test_thread_count_does_not_change_bits(delta):
    split = _split(360, 8, 45)
    ref = fast_orbit_sums(SumRequest(delta, split, -3.0, l=2, threads=1)).values
    for n in (2, 3, 8):
        assert np.array_equal(fast_orbit_sums(SumRequest(delta, split, -3.0, l=2, threads=n)).values, ref)


def test_request_validation(delta):
    chi = char_from_label(36, 5)  # not primitive
    with pytest.raises(NonPrimitiveCharacter):
        fast_orbit_sums(SumRequest(delta, split_character(chi, 6, 6), 0.0))
    split = _split(36, 6, 6)
    with pytest.raises(OrderTooHigh):
        fast_orbit_sums(SumRequest(delta, split, 0.0, l=13))
    with pytest.raises(OrderTooHigh):
        fast_orbit_sums(SumRequest(delta, split, 0.0, l=6, d=8))


def test_box_side_and_degree(delta):
    assert box_side(delta, 10**6, 0.25) <= 10**6 ** -0.25
    ds = [transfer_degree(delta, eta, 8.0, 0) for eta in (0.001, 0.01, 0.05)]
    assert ds == sorted(ds)
    assert transfer_degree(delta, 0.05, 8.0, 4) <= 12 - 4
