import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistl.errors import NonUnimodular
from twistl.sl2 import (
    GroupElement,
    IwasawaCoords,
    a_mat,
    box_sort,
    from_iwasawa,
    in_neighborhood,
    int_act,
    int_det,
    int_inv,
    int_mul,
    iwasawa_decompose,
    k_mat,
    n_mat,
    offset_coords,
    orbit_point,
    random_sl2z,
    reduce,
)

coord = st.floats(-3, 3, allow_nan=False)
angle = st.floats(-3.1, 3.1, allow_nan=False)


@given(coord, coord, angle)
def test_iwasawa_roundtrip(t, v, th):
    g = n_mat(t) @ a_mat(v) @ k_mat(th)
    c = iwasawa_decompose(g)
    assert c.t == pytest.approx(t, abs=1e-9)
    assert c.v == pytest.approx(v, abs=1e-9)
    assert c.theta == pytest.approx(th, abs=1e-9)
    assert from_iwasawa(c).close_to(g, 1e-9)


def test_point_and_lift_convention():
    g = n_mat(0.3) @ a_mat(math.log(2.0))
    assert g.point() == pytest.approx(0.3 + 2j)


def test_non_unimodular_rejected():
    with pytest.raises(NonUnimodular):
        iwasawa_decompose(GroupElement(2.0, 0.0, 0.0, 1.0))


@given(st.integers(0, 2**32 - 1))
def test_random_sl2z_has_det_one(seed):
    m = random_sl2z(np.random.default_rng(seed))
    assert int_det(m) == 1
    assert int_mul(m, int_inv(m)) == (1, 0, 0, 1)


@settings(max_examples=200)
@given(st.floats(-20, 20), st.floats(-8, 4), angle)
def test_reduce_lands_in_fundamental_domain(t, v, th):
    g = n_mat(t) @ a_mat(v) @ k_mat(th)
    red = reduce(g)
    z = red.x.point()
    assert abs(z.real) <= 0.5 + 1e-9
    assert abs(z) >= 1 - 1e-9
    assert int_det(red.gamma) == 1
    assert int_act(red.gamma, red.x).close_to(g, 1e-6 * max(1.0, *map(abs, g.entries())))
    c = red.coords
    assert abs(c.t) <= 0.5 + 1e-9 and c.v >= -1.0


def test_orbit_point_matches_factorisation():
    g = orbit_point(36, 5, -1.25)
    assert g.close_to(n_mat(5 / 36) @ a_mat(-1.25), 1e-14)


def test_offset_coords_recover_right_translation():
    x = n_mat(0.2) @ a_mat(0.4) @ k_mat(1.0)
    o = offset_coords(x, x @ n_mat(0.003) @ a_mat(-0.002) @ k_mat(0.001))
    assert (o.t, o.v, o.theta) == pytest.approx((0.003, -0.002, 0.001), abs=1e-12)
    assert in_neighborhood(x, x @ n_mat(0.003), 0.01)
    assert not in_neighborhood(x, x @ n_mat(0.05), 0.01)


def test_box_sort_groups_and_representatives(rng):
    pts = [reduce(orbit_point(97, j, -2.0), index=j) for j in range(1, 97)]
    eta = 0.1
    part = box_sort(pts, eta)
    assert sum(len(m) for m in part.boxes.values()) == len(pts)
    for rep, members in zip(part.representatives, part.boxes.values()):
        assert rep == min(members, key=lambda i: pts[i].index)
        for i in members:
            assert in_neighborhood(pts[rep].x, pts[i].x, 2 * eta)
    with pytest.raises(ValueError):
        box_sort(pts, 0.0)


def test_random_same_box_pairs_within_two_sides():
    rng = np.random.default_rng(7)
    pts = [reduce(n_mat(rng.uniform(-3, 3)) @ a_mat(rng.uniform(-3, 2)) @ k_mat(rng.uniform(-3, 3)), i) for i in range(100)]
    part = box_sort(pts, 0.1)
    for members in part.boxes.values():
        for i in members:
            for j in members:
                assert in_neighborhood(pts[i].x, pts[j].x, 0.2)


def test_worst_case_same_box_offset():
    """Coordinate gaps just under eta in all three directions at the bottom of
    the domain give an offset of about 2.39 eta: the rotation mixes the t and
    v gaps into theta.  2 eta is not a hard bound; 2.4 eta is."""
    eta = 0.1
    x = n_mat(0.0) @ a_mat(-0.144) @ k_mat(-1.3)
    d = 0.999999 * eta
    y = n_mat(-d) @ a_mat(-0.144 - d) @ k_mat(-1.3 - d)
    o = offset_coords(x, y)
    worst = max(abs(o.t), abs(o.v), abs(o.theta))
    assert 2 * eta < worst < 2.4 * eta
