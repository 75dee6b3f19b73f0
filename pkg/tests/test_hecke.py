import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistl.errors import InvalidIndex
from twistl.hecke import (
    HeckeIndex,
    PermutationCache,
    act_and_normalize,
    certify,
    check_index,
    divisors,
    hecke_matrix,
    index_set,
    permutation,
)
from twistl.sl2 import int_mul, random_sl2z


@given(st.integers(1, 200))
def test_index_set_size_is_sigma(L):
    assert len(index_set(L)) == sum(divisors(L))


def test_small_index_sets():
    assert index_set(2) == [HeckeIndex(1, 0), HeckeIndex(1, 1), HeckeIndex(2, 0)]
    assert len(index_set(6)) == 12


def test_hecke_matrix_is_unimodular():
    for idx in index_set(12):
        assert hecke_matrix(12, idx.m, idx.k).det == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(InvalidIndex):
        check_index(12, HeckeIndex(5, 0))


def test_translation_swaps_level_two():
    perm = permutation(2, (1, 1, 0, 1))
    assert perm(HeckeIndex(1, 0)) == HeckeIndex(1, 1)
    assert perm(HeckeIndex(1, 1)) == HeckeIndex(1, 0)
    assert perm(HeckeIndex(2, 0)) == HeckeIndex(2, 0)
    new, c = act_and_normalize(2, HeckeIndex(1, 1), (1, 1, 0, 1))
    assert new == HeckeIndex(1, 0) and c == (1, -1, 0, 1)


@settings(max_examples=60)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_permutation_depends_only_on_residue(L, seed):
    rng = np.random.default_rng(seed)
    a1 = random_sl2z(rng)
    a2 = int_mul(a1, int_mul((1, L, 0, 1), (1, 0, L, 1)))
    cache = PermutationCache()
    p1 = permutation(L, a1, cache)
    assert permutation(L, a2, PermutationCache()).as_tuple() == p1.as_tuple()
    assert sorted(p1.as_tuple()) == index_set(L)  # a bijection
    for idx in index_set(L):
        new, c = act_and_normalize(L, idx, a2)
        assert certify(L, idx, a2, new, c)
        assert certify(L, idx, a1, p1(idx), p1.cofactors[idx])


def test_cache_reuses_tables():
    cache = PermutationCache()
    permutation(6, (1, 0, 0, 1), cache)
    permutation(6, (1, 6, 0, 1), cache)  # same residue mod 6
    assert cache.builds == 1 and len(cache) == 1
