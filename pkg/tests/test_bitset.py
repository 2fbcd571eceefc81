import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clusterbfs.bitset import (
    BitSubset,
    bitset_difference,
    bitset_intersect_nonempty,
    bitset_union,
    words_for,
)


def test_union_and_difference_small_example():
    a = BitSubset.from_bitstring("1010")
    b = BitSubset.from_bitstring("0100")
    assert bitset_union(a, b).to_bitstring() == "1110"
    assert bitset_difference(a, BitSubset.from_bitstring("1000")).to_bitstring() == "0010"
    assert not bitset_intersect_nonempty(a, b)
    assert bitset_intersect_nonempty(a, BitSubset.from_bitstring("0011"))


def test_capacity_mismatch_is_rejected():
    with pytest.raises(ValueError):
        bitset_union(BitSubset(4), BitSubset(5))


def test_high_bits_rejected():
    with pytest.raises(ValueError):
        BitSubset(3, [0b1000])


def test_single_word_up_to_64():
    assert words_for(1) == words_for(64) == 1
    assert words_for(65) == 2 and words_for(130) == 3
    assert BitSubset(64).words.size == 1


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_multiword_ops_match_python_sets(data):
    k = data.draw(st.sampled_from([1, 7, 63, 64, 65, 130, 200]))
    xs = data.draw(st.sets(st.integers(0, k - 1)))
    ys = data.draw(st.sets(st.integers(0, k - 1)))
    a, b = BitSubset.from_members(k, xs), BitSubset.from_members(k, ys)
    assert set((a | b).members()) == xs | ys
    assert set((a - b).members()) == xs - ys
    assert a.intersects(b) == bool(xs & ys)
    assert len(a) == len(xs)
    assert all((j in a) == (j in xs) for j in range(k))
    assert BitSubset.from_bitstring(a.to_bitstring()) == a


def test_k130_random_against_membership():
    rng = np.random.default_rng(0)
    for _ in range(50):
        xs = set(rng.choice(130, rng.integers(0, 130), replace=False).tolist())
        ys = set(rng.choice(130, rng.integers(0, 130), replace=False).tolist())
        a, b = BitSubset.from_members(130, xs), BitSubset.from_members(130, ys)
        assert a.words.size == 3
        for j in range(130):
            assert (j in (a | b)) == (j in xs or j in ys)
            assert (j in (a - b)) == (j in xs and j not in ys)
