"""Seeded PRNG: known-answer vectors, stream equivalence, shuffle laws."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from corpusforge import rng

from .oracles import SPLITMIX64_SEED0, splitmix64_scalar


def test_known_answer_seed_zero():
    got = [int(v) for v in rng.splitmix64(0, 3)]
    assert got == list(SPLITMIX64_SEED0)


@given(st.integers(min_value=0, max_value=2**64 - 1),
       st.integers(min_value=0, max_value=64))
def test_vectorized_matches_scalar_oracle(seed, n):
    vec = [int(v) for v in rng.splitmix64(seed, n)]
    assert vec == splitmix64_scalar(seed, n)


def test_class_stream_equals_vectorized():
    gen = rng.SplitMix64(12345)
    stream = [gen.next_u64() for _ in range(10)]
    assert stream == [int(v) for v in rng.splitmix64(12345, 10)]


def test_uniforms_in_unit_interval():
    u = rng.uniforms(7, 10000)
    assert u.min() >= 0.0 and u.max() < 1.0
    # a uniform sample of this size is never this lopsided
    assert 0.45 < u.mean() < 0.55


def test_shuffle_is_permutation_and_deterministic():
    items = list(range(100))
    a = rng.shuffle(items, 42)
    b = rng.shuffle(items, 42)
    c = rng.shuffle(items, 43)
    assert a == b
    assert sorted(a) == items
    assert a != items  # 100!/1 odds say a fixed shuffle moved something
    assert c != a
    assert items == list(range(100))  # input untouched


def test_shuffle_empty_and_single():
    assert rng.shuffle([], 1) == []
    assert rng.shuffle(["x"], 1) == ["x"]


def test_derive_seed_varies_by_key_and_base():
    s1 = rng.derive_seed(0, "utt-1")
    s2 = rng.derive_seed(0, "utt-2")
    s3 = rng.derive_seed(1, "utt-1")
    assert len({s1, s2, s3}) == 3
    assert s1 == rng.derive_seed(0, "utt-1")
    for s in (s1, s2, s3):
        assert 0 <= s < 2**64


def test_next_below_bounds():
    gen = rng.SplitMix64(9)
    vals = [gen.next_below(7) for _ in range(1000)]
    assert set(vals) == set(range(7))
    with pytest.raises(ValueError):
        gen.next_below(0)


def test_uniform_determinism_across_chunking():
    # one call for 2n values equals the same seed's stream read any way
    whole = rng.uniforms(3, 20)
    assert np.array_equal(whole, rng.uniforms(3, 20))
