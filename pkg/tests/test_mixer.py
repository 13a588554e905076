import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from prodperc.mixer import (
    GOLDEN,
    MASK64,
    fold,
    fold_array,
    hash_words,
    hash_words_array,
    mix64,
    mix64_array,
    to_unit,
    to_unit_array,
)

u64 = st.integers(0, MASK64)


def test_splitmix_reference_value():
    # first output of SplitMix64 seeded with 0
    assert mix64(GOLDEN) == 0xE220A8397B1DCDAF


@given(u64)
def test_mix_scalar_matches_array(z):
    assert int(mix64_array(np.array([z], dtype=np.uint64))[0]) == mix64(z)


@given(u64, st.lists(st.integers(0, 2**40), min_size=1, max_size=6))
def test_hash_scalar_matches_array(seed, words):
    arr = hash_words_array(seed, *[np.array([w]) for w in words])
    assert int(arr[0]) == hash_words(seed, *words)


@given(u64, st.lists(st.integers(0, 2**40), min_size=1, max_size=6))
def test_fold_continues_the_chain(seed, words):
    prefix = hash_words(seed, *words[:-1])
    assert fold(prefix, words[-1]) == hash_words(seed, *words)
    assert int(fold_array(prefix, np.array([words[-1]]))[0]) == hash_words(seed, *words)


def test_hash_broadcasts_over_seeds_and_words():
    seeds = np.arange(4, dtype=np.uint64).reshape(-1, 1)
    ctx = np.arange(5)
    h = hash_words_array(seeds, 1, 2, ctx)
    assert h.shape == (4, 5)
    assert int(h[3, 4]) == hash_words(3, 1, 2, 4)


@given(u64)
def test_unit_interval(h):
    u = to_unit(h)
    assert 0.0 <= u < 1.0
    assert to_unit_array(np.array([h], dtype=np.uint64))[0] == u


def test_unit_draws_look_uniform():
    u = to_unit_array(hash_words_array(7, np.arange(200_000)))
    assert abs(u.mean() - 0.5) < 4 * (1 / 12 / u.size) ** 0.5
    counts = np.bincount((u * 10).astype(int), minlength=10)
    expected = u.size / 10
    chi2 = ((counts - expected) ** 2 / expected).sum()
    assert chi2 < 30  # 9 degrees of freedom; p ~ 4e-4
