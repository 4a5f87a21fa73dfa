import pytest

from conftest import codes
from kmismatch.oracle import (
    naive_dictionary_match,
    naive_hamming,
    naive_k_period,
    naive_longest_small_period_suffix,
)


def test_hamming():
    assert naive_hamming("ab", "ab") == (0, [])
    assert naive_hamming("ab", "aa") == (1, [(2, "b", "a")])
    assert naive_hamming("abc", "xyz")[0] == 3
    with pytest.raises(ValueError):
        naive_hamming("a", "ab")


def test_dictionary_match():
    res = naive_dictionary_match(["aba"], "abaa", 1)
    assert res.by_position() == {3: {(0, 0)}}
    assert naive_dictionary_match(["aba"], "", 1).occurrences == []
    full = naive_dictionary_match(["ab", "xyz"], "qrstu", 3)
    assert {(e, i) for e, i, _, _ in full.occurrences} == {(e, 0) for e in range(2, 6)} | {(e, 1) for e in range(3, 6)}


def test_periods():
    assert naive_k_period("abab", 0) == 2
    assert naive_k_period("aaaaa", 1) == 1
    # distinct symbols: only a trivially short window is periodic with shift <= 2
    assert naive_longest_small_period_suffix(codes("abcdefg"), 0, 2) == (6, 2)
    assert naive_longest_small_period_suffix(codes("aaaa"), 1, 2) == (1, 1)
