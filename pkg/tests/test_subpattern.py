import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import codes
from kmismatch.fingerprint import FieldConfig
from kmismatch.oracle import naive_hamming
from kmismatch.subpattern import (
    SubpatternIndex,
    _Automaton,
    extract_subpattern,
    gen_primes,
    verify_alignment,
)
from kmismatch.ztrie import CompactTrie

CFG = FieldConfig.from_seed(17)


def test_prime_sets():
    s = gen_primes(16, 1)
    assert s.q_set == (5, 7) and s.r_set == (5, 7)
    s = gen_primes(4, 1)
    assert s.q_set == (3, 5) and s.r_set == (3, 5)
    assert len(gen_primes(16, 2).r_set) == 2 * len(gen_primes(16, 1).r_set)
    # with ceiling rounding the count at k=2 is 2x or 2x - 1 of the count at k=1
    for m in (32, 64, 500):
        one, two = len(gen_primes(m, 1).r_set), len(gen_primes(m, 2).r_set)
        assert 2 * one - 1 <= two <= 2 * one
    with pytest.raises(ValueError):
        gen_primes(16, 0)


def test_extract_subpattern():
    p = codes("abcdefgh")
    assert extract_subpattern(p, 2, 3, 1) == codes("ag")
    assert extract_subpattern(p, 2, 3, 2) == codes("bh")
    assert extract_subpattern(codes("abc"), 2, 3, 5) == ()
    with pytest.raises(ValueError):
        extract_subpattern(p, 2, 3, 7)


def automaton(*words):
    ws = [codes(w) for w in words]
    trie = CompactTrie([(w, w[::-1]) for w in ws], CFG)
    node = {w: v for v, ids in enumerate(trie.marks) for w in ids}
    return _Automaton(ws, node), trie, node


def run(aut, text):
    s, outs = 0, []
    for c in codes(text):
        s, _ = aut.step(s, c)
        outs.append(aut.out[s])
    return outs


def test_automaton_single_word():
    aut, _, node = automaton("ag")
    assert run(aut, "ag") == [-1, node[codes("ag")]]
    assert run(aut, "z") == [-1]


def test_automaton_nested_words():
    aut, trie, node = automaton("g", "ag")
    last = run(aut, "ag")[-1]
    assert last == node[codes("ag")]
    # the reversed trie certifies that the shorter word ends here too
    assert trie.is_prefix(node[codes("g")], last)


def scan(pattern, text, k):
    idx = SubpatternIndex([(0, pattern)], k, CFG)
    for pos, c in enumerate(text, 1):
        idx.feed(pos, c)
    return verify_alignment(idx, 0, idx.evidence(0, len(text)))


def test_verify_examples():
    rng = random.Random(1)
    p = tuple(rng.randint(1, 4) for _ in range(40))
    assert scan(p, p, 1) == 0
    t = list(p)
    t[7] = 5
    assert scan(p, t, 1) == 1
    t[20] = 5
    assert scan(p, t, 1) is None


def test_feed_requires_order():
    idx = SubpatternIndex([(0, (1, 2))], 1, CFG)
    idx.feed(1, 1)
    with pytest.raises(ValueError):
        idx.feed(3, 1)


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_verify_matches_direct_comparison(data):
    k = data.draw(st.integers(1, 2))
    p = data.draw(st.lists(st.integers(1, 3), min_size=1, max_size=40))
    prefix = data.draw(st.lists(st.integers(1, 3), max_size=10))
    window = list(p)
    for pos in data.draw(st.lists(st.integers(0, len(p) - 1), max_size=k + 2, unique=True)):
        window[pos] = data.draw(st.integers(1, 4))
    dist, _ = naive_hamming(p, window)
    got = scan(tuple(p), prefix + window, k)
    assert got == (dist if dist <= k else None)
