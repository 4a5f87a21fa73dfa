import math
import random

from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import codes
from kmismatch.fingerprint import FieldConfig
from kmismatch.kerrata import KErrataTree, LookupStats, build_kerrata, lookup
from kmismatch.oracle import naive_hamming
from kmismatch.ztrie import SequenceQuery

CFG = FieldConfig.from_seed(5)


def tree_of(words, k):
    return build_kerrata([(w, codes(w)) for w in words], k, CFG)


def hits(tree, query, mode="exact-length"):
    return {(h.pattern_id, h.matched_length, h.distance) for h in lookup(tree, SequenceQuery(codes(query), CFG), mode)}


def test_zero_capacity_is_plain_trie():
    t = tree_of(["abc", "abd"], 0)
    assert not t._vpaths and not t._hgroups
    assert sum(1 for _ in t.all_trees()) == 1
    assert hits(t, "abc") == {("abc", 3, 0)}


def test_two_word_substitution_tries():
    t = tree_of(["ab", "ac"], 1)
    # heavy path root -> "a" -> "ab"; "ac" goes into both substitution tries of node "a"
    a = next(v for v in range(len(t.trie)) if t.trie.label(v) == codes("a"))
    assert t.trie.label(t.trie.heavy[a]) == codes("ab")
    vertical = [g for _, g in t._vpaths if g is not None]
    assert len(vertical) == 1
    vt = vertical[0].tree.trie
    assert [vt.label(v) for v in range(len(vt)) if vt.marks[v]] == [codes("ab")]
    chars, group = t._hgroups[a]
    assert chars == [codes("c")[0]]
    ht = group.tree.trie
    assert [ht.label(v) for v in range(len(ht)) if ht.marks[v]] == [()]


def test_single_word_has_no_substitution_tries():
    t = tree_of(["abcabc"], 2)
    assert all(g is None for _, g in t._vpaths) and not t._hgroups
    assert sum(1 for _ in t.all_trees()) == 1


def test_lookup_examples():
    t = tree_of(["abc", "abd", "xyz"], 1)
    assert hits(t, "abe") == {("abc", 3, 1), ("abd", 3, 1)}
    assert hits(tree_of(["abc"], 1), "abcd", "any-prefix") == {("abc", 3, 0)}
    assert hits(tree_of(["abc"], 0), "abc") == {("abc", 3, 0)}


def test_mismatch_recovery():
    t = tree_of(["abcd"], 2)
    assert t.mismatches(SequenceQuery(codes("abzz"), CFG), "abcd") == ((3, 26, 3), (4, 26, 4))


def brute(words, query, k, mode):
    out = set()
    for i, w in enumerate(words):
        if mode == "exact-length" and len(w) != len(query):
            continue
        if len(w) > len(query):
            continue
        dist, _ = naive_hamming(w, query[: len(w)])
        if dist <= k:
            out.add((i, len(w), dist))
    return out


@settings(max_examples=150, deadline=None)
@given(
    st.lists(st.lists(st.integers(1, 3), min_size=1, max_size=10), min_size=1, max_size=10),
    st.lists(st.integers(1, 3), min_size=1, max_size=12),
    st.integers(1, 3),
    st.sampled_from(["exact-length", "any-prefix"]),
)
def test_lookup_matches_brute_force(words, query, k, mode):
    t = KErrataTree(list(enumerate(words)), k, CFG)
    got = {(h.pattern_id, h.matched_length, h.distance) for h in t.lookup(SequenceQuery(query, CFG), mode)}
    assert got == brute(words, query, k, mode)


def test_copies_and_searches_within_logarithmic_bound():
    rng = random.Random(9)
    for k in (1, 2):
        for d in (4, 16):
            bound = 4 * (1 + math.ceil(math.log2(d))) ** k
            words = [tuple(rng.randint(1, 2) for _ in range(rng.randint(1, 24))) for _ in range(d)]
            t = KErrataTree(list(enumerate(words)), k, CFG)
            assert max(t.id_copies().values()) <= bound
            for _ in range(10):
                st_ = LookupStats()
                t.lookup(SequenceQuery([rng.randint(1, 2) for _ in range(26)], CFG), "any-prefix", st_)
                assert st_.prefix_searches <= bound
