import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kmismatch.engine import (
    Matcher,
    OccurrenceStore,
    preprocess,
    process_char,
    process_char_deamortised,
    query_extension,
    record_prefix_occurrence,
    work_budget,
    work_units,
)
from kmismatch.fingerprint import FieldConfig
from kmismatch.oracle import naive_dictionary_match, naive_hamming, naive_k_period

CFG = FieldConfig.from_seed(29)


def stream(m, text):
    return {r: {(o.pattern_id, o.distance) for o in m.process_char(c)} for r, c in enumerate(text, 1)}


def expected(patterns, text, k):
    by = naive_dictionary_match(patterns, text, k).by_position()
    return {r: by.get(r, set()) for r in range(1, len(text) + 1)}


def test_single_pattern_routes_short():
    m = preprocess(["ab"], 1, CFG)
    assert m.partition() == {"short": [0], "large": [], "case_i": [], "case_ii": []}


def test_partition_follows_k_period():
    rng = random.Random(2)
    pats = ["".join(rng.choice("abcd") for _ in range(16)) for _ in range(3)] + ["abcd" + "ab" * 6]
    m = preprocess(pats, 1, CFG)
    part = m.partition()
    assert part["short"] == []
    large = [i for i, p in enumerate(pats) if naive_k_period(p[-8:], 1) > 4]
    assert part["large"] == large and 3 not in large
    assert sorted(part["case_i"] + part["case_ii"]) == [i for i in range(4) if i not in large]


def test_short_patterns_skip_long_paths():
    m = preprocess(["abc", "bcd", "cde", "aaa"], 1, CFG)
    part = m.partition()
    assert part["short"] == [0, 1, 2, 3] and not (part["large"] or part["case_i"] or part["case_ii"])


def test_process_char_examples():
    m = preprocess(["aba"], 1, CFG)
    assert stream(m, "abaa") == {1: set(), 2: set(), 3: {(0, 0)}, 4: set()}
    m = preprocess(["aaaa"], 1, CFG)
    assert stream(m, "aaab")[4] == {(0, 1)}
    m = preprocess(["abcdef", "bcdefg"], 1, CFG)
    assert all(not v for v in stream(m, "abcde").values())


def test_mode_guards():
    with pytest.raises(ValueError):
        process_char(preprocess(["ab"], 1, CFG, deamortised=True), "a")
    with pytest.raises(ValueError):
        process_char_deamortised(preprocess(["ab"], 1, CFG), "a")
    with pytest.raises(ValueError):
        preprocess([], 1, CFG)
    with pytest.raises(ValueError):
        preprocess(["ab"], 0, CFG)


def test_deamortised_reports_on_time():
    m = preprocess(["abcabc"], 1, CFG, deamortised=True)
    got = stream(m, "xxabcabcxx")
    assert [r for r, v in got.items() if v] == [8]
    rng = random.Random(6)
    pats = ["".join(rng.choice("ab") for _ in range(16)) for _ in range(4)]
    text = "".join(rng.choice("ab") for _ in range(30)) + pats[2] + "ba"
    m = preprocess(pats, 1, CFG, deamortised=True)
    assert stream(m, text) == expected(pats, text, 1)
    assert (2, 0) in stream(preprocess(pats, 1, CFG, deamortised=True), text)[46]


def test_occurrence_store():
    s = OccurrenceStore(horizon=4, k=2)
    record_prefix_occurrence(s, 10, ("t", 3), 1, "H3")
    record_prefix_occurrence(s, 10, ("t", 3), 0, "H4")
    assert "H3" in query_extension(s, 10, ("t", 3), 0)
    assert query_extension(s, 10, ("t", 3), 2) == {"H4"}
    with pytest.raises(ValueError):
        s.query(10, ("t", 3), 3)
    s.expire(14)
    assert s.live_entries() == 0


def test_head_and_tail_join_across_split():
    # d = 4 patterns of length 16: H = first 12, Q = last 4; one mismatch on each side
    rng = random.Random(12)
    pats = ["".join(rng.choice("abcd") for _ in range(16)) for _ in range(4)]
    occ = list(pats[1])
    occ[3] = "e" if occ[3] != "e" else "a"
    occ[14] = "e" if occ[14] != "e" else "a"
    text = "".join(rng.choice("abcd") for _ in range(20)) + "".join(occ)
    m = preprocess(pats, 2, CFG, deamortised=True)
    got = stream(m, text)
    assert got == expected(pats, text, 2)
    assert (1, 2) in got[36]


def test_work_units():
    m = preprocess(["abc", "bcd"], 1, CFG)
    assert work_units(m).total == 0
    m.process_char("a")
    w = work_units(m)
    assert w.last_delta > 0 and w.total == w.last_delta


def test_emitted_mismatches_are_exact():
    rng = random.Random(3)
    pats = ["".join(rng.choice("ab") for _ in range(rng.randint(3, 20))) for _ in range(5)]
    text = "".join(rng.choice("abc") for _ in range(120))
    for deam in (False, True):
        m = preprocess(pats, 2, CFG, deamortised=deam, emit_mismatches=True)
        for r, c in enumerate(text, 1):
            for o in m.process_char(c):
                p = pats[o.pattern_id]
                dist, mism = naive_hamming(p, text[r - len(p) : r])
                assert o.distance == dist
                assert [(pos, a, b if b in "ab" else None) for pos, a, b in mism] == list(o.mismatches)


def test_budget_formula():
    assert work_budget(1, 8, 32) == work_budget(1, 8, 32, 0)
    assert work_budget(2, 8, 32, 3) - work_budget(2, 8, 32) == 3 * (work_budget(1, 2, 2, 1) - work_budget(1, 2, 2))


def test_space_trend_follows_log_growth():
    for k in (1, 2):
        ratios = []
        for d in (4, 8, 16, 32):
            rng = random.Random(d * 10 + k)
            pats = [tuple(rng.randint(1, 4) for _ in range(rng.randint(1, 3 * d + 8))) for _ in range(d)]
            m = Matcher(pats, k, CFG)
            m.feed([rng.randint(1, 4) for _ in range(100)])
            s = m.space()
            ratios.append((s["trie_nodes"] + s["sketches"]) / (d * (1 + math.ceil(math.log2(d))) ** k))
        print(f"space per d(1+log d)^k, k={k}: {[round(r, 2) for r in ratios]}")
        assert max(ratios) <= 4 * min(ratios)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_random_instances_match_oracle_in_both_modes(data):
    k = data.draw(st.integers(1, 2))
    pats = data.draw(st.lists(st.text("ab", min_size=1, max_size=20), min_size=1, max_size=6))
    text = data.draw(st.text("abc", max_size=80))
    want = expected(pats, text, k)
    amort = stream(Matcher(pats, k, CFG), text)
    deam = stream(Matcher(pats, k, CFG, deamortised=True), text)
    assert amort == want == deam
