import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import codes
from kmismatch.fingerprint import FieldConfig
from kmismatch.oracle import naive_hamming
from kmismatch.sketch import (
    FAR,
    Near,
    empty_sketch,
    sk_concat,
    sk_distance,
    sk_fix,
    sk_of_string,
    sk_power,
    sk_reverse,
    sk_split,
    sk_truncate,
)

CFG = FieldConfig.from_seed(11)
strings = st.lists(st.integers(1, 4), max_size=40)


def sk(s, k=2, cfg=CFG):
    return sk_of_string(s, k, cfg)


def test_hand_evaluated_moments():
    s = sk_of_string((1, 2), 1, FieldConfig(p=101, r=7))
    assert s.phi == (3, 5, 9)
    assert s.phi2 == (5, 9)
    e = sk_of_string((), 3, CFG)
    assert e == empty_sketch(3, CFG) and e.len == 0 and not any(e.phi)
    one = sk_of_string((6,), 1, CFG)
    assert one.phi == (6, 6, 6) and one.phi2 == (36, 36)


def test_distance_examples():
    assert sk_distance(sk(codes("ab"), 1), sk(codes("ab"), 1)) == Near(())
    assert sk_distance(sk(codes("ab"), 1), sk(codes("aa"), 1)) == Near(((2, 2, 1),))
    assert sk_distance(sk(codes("abc"), 1), sk(codes("xyz"), 1)) is FAR


def test_distance_rejects_length_mismatch():
    with pytest.raises(ValueError):
        sk_distance(sk((1, 2)), sk((1,)))


def test_algebra_examples():
    a, b, ab = sk(codes("a")), sk(codes("b")), sk(codes("ab"))
    abab = sk(codes("abab"))
    empty = empty_sketch(2, CFG)
    assert sk_concat(a, b) == ab
    assert sk_concat(empty, ab) == ab
    assert sk_concat(ab, ab) == abab
    assert sk_split(ab, a, "prefix") == b
    assert sk_split(ab, empty, "prefix") == ab
    assert sk_split(abab, ab, "suffix") == ab
    assert sk_power(ab, 2) == abab
    assert sk_power(ab, 0) == empty
    assert sk_power(ab, 1) == ab
    assert sk_reverse(ab) == sk(codes("ba"))
    pal = sk(codes("abcba"))
    assert sk_reverse(pal).phi == pal.phi
    assert sk_reverse(sk_reverse(abab)) == abab


def test_split_rejects_bad_side():
    with pytest.raises(ValueError):
        sk_split(sk((1, 2)), sk((1,)), "middle")


@settings(max_examples=200, deadline=None)
@given(strings, strings, st.integers(0, 3))
def test_concat_split_roundtrip(x, y, t):
    sx, sy = sk(x), sk(y)
    xy = sk_concat(sx, sy)
    assert xy == sk(x + y)
    assert sk_split(xy, sx, "prefix") == sy
    assert sk_split(xy, sy, "suffix") == sx
    assert sk_power(sx, t) == sk(x * t)
    assert sk_reverse(sx) == sk(x[::-1])


@settings(max_examples=300, deadline=None)
@given(st.data())
def test_decode_matches_direct_comparison(data):
    k = data.draw(st.integers(1, 4))
    a = data.draw(st.lists(st.integers(1, 4), min_size=1, max_size=48))
    b = list(a)
    for pos in data.draw(st.lists(st.integers(0, len(a) - 1), max_size=k + 3, unique=True)):
        b[pos] = data.draw(st.integers(1, 4))
    dist, mism = naive_hamming(a, b)
    verdict = sk_distance(sk(a, k), sk(b, k))
    if dist > k:
        assert verdict is FAR
    else:
        assert verdict == Near(tuple(mism))


@settings(max_examples=100, deadline=None)
@given(strings.filter(bool), st.data())
def test_fix_equals_sketch_of_edited_string(x, data):
    pos = data.draw(st.integers(1, len(x)))
    new = data.draw(st.integers(1, 4))
    y = list(x)
    y[pos - 1] = new
    assert sk_fix(sk(x), [(pos, x[pos - 1], new)]) == sk(y)


def test_truncate_keeps_leading_moments():
    s = sk((1, 2, 3), 3)
    t = sk_truncate(s, 1)
    assert t == sk((1, 2, 3), 1)
    with pytest.raises(ValueError):
        sk_truncate(t, 2)
