"""Reduction from k-mismatch verification to exact matching on substreams.

For a pair of primes (q, r) the pattern is cut into the arithmetic-progression
subsequences ``P[l] P[qr+l] P[2qr+l] ...`` (l = 1..qr). The text is cut the same
way into qr substreams, and an exact multi-pattern automaton runs on each of
them. At an alignment, a pattern position is a candidate mismatch when, for
every (q, r), the subpattern containing it fails to match. With the prime sets
from :func:`gen_primes` the candidates are exactly the mismatches whenever there
are at most k of them.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .fingerprint import FieldConfig
from .ztrie import CompactTrie


def _primes_above(lo: float, count: int) -> list[int]:
    out: list[int] = []
    n = max(2, math.floor(lo) + 1)
    while len(out) < count:
        if all(n % q for q in range(2, math.isqrt(n) + 1)):
            out.append(n)
        n += 1
    return out


@dataclass(frozen=True)
class PrimeScheme:
    q_set: tuple
    r_set: tuple
    m: int
    k: int

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [(q, r) for q in self.q_set for r in self.r_set]


def gen_primes(m: int, k: int) -> PrimeScheme:
    """First ceil(log m / loglog m) and ceil(k log m / loglog m) primes above log2 m."""
    if k < 1:
        raise ValueError("k must be at least 1")
    m_eff = max(m, 4)
    lg = math.log2(m_eff)
    llg = max(math.log2(lg), 1.0)
    nq = max(1, math.ceil(lg / llg - 1e-12))
    nr = max(1, math.ceil(k * lg / llg - 1e-12))
    primes = _primes_above(lg, max(nq, nr))
    return PrimeScheme(tuple(primes[:nq]), tuple(primes[:nr]), m, k)


def extract_subpattern(p: Sequence[int], q: int, r: int, ell: int) -> tuple:
    step = q * r
    if not 1 <= ell <= step:
        raise ValueError(f"offset {ell} outside [1, {step}]")
    return tuple(p[ell - 1 :: step])


@dataclass
class AlignmentEvidence:
    """Failed subpattern offsets per (q, r) for one pattern at one end position."""

    pattern_id: object
    end_pos: int
    failed: dict = field(default_factory=dict)


class _Automaton:
    """Failure-link automaton over the subpatterns of one (q, r) pair."""

    def __init__(self, words: list[tuple], word_node: dict):
        goto: list[dict] = [{}]
        term: list[int] = [-1]
        for w in words:
            s = 0
            for c in w:
                nxt = goto[s].get(c)
                if nxt is None:
                    nxt = len(goto)
                    goto[s][c] = nxt
                    goto.append({})
                    term.append(-1)
                s = nxt
            term[s] = word_node[w]
        fail = [0] * len(goto)
        out = list(term)
        bfs = deque(goto[0].values())
        while bfs:
            s = bfs.popleft()
            if out[s] < 0:
                out[s] = out[fail[s]]
            for c, t in goto[s].items():
                f = fail[s]
                while f and c not in goto[f]:
                    f = fail[f]
                fail[t] = goto[f].get(c, 0) if goto[f].get(c, 0) != t else 0
                bfs.append(t)
        self.goto, self.fail, self.out = goto, fail, out

    def step(self, s: int, c: int) -> tuple[int, int]:
        """Next state and the number of transitions taken."""
        goto, fail = self.goto, self.fail
        steps = 1
        while s and c not in goto[s]:
            s = fail[s]
            steps += 1
        return goto[s].get(c, 0), steps


class SubpatternIndex:
    """Subpattern tries and substream automata for a set of patterns."""

    def __init__(self, patterns: Sequence[tuple[object, Sequence[int]]], k: int, cfg: FieldConfig, lag: int = 0):
        self.k = k
        self.patterns = {pid: tuple(s) for pid, s in patterns}
        m = max((len(s) for s in self.patterns.values()), default=1)
        self.scheme = gen_primes(m, k)
        self.pairs = self.scheme.pairs
        self.tries: list[CompactTrie] = []
        self.word_node: list[dict] = []
        self.automata: list[_Automaton] = []
        for q, r in self.pairs:
            words = sorted({extract_subpattern(s, q, r, ell) for s in self.patterns.values() for ell in range(1, q * r + 1)} - {()})
            trie = CompactTrie([(w, w[::-1]) for w in words], cfg, allow_empty=True)
            node_of = {}
            for v, ids in enumerate(trie.marks):
                for w in ids:
                    node_of[w] = v
            self.tries.append(trie)
            self.word_node.append(node_of)
            self.automata.append(_Automaton(words, node_of))
        self.window = max((q * r for q, r in self.pairs), default=1) + lag + 1
        self.states = [[0] * (q * r) for q, r in self.pairs]
        self.longest = [[-1] * self.window for _ in self.pairs]
        self.pos = 0
        self.work = 0

    def feed(self, text_pos: int, c: int) -> list[int]:
        """Advance every substream containing ``text_pos``; returns the longest-match node per pair."""
        if text_pos != self.pos + 1:
            raise ValueError(f"expected position {self.pos + 1}, got {text_pos}")
        self.pos = text_pos
        slot = text_pos % self.window
        res = []
        for i, (q, r) in enumerate(self.pairs):
            st = self.states[i]
            lane = text_pos % (q * r)
            s, steps = self.automata[i].step(st[lane], c)
            st[lane] = s
            self.work += steps
            node = self.automata[i].out[s]
            self.longest[i][slot] = node
            res.append(node)
        return res

    def evidence(self, pattern_id, end_pos: int) -> AlignmentEvidence:
        """Which subpatterns of the pattern fail at the alignment ending at ``end_pos``."""
        p = self.patterns[pattern_id]
        n = len(p)
        if end_pos < n:
            raise ValueError("alignment starts before the text")
        if end_pos > self.pos:
            raise ValueError(f"end position {end_pos} not reached yet")
        ev = AlignmentEvidence(pattern_id, end_pos)
        start = end_pos - n
        for i, (q, r) in enumerate(self.pairs):
            step = q * r
            failed = []
            trie, node_of, ring = self.tries[i], self.word_node[i], self.longest[i]
            for ell in range(1, min(step, n) + 1):
                last = ell + ((n - ell) // step) * step
                tpos = start + last
                if self.pos - tpos >= self.window:
                    raise ValueError(f"end position {end_pos} outside the retained window")
                got = ring[tpos % self.window]
                want = node_of[extract_subpattern(p, q, r, ell)]
                self.work += 1
                if got < 0 or not trie.is_prefix(want, got):
                    failed.append(ell)
            ev.failed[(q, r)] = failed
        return ev


def verify_alignment(idx: SubpatternIndex, pattern_id, evidence: AlignmentEvidence) -> int | None:
    """Exact Hamming distance if at most k, otherwise None ("No")."""
    p = idx.patterns[pattern_id]
    n = len(p)
    k = idx.k
    if set(evidence.failed) != set(idx.pairs):
        raise ValueError("evidence does not cover every prime pair")
    for failed in evidence.failed.values():
        if len(failed) > k:
            return None
    (q0, r0) = idx.pairs[0]
    step0 = q0 * r0
    cand = [pos for ell in evidence.failed[(q0, r0)] for pos in range(ell, n + 1, step0)]
    failed_sets = {pr: set(f) for pr, f in evidence.failed.items()}
    for q, r in idx.pairs[1:]:
        step = q * r
        fs = failed_sets[(q, r)]
        cand = [pos for pos in cand if (pos - 1) % step + 1 in fs]
    if len(cand) > k:
        return None
    for (q, r), failed in evidence.failed.items():
        step = q * r
        hit = {(pos - 1) % step + 1 for pos in cand}
        if any(ell not in hit for ell in failed):
            return None
    return len(cand)
