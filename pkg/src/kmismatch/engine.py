"""Streaming dictionary matching with k mismatches.

Patterns are routed by length and periodicity:

* short patterns (length < 3d, or every pattern when d <= 2) go to one k-errata
  tree queried at every position with the reversed text suffix;
* long patterns whose 2d-suffix ``tau`` has k-period > d ("large period") are
  found through ``tau`` and extended with the subpattern verifier;
* long patterns with small-period ``tau`` are found inside ``L T[B+1..r]``, where
  ``L`` is the periodic text suffix maintained by :mod:`kmismatch.periodic`;
  when only a proper suffix of the pattern is periodic, that suffix plus one
  character is matched and the rest verified.

In de-amortised mode every pattern of length >= 3d is split into ``H Q`` with
``|Q| = d``: ``Q`` is matched on time with the short patterns, ``H`` is matched
with at most d characters of delay, and the two halves meet in an occurrence
store keyed by (k-errata node, distance). The update of ``L`` is spread over the
d characters following a block boundary.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

from .fingerprint import FieldConfig
from .kerrata import KErrataTree, LookupStats
from .periodic import (
    PeriodicSuffix,
    PrefixRing,
    TextSource,
    empty_suffix,
    k_period,
    longest_small_period_suffix,
    update_L,
    update_steps,
)
from .sketch import FAR, Sketch, sk_distance, sk_of_string
from .subpattern import SubpatternIndex, verify_alignment

# Work budget B = C1 * (k (1 + ceil(log2 d))^k + ceil(log2 m) k^2) + C2 * occ,
# calibrated once on the randomised test corpus and frozen.
BUDGET_C1 = 48
BUDGET_C2 = 4


def work_budget(k: int, d: int, m: int, occ: int = 0) -> int:
    lg_d = math.ceil(math.log2(d)) if d > 1 else 0
    lg_m = math.ceil(math.log2(m)) if m > 1 else 1
    return BUDGET_C1 * (k * (1 + lg_d) ** k + lg_m * k * k) + BUDGET_C2 * occ


@dataclass(frozen=True, slots=True)
class Occurrence:
    """A k-mismatch occurrence of ``pattern_id`` ending at ``end_pos`` (1-based).

    ``mismatches`` holds (pattern position, pattern char, text char) triples when requested.
    """

    end_pos: int
    pattern_id: Hashable
    distance: int
    mismatches: tuple | None = None


class Alphabet:
    """Maps symbols to codes 1..sigma; symbols outside the dictionary share code sigma+1."""

    def __init__(self, symbols: Iterable):
        self.symbols = sorted(set(symbols), key=lambda s: (str(type(s)), s))
        self.code = {s: i for i, s in enumerate(self.symbols, 1)}
        self.other = len(self.symbols) + 1

    def encode(self, seq: Iterable) -> tuple:
        code, other = self.code, self.other
        return tuple(code.get(c, other) for c in seq)

    def decode(self, c: int):
        return self.symbols[c - 1] if 1 <= c <= len(self.symbols) else None


class ReversedText:
    """QueryAccess for the reversed text ending at ``end``: Q[i] = T[end - i + 1]."""

    def __init__(self, source: TextSource, end: int, start: int):
        self.source = source
        self.cfg = source.cfg
        self.end = end
        self.length = max(0, end - start + 1)
        self._sk: dict = {}

    def phi(self, a: int, b: int) -> int:
        if b < a:
            return 0
        return self.source.fp(self.end - b + 1, self.end - a + 1).phi_rev

    def char(self, i: int) -> int:
        return self.source.char(self.end - i + 1)

    def sketch(self, a: int, b: int, k: int) -> Sketch:
        key = (a, b, k)
        s = self._sk.get(key)
        if s is None:
            s = self.source.sketch(self.end - b + 1, self.end - a + 1, k, reverse=True)
            self._sk[key] = s
        return s


class OccurrenceStore:
    """Per text position: (k-errata node, distance) -> ids of prefixes ending there."""

    def __init__(self, horizon: int, k: int):
        self.horizon = horizon
        self.k = k
        self._by_pos: dict[int, dict] = {}

    def record(self, pos: int, node: tuple, h: int, prefix_id) -> None:
        if not 0 <= h <= self.k:
            raise ValueError(f"distance {h} outside [0, {self.k}]")
        self._by_pos.setdefault(pos, {}).setdefault((node, h), set()).add(prefix_id)

    def query(self, pos: int, node: tuple, h_prime: int) -> list[tuple[object, int]]:
        """(prefix id, h) for every stored (node, h) at ``pos`` with h <= k - h_prime."""
        if not 0 <= h_prime <= self.k:
            raise ValueError(f"distance {h_prime} outside [0, {self.k}]")
        table = self._by_pos.get(pos)
        if not table:
            return []
        out = []
        for h in range(self.k - h_prime, -1, -1):
            for pid in table.get((node, h), ()):
                out.append((pid, h))
        return out

    def expire(self, now: int) -> None:
        for pos in [p for p in self._by_pos if p <= now - self.horizon]:
            del self._by_pos[pos]

    def live_entries(self) -> int:
        return sum(len(v) for t in self._by_pos.values() for v in t.values())


def record_prefix_occurrence(store: OccurrenceStore, pos: int, node_u: tuple, h: int, prefix_id) -> None:
    store.record(pos, node_u, h, prefix_id)


def query_extension(store: OccurrenceStore, pos: int, node_u: tuple, h_prime: int) -> set:
    return {pid for pid, _ in store.query(pos, node_u, h_prime)}


@dataclass
class _Task:
    deadline: int
    seq: int
    kind: str
    pattern: int
    end: int

    def key(self):
        return (self.deadline, self.seq)


@dataclass
class WorkCounter:
    total: int = 0
    last_delta: int = 0
    max_delta: int = 0


class Matcher:
    """Streaming k-mismatch dictionary matcher.

    ``dictionary`` is a sequence of patterns (strings or symbol sequences); pattern
    ids are their indices unless ``ids`` is given.
    """

    def __init__(
        self,
        dictionary: Sequence[Sequence],
        k: int,
        cfg: FieldConfig | None = None,
        *,
        seed: int | None = None,
        deamortised: bool = False,
        block: int | None = None,
        emit_mismatches: bool = False,
        short_only: bool = False,
        ids: Sequence[Hashable] | None = None,
        alphabet: Alphabet | None = None,
        record_tau: bool = False,
    ):
        if not dictionary:
            raise ValueError("empty dictionary")
        if k < 1:
            raise ValueError("k must be at least 1")
        if any(len(p) == 0 for p in dictionary):
            raise ValueError("patterns must be nonempty")
        self.cfg = cfg if cfg is not None else FieldConfig.from_seed(seed)
        self.k = k
        self.deamortised = deamortised
        self.emit_mismatches = emit_mismatches
        self.alphabet = alphabet if alphabet is not None else Alphabet(c for p in dictionary for c in p)
        self.patterns = [self.alphabet.encode(p) for p in dictionary]
        self.ids = list(ids) if ids is not None else list(range(len(dictionary)))
        self.d = len(self.patterns)
        self.m = max(len(p) for p in self.patterns)
        self.cfg.check_capacity(max(self.m, 1), error_budget=1e-6)
        self.block = block if block is not None else max(self.d, 2)
        if self.block < 2:
            raise ValueError("block length must be at least 2")
        self.record_tau = record_tau
        self.tau_hits: dict[int, list[int]] = {}
        self.work = WorkCounter()
        self._pattern_sk: dict[int, Sketch] = {}
        self._partition(short_only)
        self._build()

    # -- preprocessing ------------------------------------------------------

    def _partition(self, short_only: bool) -> None:
        k, D = self.k, self.block
        self.short: list[int] = []
        self.large: list[int] = []  # amortised D1
        self.case_i: list[int] = []
        self.case_ii: dict[int, int] = {}  # pattern -> length of the extended periodic suffix
        self.h_large: list[int] = []  # de-amortised: H with large-period 2d-suffix
        self.h_direct: list[int] = []  # de-amortised: H with small k-period
        self.h_ext: dict[int, int] = {}  # de-amortised: H with periodic proper suffix
        everything_short = short_only or self.d <= 2
        for i, p in enumerate(self.patterns):
            if everything_short or len(p) < 3 * D:
                self.short.append(i)
                continue
            if not self.deamortised:
                if k_period(p[-2 * D :], k) > D:
                    self.large.append(i)
                else:
                    tp = longest_small_period_suffix(p, k, D)
                    if tp == len(p):
                        self.case_i.append(i)
                    else:
                        self.case_ii[i] = tp + 1
            else:
                h = p[:-D]
                if k_period(h[-2 * D :], k) > D:
                    self.h_large.append(i)
                elif k_period(h, k) <= D:
                    self.h_direct.append(i)
                else:
                    self.h_ext[i] = longest_small_period_suffix(h, k, D) + 1

    def _tree(self, items: list) -> KErrataTree | None:
        if not items:
            return None
        return KErrataTree(items, self.k, self.cfg, pattern_sketches=True)

    def _build(self) -> None:
        P, D, k, cfg = self.patterns, self.block, self.k, self.cfg
        short_items = [(("s", i), P[i][::-1]) for i in self.short]
        if self.deamortised:
            long_ids = self.h_large + self.h_direct + list(self.h_ext)
            short_items += [(("q", i), P[i][-D:][::-1]) for i in self.h_large + list(self.h_ext)]
            self.tau_tree = self._tree([(("h", i), P[i][:-D][-2 * D :][::-1]) for i in self.h_large])
            self.direct_tree = self._tree([(("p", i), P[i][::-1]) for i in self.h_direct])
            self.ext_tree = self._tree([(("h", i), P[i][:-D][-n:][::-1]) for i, n in self.h_ext.items()])
            verify = [(i, P[i][:-D]) for i in self.h_large + list(self.h_ext)]
            self.l_span = max([len(P[i]) for i in self.h_direct] + [n for n in self.h_ext.values()] + [0])
        else:
            long_ids = self.large + self.case_i + list(self.case_ii)
            self.tau_tree = self._tree([(("p", i), P[i][-2 * D :][::-1]) for i in self.large])
            self.direct_tree = self._tree([(("p", i), P[i][::-1]) for i in self.case_i])
            self.ext_tree = self._tree([(("p", i), P[i][-n:][::-1]) for i, n in self.case_ii.items()])
            verify = [(i, P[i]) for i in self.large + list(self.case_ii)]
            self.l_span = max([len(P[i]) for i in self.case_i] + [n for n in self.case_ii.values()] + [0])
        self.long_ids = long_ids
        self.short_tree = self._tree(short_items)
        self.index = SubpatternIndex(verify, k, cfg, lag=D if self.deamortised else 0) if verify else None
        self.needs_l = self.l_span > 0
        self.short_span = max([len(P[i]) for i in self.short] + [D if self.deamortised and long_ids else 0])
        cap = max(self.short_span, 3 * D) + 2
        if self.emit_mismatches:
            cap = max(cap, self.m + 2)
        self.ring = PrefixRing(cfg, 4 * k, cap)
        self.ring_only = TextSource(self.ring, None)
        self.state: PeriodicSuffix = empty_suffix(0, cfg)
        self._pending_state: PeriodicSuffix | None = None
        self._update = None
        self._update_quota = math.ceil(update_steps(D, self.l_span, k) / D) if self.needs_l else 0
        self.store = OccurrenceStore(2 * D, k)
        self._q_nodes: dict[int, list] = {}
        if self.deamortised and self.short_tree is not None:
            nodes = self.short_tree.id_nodes()
            for i in self.h_large + list(self.h_ext):
                self._q_nodes[i] = nodes.get(("q", i), [])
        self._tasks: list[_Task] = []
        self._seq = 0
        self.pos = 0

    # -- streaming ----------------------------------------------------------

    def _lookup(self, tree: KErrataTree | None, query: ReversedText, mode: str):
        if tree is None or query.length <= 0:
            return []
        st = LookupStats()
        hits = tree.lookup(query, mode, st)
        self._tick(st.work)
        return hits

    def _tick(self, n: int) -> None:
        self._delta += n

    def _verify(self, i: int, end: int) -> int | None:
        before = self.index.work
        ev = self.index.evidence(i, end)
        res = verify_alignment(self.index, i, ev)
        self._tick(self.index.work - before + len(ev.failed))
        return res

    def _occurrence(self, i: int, end: int, dist: int) -> Occurrence:
        mism = None
        if self.emit_mismatches:
            p = self.patterns[i]
            psk = self._pattern_sk.get(i)
            if psk is None:
                psk = sk_of_string(p, self.k, self.cfg)
                self._pattern_sk[i] = psk
            v = sk_distance(psk, self.ring_only.sketch(end - len(p) + 1, end, self.k))
            if v is FAR or v.distance != dist:
                raise RuntimeError(f"mismatch recovery disagrees with distance {dist} for pattern {i} at {end}")
            dec = self.alphabet.decode
            mism = tuple((pos, dec(a), dec(b)) for pos, a, b in v.mismatches)
            self._tick(1)
        return Occurrence(end, self.ids[i], dist, mism)

    def _note_tau(self, i: int, r: int) -> None:
        if self.record_tau:
            self.tau_hits.setdefault(i, []).append(r)

    def process_char(self, c) -> list[Occurrence]:
        """Consume one text symbol; return the occurrences ending at it."""
        code = self.alphabet.code.get(c, self.alphabet.other)
        self._delta = 0
        self.pos += 1
        r = self.pos
        self.ring.push(code)
        self._tick(1)
        if self.index is not None:
            before = self.index.work
            self.index.feed(r, code)
            self._tick(self.index.work - before)
        found: dict[int, int] = {}
        if self.deamortised:
            self._step_deamortised(r, found)
        else:
            self._step_amortised(r, found)
        out = [self._occurrence(i, r, dist) for i, dist in sorted(found.items())]
        self._tick(len(out))
        w = self.work
        w.last_delta = self._delta
        w.total += self._delta
        w.max_delta = max(w.max_delta, self._delta)
        return out

    def feed(self, text: Iterable) -> list[Occurrence]:
        out: list[Occurrence] = []
        for c in text:
            out.extend(self.process_char(c))
        return out

    def _short_hits(self, r: int, found: dict) -> list:
        q = ReversedText(self.ring_only, r, max(1, r - self.short_span + 1))
        hits = self._lookup(self.short_tree, q, "any-prefix")
        rest = []
        for h in hits:
            tag, i = h.pattern_id
            if tag == "s":
                found[i] = h.distance
            else:
                rest.append(h)
        return rest

    def _step_amortised(self, r: int, found: dict) -> None:
        D, k, P = self.block, self.k, self.patterns
        self._short_hits(r, found)
        if self.tau_tree is not None and r >= 2 * D:
            q = ReversedText(self.ring_only, r, r - 2 * D + 1)
            for h in self._lookup(self.tau_tree, q, "exact-length"):
                i = h.pattern_id[1]
                self._note_tau(i, r)
                if r >= len(P[i]):
                    dist = self._verify(i, r)
                    if dist is not None:
                        found[i] = dist
        if self.needs_l:
            src = TextSource(self.ring, self.state)
            if self.direct_tree is not None:
                q = ReversedText(src, r, self.state.start)
                for h in self._lookup(self.direct_tree, q, "any-prefix"):
                    found[h.pattern_id[1]] = h.distance
            if self.ext_tree is not None:
                q = ReversedText(src, r, self.state.lead_start)
                for h in self._lookup(self.ext_tree, q, "any-prefix"):
                    i = h.pattern_id[1]
                    if r >= len(P[i]):
                        dist = self._verify(i, r)
                        if dist is not None:
                            found[i] = dist
            if r % D == 0:
                gen = update_L(TextSource(self.ring, self.state), r, self.l_span, D, k, self.state)
                steps = 0
                while True:
                    try:
                        next(gen)
                        steps += 1
                    except StopIteration as stop:
                        self.state = stop.value
                        break
                self._tick(steps)

    def _enqueue(self, kind: str, i: int, end: int) -> None:
        self._seq += 1
        self._tasks.append(_Task(end + self.block, self._seq, kind, i, end))

    def _run_tasks(self, r: int) -> None:
        if not self._tasks:
            return
        self._tasks.sort(key=_Task.key)
        done = 0
        while self._tasks and (done < 1 or self._tasks[0].deadline <= r):
            t = self._tasks.pop(0)
            done += 1
            h = self._verify(t.pattern, t.end)
            if h is None:
                continue
            for node in self._q_nodes.get(t.pattern, ()):
                self.store.record(t.end, node, h, t.pattern)
            self._tick(len(self._q_nodes.get(t.pattern, ())))

    def _advance_update(self, r: int) -> None:
        D = self.block
        if r > D and (r - 1) % D == 0:
            anchor = r - 1
            if self._update is not None:
                raise RuntimeError("periodic-suffix update overran its block")
            self._update = update_L(TextSource(self.ring, self.state), anchor, self.l_span, D, self.k, self.state)
            self._update_anchor = anchor
        if self._update is None and self._pending_state is None:
            return
        deadline = self._update_anchor + D
        quota = self._update_quota if r < deadline else None
        steps = 0
        while self._update is not None and (quota is None or steps < quota):
            try:
                next(self._update)
                steps += 1
            except StopIteration as stop:
                self._pending_state = stop.value
                self._update = None
                break
        self._tick(steps)
        if r == deadline:
            if self._update is not None or self._pending_state is None:
                raise RuntimeError("periodic-suffix update missed its deadline")
            self.state = self._pending_state
            self._pending_state = None

    def _step_deamortised(self, r: int, found: dict) -> None:
        D, P = self.block, self.patterns
        if self.needs_l:
            self._advance_update(r)
        self._run_tasks(r)
        # tails: join with stored head occurrences ending d positions earlier
        tails = self._short_hits(r, found)
        seen = set()
        for h in tails:
            key = (h.node, h.distance)
            if key in seen:
                continue
            seen.add(key)
            for i, hh in self.store.query(r - D, h.node, h.distance):
                found[i] = hh + h.distance
            self._tick(self.k + 1)
        if self.tau_tree is not None and r >= 2 * D:
            q = ReversedText(self.ring_only, r, r - 2 * D + 1)
            for h in self._lookup(self.tau_tree, q, "exact-length"):
                i = h.pattern_id[1]
                self._note_tau(i, r)
                if r >= len(P[i]) - D:
                    self._enqueue("head", i, r)
        if self.needs_l:
            src = TextSource(self.ring, self.state)
            if self.direct_tree is not None:
                q = ReversedText(src, r, self.state.start)
                for h in self._lookup(self.direct_tree, q, "any-prefix"):
                    found[h.pattern_id[1]] = h.distance
            if self.ext_tree is not None:
                q = ReversedText(src, r, self.state.lead_start)
                for h in self._lookup(self.ext_tree, q, "any-prefix"):
                    i = h.pattern_id[1]
                    if r >= len(P[i]) - D:
                        self._enqueue("head", i, r)
        self.store.expire(r)

    # -- accounting ---------------------------------------------------------

    def partition(self) -> dict:
        if self.deamortised:
            return {
                "short": list(self.short),
                "head_large": list(self.h_large),
                "head_direct": list(self.h_direct),
                "head_extension": sorted(self.h_ext),
            }
        return {
            "short": list(self.short),
            "large": list(self.large),
            "case_i": list(self.case_i),
            "case_ii": sorted(self.case_ii),
        }

    def space(self) -> dict:
        trees = [t for t in (self.short_tree, self.tau_tree, self.direct_tree, self.ext_tree) if t is not None]
        nodes = sum(t.size() for t in trees)
        sketches = nodes + self.ring.cap
        D = self.state.D
        if D is not None:
            sketches += sum(len(v) for v in D.block_suffix.values()) + len(D.l_suffix)
        return {"trie_nodes": nodes, "sketches": sketches, "store_entries": self.store.live_entries()}


def preprocess(dictionary: Sequence[Sequence], k: int, cfg: FieldConfig | None = None, **kwargs) -> Matcher:
    return Matcher(dictionary, k, cfg, **kwargs)


def process_char(matcher: Matcher, c) -> list[Occurrence]:
    if matcher.deamortised:
        raise ValueError("matcher is in de-amortised mode; use process_char_deamortised")
    return matcher.process_char(c)


def process_char_deamortised(matcher: Matcher, c) -> list[Occurrence]:
    if not matcher.deamortised:
        raise ValueError("matcher is in amortised mode; use process_char")
    return matcher.process_char(c)


def work_units(matcher: Matcher) -> WorkCounter:
    w = matcher.work
    return WorkCounter(w.total, w.last_delta, w.max_delta)
