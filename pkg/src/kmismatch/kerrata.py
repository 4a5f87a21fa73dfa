"""Randomised k-errata tree: dictionary look-up with up to k mismatches.

The structure is a compact trie decomposed into heavy paths plus, recursively,
(k-1)-errata trees over substitution tries:

* vertical substitution trie of a heavy-path node ``u``: the strings hanging off
  ``u`` with their character at ``depth(u)+1`` replaced by the heavy character;
* horizontal substitution trie of a light child ``c`` of ``u``: the strings below
  ``c`` with their first ``depth(u)+1`` characters cut off.

Substitution tries of one heavy path (vertical) or of one node (horizontal) are
grouped by a weight-balanced binary tree; every grouping node owns a merged trie
and its (k-1)-errata tree, so a contiguous range of substitution tries is
searched through O(log d) group tries.

A look-up spends one unit of mismatch credit per recursion into a substitution
trie, and ``e`` units when it fast-forwards down an edge whose label differs from
the query in ``e`` positions (decoded from sketches).
"""

from __future__ import annotations

import itertools
from bisect import bisect_left, bisect_right
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .fingerprint import FieldConfig
from .sketch import FAR, sk_distance, sk_of_string
from .ztrie import CompactTrie, QueryAccess, QueryView

_uid = itertools.count()


@dataclass(frozen=True, slots=True)
class LookupHit:
    pattern_id: object
    matched_length: int
    distance: int
    node: tuple = ()
    mismatches: tuple | None = None


@dataclass
class LookupStats:
    prefix_searches: int = 0
    hits: int = 0

    @property
    def work(self) -> int:
        return self.prefix_searches + self.hits


class _GroupTree:
    """Weight-balanced binary tree over a sequence of substitution string sets."""

    __slots__ = ("lo", "hi", "left", "right", "tree")

    def __init__(self, items: list[list], lo: int, hi: int, weights: list[int], capacity: int, cfg: FieldConfig):
        self.lo, self.hi = lo, hi
        merged = [s for it in items[lo:hi] for s in it]
        self.tree = KErrataTree(merged, capacity, cfg)
        if hi - lo == 1:
            self.left = self.right = None
            return
        total = sum(weights[lo:hi])
        acc = 0
        best, split = None, lo + 1
        for s in range(lo + 1, hi):
            acc += weights[s - 1]
            score = abs(2 * acc - total)
            if best is None or score < best:
                best, split = score, s
        self.left = _GroupTree(items, lo, split, weights, capacity, cfg)
        self.right = _GroupTree(items, split, hi, weights, capacity, cfg)

    def cover(self, lo: int, hi: int, out: list) -> None:
        """Canonical group tries covering items [lo, hi)."""
        if hi <= self.lo or self.hi <= lo or lo >= hi:
            return
        if lo <= self.lo and self.hi <= hi:
            out.append(self.tree)
            return
        self.left.cover(lo, hi, out)
        self.right.cover(lo, hi, out)

    def walk(self):
        yield self.tree
        if self.left is not None:
            yield from self.left.walk()
            yield from self.right.walk()


class KErrataTree:
    """k-errata tree over ``strings`` = [(pattern_id, sequence)], mismatch capacity ``k``."""

    def __init__(self, strings: Sequence[tuple[object, Sequence[int]]], k: int, cfg: FieldConfig, pattern_sketches: bool = False):
        if k < 0:
            raise ValueError("mismatch capacity must be non-negative")
        self.uid = next(_uid)
        self.capacity = k
        self.cfg = cfg
        self.trie = CompactTrie(strings, cfg, sketch_budget=k, allow_empty=True)
        # per heavy path: the path's node positions that own vertical tries
        self._vpos: dict[int, tuple[int, int]] = {}
        self._vpaths: list[tuple[list[int], _GroupTree | None]] = []
        # per node with light children: (sorted light-child chars, group tree)
        self._hgroups: dict[int, tuple[list, _GroupTree]] = {}
        if k > 0:
            self._build_substitutions()
        self.pattern_sketch = None
        if pattern_sketches and k > 0:
            self.pattern_sketch = {pid: sk_of_string(s, k, cfg) for pid, s in strings}

    # -- construction -------------------------------------------------------

    def _subtree_strings(self, c: int, cut: int, replace: tuple | None = None) -> list:
        t = self.trie
        out = []
        for w in t.order[t.tin[c] : t.tout[c]]:
            if not t.marks[w]:
                continue
            s = t.label(w)
            if replace is not None:
                pos, ch = replace
                s = s[:pos] + (ch,) + s[pos + 1 :]
            s = s[cut:]
            out.extend((pid, s) for pid in t.marks[w])
        return out

    def _build_substitutions(self) -> None:
        t = self.trie
        k, cfg = self.capacity, self.cfg
        heads = [0] + [c for v in range(len(t)) for c in t.children[v].values() if t.heavy[v] != c]
        for head in heads:
            path_id = len(self._vpaths)
            positions: list[int] = []
            items: list[list] = []
            v, idx = head, 0
            while v >= 0:
                self._vpos[v] = (path_id, idx)
                h = t.heavy[v]
                if h >= 0 and len(t.children[v]) > 1:
                    dv = t.depth[v]
                    a = t.rep[h][dv]
                    strs = []
                    for ch, c in t.children[v].items():
                        if c != h:
                            strs.extend(self._subtree_strings(c, 0, (dv, a)))
                    positions.append(idx)
                    items.append(strs)
                v = h
                idx += 1
            group = _GroupTree(items, 0, len(items), [len(x) for x in items], k - 1, cfg) if items else None
            self._vpaths.append((positions, group))
        for v in range(len(t)):
            h = t.heavy[v]
            light = sorted(ch for ch, c in t.children[v].items() if c != h)
            if not light:
                continue
            dv = t.depth[v]
            items = [self._subtree_strings(t.children[v][ch], dv + 1) for ch in light]
            self._hgroups[v] = (light, _GroupTree(items, 0, len(items), [len(x) for x in items], k - 1, cfg))

    # -- accounting ---------------------------------------------------------

    def all_trees(self):
        """This tree and every recursively nested errata tree."""
        yield self
        for _, group in self._vpaths:
            if group is not None:
                for sub in group.walk():
                    yield from sub.all_trees()
        for _, group in self._hgroups.values():
            for sub in group.walk():
                yield from sub.all_trees()

    def id_copies(self) -> Counter:
        """Number of marks per pattern id across all tries of the structure."""
        cnt: Counter = Counter()
        for tree in self.all_trees():
            for ids in tree.trie.marks:
                cnt.update(ids)
        return cnt

    def id_nodes(self) -> dict:
        """Every (tree uid, node) marked with each pattern id."""
        out: dict = {}
        for tree in self.all_trees():
            for v, ids in enumerate(tree.trie.marks):
                for pid in ids:
                    out.setdefault(pid, []).append((tree.uid, v))
        return out

    def size(self) -> int:
        """Total number of trie nodes."""
        return sum(len(tree.trie) for tree in self.all_trees())

    # -- queries ------------------------------------------------------------

    def lookup(self, q: QueryAccess, mode: str = "exact-length", stats: LookupStats | None = None) -> list[LookupHit]:
        """Patterns within Hamming distance ``capacity`` of Q (``exact-length``) or of a prefix of Q (``any-prefix``)."""
        if mode not in ("exact-length", "any-prefix"):
            raise ValueError(f"unknown lookup mode {mode!r}")
        if stats is None:
            stats = LookupStats()
        out: dict = {}
        if self.trie.n_strings:
            self._search(QueryView(q), 0, self.capacity, 0, 0, out, mode == "exact-length", stats)
        stats.hits += len(out)
        return list(out.values())

    def mismatches(self, q: QueryAccess, pattern_id) -> tuple:
        """Mismatch triples (position, query char, pattern char) of a reported hit."""
        if self.pattern_sketch is None:
            raise ValueError("tree was built without pattern sketches")
        ps = self.pattern_sketch[pattern_id]
        verdict = sk_distance(q.sketch(1, ps.len, self.capacity), ps)
        if verdict is FAR:
            raise ValueError(f"pattern {pattern_id!r} is not within distance {self.capacity}")
        return verdict.mismatches

    def _report(self, v: int, acc: int, off: int, out: dict) -> None:
        t = self.trie
        length = off + t.depth[v]
        for pid in t.marks[v]:
            key = (pid, length)
            prev = out.get(key)
            if prev is None or prev.distance > acc:
                out[key] = LookupHit(pid, length, acc, (self.uid, v))

    def _search(self, view: QueryView, start: int, credit: int, acc: int, off: int, out: dict, exact: bool, stats: LookupStats) -> None:
        t = self.trie
        stats.prefix_searches += 1
        loc = t.prefix_search(view, start)
        n = view.length
        g = loc.node
        if exact:
            if loc.exit is None and loc.depth == n and t.marks[g]:
                self._report(g, acc, off, out)
        else:
            for w in t.marked_between(g, start):
                self._report(w, acc, off, out)
        if credit == 0:
            return
        depth, parent, heavy = t.depth, t.parent, t.heavy

        path = [g]
        while path[-1] != start:
            path.append(parent[path[-1]])
        path.reverse()
        steps = [(path[i], path[i + 1]) for i in range(len(path) - 1)]
        if loc.exit is not None:
            steps.append((g, loc.exit))

        run: list[int] = []
        for v, w in steps:
            if w == heavy[v]:
                run.append(v)
                continue
            if run:
                self._vertical(run, view, credit, acc, off, out, exact, stats)
                run = []
            self._horizontal(v, w, view, credit, acc, off, out, exact, stats)
            self._continue(v, heavy[v], view, credit, acc, off, out, exact, stats)
        if run:
            self._vertical(run, view, credit, acc, off, out, exact, stats)

        if loc.exit is not None:
            self._continue(g, loc.exit, view, credit, acc, off, out, exact, stats)
        elif n > depth[g] and t.children[g]:
            self._horizontal(g, None, view, credit, acc, off, out, exact, stats)
            self._continue(g, heavy[g], view, credit, acc, off, out, exact, stats)

    def _vertical(self, run: list[int], view, credit, acc, off, out, exact, stats) -> None:
        path_id, first = self._vpos[run[0]]
        _, last = self._vpos[run[-1]]
        positions, group = self._vpaths[path_id]
        if group is None:
            return
        lo = bisect_left(positions, first)
        hi = bisect_right(positions, last)
        if lo >= hi:
            return
        trees: list = []
        group.cover(lo, hi, trees)
        for sub in trees:
            if sub.trie.n_strings:
                sub._search(view, 0, credit - 1, acc + 1, off, out, exact, stats)

    def _horizontal(self, v: int, skip_child: int | None, view, credit, acc, off, out, exact, stats) -> None:
        entry = self._hgroups.get(v)
        if entry is None:
            return
        t = self.trie
        dv = t.depth[v]
        if view.length < dv + 1:
            return
        chars, group = entry
        trees: list = []
        if skip_child is None:
            group.cover(0, len(chars), trees)
        else:
            i = bisect_left(chars, t.rep[skip_child][dv])
            group.cover(0, i, trees)
            group.cover(i + 1, len(chars), trees)
        if not trees:
            return
        sub_view = view.shifted(dv + 1)
        for sub in trees:
            sub._search(sub_view, 0, credit - 1, acc + 1, off + dv + 1, out, exact, stats)

    def _continue(self, x: int, y: int, view, credit, acc, off, out, exact, stats) -> None:
        """Fast-forward from node ``x`` down to its child ``y`` and keep searching there."""
        if y < 0:
            return
        t = self.trie
        if t.depth[y] > view.length:
            return
        mism = t.fast_forward(y, view, credit)
        if mism is None:
            stats.prefix_searches += 1
            return
        fixed = view.with_fixups((pos, a, b) for pos, a, b in mism)
        self._search(fixed, y, credit - len(mism), acc + len(mism), off, out, exact, stats)


def build_kerrata(dictionary: Sequence[tuple[object, Sequence[int]]], k: int, cfg: FieldConfig) -> KErrataTree:
    return KErrataTree(dictionary, k, cfg, pattern_sketches=True)


def lookup(t: KErrataTree, q: QueryAccess, mode: str = "exact-length") -> list[LookupHit]:
    return t.lookup(q, mode)
