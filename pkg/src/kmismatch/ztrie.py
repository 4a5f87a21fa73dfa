"""Compact tries searched by fingerprints (z-fast tries).

Every node stores the fingerprint and sketch of its label. The handle of a
node is the prefix of its label whose length is the 2-fattest number in the
node's skip interval ``(depth(parent), depth(node)]``; a fat binary search over
query lengths then finds the exit node with O(log m) handle probes.

Queries are never materialised. A search consumes a :class:`QueryView`, which
exposes fingerprints, characters and sketches of prefixes of a virtual string
``Q[offset+1..]`` with a few characters overwritten ("fixups").
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence

from .fingerprint import FieldConfig
from .sketch import FAR, Sketch, empty_sketch, sk_distance, sk_fix, sk_of_string


class QueryAccess(Protocol):
    """Random access to substrings of a fixed query string (1-based, inclusive)."""

    cfg: FieldConfig
    length: int

    def phi(self, a: int, b: int) -> int: ...

    def char(self, i: int) -> int: ...

    def sketch(self, a: int, b: int, k: int) -> Sketch: ...


class SequenceQuery:
    """QueryAccess over an in-memory sequence; used by tests and the naive paths."""

    def __init__(self, seq: Sequence[int], cfg: FieldConfig):
        self.seq = list(seq)
        self.cfg = cfg
        self.length = len(self.seq)
        p, r = cfg.p, cfg.r
        pre = [0]
        for c in self.seq:
            pre.append((pre[-1] * r + c) % p)
        self._pre = pre
        self._sk: dict = {}

    def phi(self, a: int, b: int) -> int:
        if b < a:
            return 0
        cfg = self.cfg
        return (self._pre[b] - self._pre[a - 1] * cfg.rpow(b - a + 1)) % cfg.p

    def char(self, i: int) -> int:
        return self.seq[i - 1]

    def sketch(self, a: int, b: int, k: int) -> Sketch:
        key = (a, b, k)
        s = self._sk.get(key)
        if s is None:
            s = sk_of_string(self.seq[a - 1 : b], k, self.cfg)
            self._sk[key] = s
        return s


class QueryView:
    """The virtual string ``Q[offset+1..]`` with characters replaced by ``fixups``.

    ``fixups`` is a tuple of (position, old, new), positions relative to the view.
    """

    __slots__ = ("base", "offset", "fixups", "length", "_fixmap")

    def __init__(self, base: QueryAccess, offset: int = 0, fixups: tuple = ()):
        self.base = base
        self.offset = offset
        self.fixups = tuple(sorted(fixups))
        self.length = base.length - offset
        self._fixmap = {pos: new for pos, _, new in self.fixups}

    def prefix_phi(self, ell: int) -> int:
        val = self.base.phi(self.offset + 1, self.offset + ell)
        if self.fixups:
            cfg = self.base.cfg
            for pos, old, new in self.fixups:
                if pos > ell:
                    break
                val += (new - old) * cfg.rpow(ell - pos)
            val %= cfg.p
        return val

    def char(self, i: int) -> int:
        c = self._fixmap.get(i)
        if c is not None:
            return c
        return self.base.char(self.offset + i)

    def prefix_sketch(self, ell: int, k: int) -> Sketch:
        if ell == 0:
            return empty_sketch(k, self.base.cfg)
        s = self.base.sketch(self.offset + 1, self.offset + ell, k)
        if self.fixups:
            s = sk_fix(s, [f for f in self.fixups if f[0] <= ell])
        return s

    def shifted(self, delta: int) -> "QueryView":
        fx = tuple((pos - delta, old, new) for pos, old, new in self.fixups if pos > delta)
        return QueryView(self.base, self.offset + delta, fx)

    def with_fixups(self, extra: Iterable[tuple]) -> "QueryView":
        merged = dict((f[0], f) for f in self.fixups)
        for pos, old, new in extra:
            prev = merged.get(pos)
            if prev is not None:
                old = prev[1]
            merged[pos] = (pos, old, new)
        return QueryView(self.base, self.offset, tuple(f for f in merged.values() if f[1] != f[2]))


def fattest(a: int, b: int) -> int:
    """The number in (a, b] with the most trailing zero bits."""
    if a + 1 == b:
        return b
    h = (a ^ b).bit_length() - 1
    return b & ~((1 << h) - 1)


@dataclass(frozen=True, slots=True)
class Locus:
    """Result of a prefix search.

    ``node`` is the deepest node whose label is a prefix of the query; ``exit`` is
    its child whose edge the query enters without reaching the lower end (or None,
    in which case the match length is exactly ``depth``).
    """

    node: int
    depth: int
    exit: int | None
    probes: int = 0

    @property
    def highest(self) -> int:
        return self.node if self.exit is None else self.exit


class CompactTrie:
    """Immutable compact trie with fingerprint handles, sketches and marks."""

    def __init__(self, strings: Sequence[tuple[object, Sequence[int]]], cfg: FieldConfig, sketch_budget: int = 0, allow_empty: bool = False):
        if not strings and not allow_empty:
            raise ValueError("cannot build a trie over an empty string set")
        self.cfg = cfg
        self.sketch_budget = sketch_budget
        groups: dict[tuple, list] = {}
        for ident, s in strings:
            groups.setdefault(tuple(s), []).append(ident)
        self.n_strings = len(strings)
        self.depth: list[int] = []
        self.parent: list[int] = []
        self.children: list[dict] = []
        self.rep: list[tuple] = []
        self.marks: list[list] = []
        self._new(0, -1, ())
        self._build(sorted(groups), groups)
        self._annotate()

    def _new(self, depth: int, parent: int, rep: tuple) -> int:
        self.depth.append(depth)
        self.parent.append(parent)
        self.children.append({})
        self.rep.append(rep)
        self.marks.append([])
        return len(self.depth) - 1

    def _build(self, uniq: list, groups: dict) -> None:
        depth, parent, children, rep = self.depth, self.parent, self.children, self.rep
        stack = [0]
        prev: tuple | None = None
        for s in uniq:
            ell = 0
            if prev is not None:
                lim = min(len(prev), len(s))
                while ell < lim and prev[ell] == s[ell]:
                    ell += 1
            last = -1
            while depth[stack[-1]] > ell:
                last = stack.pop()
            top = stack[-1]
            if depth[top] < ell:
                mid = self._new(ell, top, s)
                children[top][s[depth[top]]] = mid
                parent[last] = mid
                children[mid][rep[last][ell]] = last
                stack.append(mid)
                top = mid
            if len(s) == ell:
                self.marks[top].extend(groups[s])
            else:
                leaf = self._new(len(s), top, s)
                children[top][s[ell]] = leaf
                self.marks[leaf].extend(groups[s])
                stack.append(leaf)
            prev = s

    def _annotate(self) -> None:
        n = len(self.depth)
        cfg = self.cfg
        p, r = cfg.p, cfg.r
        order: list[int] = []
        tin = [0] * n
        tout = [0] * n
        stack = [(0, False)]
        clock = 0
        while stack:
            v, done = stack.pop()
            if done:
                tout[v] = clock
                continue
            tin[v] = clock
            clock += 1
            order.append(v)
            stack.append((v, True))
            for c in sorted(self.children[v], reverse=True):
                stack.append((self.children[v][c], False))
        self.tin, self.tout, self.order = tin, tout, order

        leaves = [0] * n
        for v in reversed(order):
            if not self.children[v]:
                leaves[v] = 1
            pv = self.parent[v]
            if pv >= 0:
                leaves[pv] += leaves[v]
        self.leaves = leaves
        heavy = [-1] * n
        for v in range(n):
            best = None
            for c, u in self.children[v].items():
                key = (-leaves[u], c)
                if best is None or key < best[0]:
                    best = (key, u)
            if best is not None:
                heavy[v] = best[1]
        self.heavy = heavy

        nma = [-1] * n
        for v in order:
            if self.marks[v]:
                nma[v] = v
            elif self.parent[v] >= 0:
                nma[v] = nma[self.parent[v]]
        self.nma = nma

        # prefix fingerprints of each distinct representative string
        pref: dict[tuple, list] = {}
        node_phi = [0] * n
        handles: dict[tuple, int] = {}
        for v in range(n):
            s = self.rep[v]
            pp = pref.get(s)
            if pp is None:
                pp = [0]
                for c in s:
                    pp.append((pp[-1] * r + c) % p)
                pref[s] = pp
            node_phi[v] = pp[self.depth[v]]
            if v:
                f = fattest(self.depth[self.parent[v]], self.depth[v])
                handles[(f, pp[f])] = v
        self.node_phi = node_phi
        self.handles = handles
        if self.sketch_budget > 0:
            self.sketch = [sk_of_string(self.rep[v][: self.depth[v]], self.sketch_budget, cfg) for v in range(n)]
        else:
            self.sketch = None

    # -- structure queries -------------------------------------------------

    def __len__(self) -> int:
        return len(self.depth)

    def label(self, v: int) -> tuple:
        return self.rep[v][: self.depth[v]]

    def is_prefix(self, a: int, b: int) -> bool:
        """True iff label(a) is a prefix of label(b)."""
        return self.tin[a] <= self.tin[b] and self.tout[b] <= self.tout[a]

    def marked_between(self, lower: int, upper: int) -> list[int]:
        """Marked nodes on the path from ``lower`` up to ``upper`` (both inclusive)."""
        out = []
        v = self.nma[lower]
        du = self.depth[upper]
        while v >= 0 and self.depth[v] >= du:
            out.append(v)
            pv = self.parent[v]
            v = self.nma[pv] if pv >= 0 else -1
        return out

    def heavy_paths_on(self, v: int) -> int:
        """Number of heavy paths met on the root-to-``v`` path."""
        count = 1
        while self.parent[v] >= 0:
            pv = self.parent[v]
            if self.heavy[pv] != v:
                count += 1
            v = pv
        return count

    # -- searching ---------------------------------------------------------

    def prefix_search(self, view: QueryView, start: int = 0) -> Locus:
        """Fat binary search for the deepest node whose label prefixes ``view``.

        ``start`` must be a node whose label is already known to prefix the view.
        """
        depth, handles, node_phi = self.depth, self.handles, self.node_phi
        n = view.length
        node = start
        a = depth[start]
        b = n
        probes = 0
        while a < b:
            f = fattest(a, b)
            probes += 1
            v = handles.get((f, view.prefix_phi(f)))
            if v is None or not self.is_prefix(node, v):
                b = f - 1
                continue
            dv = depth[v]
            if dv <= n and view.prefix_phi(dv) == node_phi[v]:
                node = v
                a = dv
            else:
                node = self.parent[v]
                a = depth[node]
                return Locus(node, a, v, probes)
        exit_ = None
        if a < n:
            exit_ = self.children[node].get(view.char(a + 1))
        return Locus(node, a, exit_, probes)

    def fast_forward(self, lower: int, view: QueryView, credit: int):
        """Mismatches between label(lower) and the aligned view prefix, or None if over ``credit``."""
        dl = self.depth[lower]
        if dl > view.length or self.sketch is None:
            return None
        k = self.sketch_budget
        verdict = sk_distance(view.prefix_sketch(dl, k), self.sketch[lower])
        if verdict is FAR or verdict.distance > credit:
            return None
        return verdict.mismatches


def trie_build(strings: Sequence[tuple[object, Sequence[int]]], sketch_budget: int, cfg: FieldConfig) -> CompactTrie:
    return CompactTrie(strings, cfg, sketch_budget)


def prefix_search_root(t: CompactTrie, q: QueryAccess) -> Locus:
    return t.prefix_search(QueryView(q))


def prefix_search_from_node(t: CompactTrie, u: int, q: QueryAccess, fixups: Sequence[tuple] = (), budget: int | None = None) -> Locus:
    """Search the virtual string label(u)·Q[|label(u)|+1..] starting at ``u``.

    ``fixups`` are (position, old, new) triples turning the query prefix into label(u).
    """
    if budget is not None and len(fixups) > budget:
        raise ValueError(f"{len(fixups)} fixups exceed the mismatch budget {budget}")
    return t.prefix_search(QueryView(q, 0, tuple(fixups)), start=u)


def fast_forward_edge(t: CompactTrie, lower: int, q: QueryAccess, credit: int, offset: int = 0, fixups: Sequence[tuple] = ()):
    """Hamming mismatches on the root-to-``lower`` label against the aligned query, or None."""
    return t.fast_forward(lower, QueryView(q, offset, tuple(fixups)), credit)


def is_prefix(t: CompactTrie, a: int, b: int) -> bool:
    return t.is_prefix(a, b)
