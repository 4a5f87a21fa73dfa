"""Small-period machinery: k-periods, the periodic text suffix L and its structure D.

At every block boundary ``B = j*d`` the stream keeps ``L``, the longest suffix of
``T[B-m+1..B]`` whose 2k-period is at most ``d`` (its copy shifted by some
``rho <= d`` differs in at most 4k positions). ``L`` is cut into blocks of length
``rho``; only the O(k) blocks that differ from their predecessor are stored,
with sketches of their suffixes, and any suffix sketch of ``L`` is rebuilt from a
stored block, a power of the block, and the stored sketch at the next
mismatch-containing block.

Only the sketches of the last few text prefixes are kept (:class:`PrefixRing`);
everything older is reached through ``L``.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Generator, Sequence

from .fingerprint import EMPTY_FP, FieldConfig, Fingerprint, fp_concat, fp_power, fp_split_prefix
from .sketch import (
    FAR,
    Sketch,
    empty_sketch,
    sk_from_absolute,
    sk_concat,
    sk_distance,
    sk_of_string,
    sk_power,
    sk_reverse,
    sk_split,
    sk_truncate,
)


def k_period(s: Sequence[int], k: int) -> int:
    """Minimal pi > 0 with HD(S[pi+1..], S[..m-pi]) <= 2k."""
    m = len(s)
    if m == 0:
        raise ValueError("k-period of an empty string is undefined")
    limit = 2 * k
    for pi in range(1, m):
        bad = 0
        for i in range(m - pi):
            if s[i] != s[i + pi]:
                bad += 1
                if bad > limit:
                    break
        if bad <= limit:
            return pi
    return m


def longest_small_period_suffix(s: Sequence[int], k: int, d: int) -> int:
    """Length of the longest suffix of ``s`` whose k-period is at most ``d``."""
    for ell in range(len(s), 0, -1):
        if k_period(s[len(s) - ell :], k) <= d:
            return ell
    return 0


class PrefixRing:
    """Sketches (budget ``budget``) and fingerprints of the last ``cap`` text prefixes."""

    def __init__(self, cfg: FieldConfig, budget: int, cap: int):
        self.cfg = cfg
        self.budget = budget
        self.cap = cap
        self.pos = 0
        self._phi = [None] * cap
        self._phi2 = [None] * cap
        self._fp = [None] * cap
        self._char = [0] * cap
        self._phi[0] = (0,) * (2 * budget + 1)
        self._phi2[0] = (0,) * (budget + 1)
        self._fp[0] = EMPTY_FP
        self.work = 0
        self._memo: dict = {}

    def push(self, c: int) -> None:
        cfg = self.cfg
        p = cfg.p
        prev = self.pos % self.cap
        i = self.pos + 1
        slot = i % self.cap
        phi, phi2 = list(self._phi[prev]), list(self._phi2[prev])
        c2 = c * c % p
        x = 1
        for j in range(len(phi)):
            phi[j] = (phi[j] + c * x) % p
            if j < len(phi2):
                phi2[j] = (phi2[j] + c2 * x) % p
            x = x * i % p
        f = self._fp[prev]
        rl = cfg.rpow(i)
        fp = Fingerprint((f.phi * cfg.r + c) % p, (f.phi_rev + c * f.r_len) % p, rl, cfg.rpow_inv(i), i)
        self._phi[slot], self._phi2[slot], self._fp[slot] = tuple(phi), tuple(phi2), fp
        self._char[slot] = c
        self.pos = i
        self.work += 1
        self._memo.clear()

    @property
    def low(self) -> int:
        """Smallest prefix length still held."""
        return max(0, self.pos - self.cap + 1)

    def holds(self, s: int, e: int) -> bool:
        """True iff T[s..e] can be served from the ring alone."""
        return s - 1 >= self.low and e <= self.pos

    def prefix_sketch(self, i: int, budget: int | None = None) -> Sketch:
        if not self.low <= i <= self.pos:
            raise ValueError(f"prefix {i} outside the ring [{self.low}, {self.pos}]")
        kb = self.budget if budget is None else budget
        slot = i % self.cap
        return Sketch(self.cfg, kb, self._phi[slot][: 2 * kb + 1], self._phi2[slot][: kb + 1], self._fp[slot], i)

    def sketch(self, s: int, e: int, budget: int, reverse: bool = False) -> Sketch:
        """Sketch of T[s..e], or of its reverse."""
        if e < s:
            return empty_sketch(budget, self.cfg)
        key = (s, e, budget, reverse)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if not (self.low <= s - 1 and e <= self.pos):
            raise ValueError(f"T[{s}..{e}] outside the ring [{self.low}, {self.pos}]")
        self.work += 1
        p = self.cfg.p
        nb, nb2 = 2 * budget + 1, budget + 1
        hi, lo = e % self.cap, (s - 1) % self.cap
        phi = [(x - y) % p for x, y in zip(self._phi[hi][:nb], self._phi[lo][:nb])]
        phi2 = [(x - y) % p for x, y in zip(self._phi2[hi][:nb2], self._phi2[lo][:nb2])]
        out = sk_from_absolute(phi, phi2, self.fp(s, e), s, budget, self.cfg, reverse)
        self._memo[key] = out
        return out

    def fp(self, s: int, e: int) -> Fingerprint:
        if e < s:
            return EMPTY_FP
        if not self.holds(s, e):
            raise ValueError(f"T[{s}..{e}] outside the ring")
        cfg = self.cfg
        p = cfg.p
        fz = self._fp[e % self.cap]
        fx = self._fp[(s - 1) % self.cap]
        r_y = fz.r_len * fx.r_len_inv % p
        return Fingerprint(
            (fz.phi - fx.phi * r_y) % p,
            (fz.phi_rev - fx.phi_rev) * fx.r_len_inv % p,
            r_y,
            fz.r_len_inv * fx.r_len % p,
            e - s + 1,
        )

    def char(self, i: int) -> int:
        if not (self.pos - self.cap < i <= self.pos and i >= 1):
            raise ValueError(f"character {i} outside the ring")
        return self._char[i % self.cap]


@dataclass
class DStructure:
    """Mismatch-containing blocks of L with the sketches needed to rebuild any suffix."""

    rho: int
    blocks: list[int]
    block_suffix: dict[int, list[Sketch]]
    l_suffix: dict[int, Sketch]


@dataclass
class PeriodicSuffix:
    """L = T[start..boundary] with 2k-period ``rho``; ``lead`` is T[start-1] (None if absent)."""

    boundary: int
    start: int
    rho: int
    len: int
    D: DStructure | None = None
    lead: int | None = None
    cfg: FieldConfig | None = None
    work: int = 0

    @property
    def lead_start(self) -> int:
        return self.start - 1 if self.lead is not None else self.start

    def covers(self, x: int) -> bool:
        return self.lead_start <= x <= self.boundary + 1

    def suffix_sketch(self, x: int, budget: int) -> Sketch:
        """Sketch of T[x..boundary] for ``lead_start <= x <= boundary + 1``."""
        return self._suffix(x, budget, False)

    def suffix_fp(self, x: int) -> Fingerprint:
        return self._suffix(x, 0, True)

    def char(self, x: int) -> int:
        a = self.suffix_fp(x)
        b = self.suffix_fp(x + 1)
        return fp_split_prefix(a, b, self.cfg).phi

    def _suffix(self, x: int, budget: int, fp_only: bool):
        cfg = self.cfg
        if not self.covers(x):
            raise ValueError(f"position {x} outside L' = T[{self.lead_start}..{self.boundary}]")
        self.work += 1
        if fp_only:
            empty = EMPTY_FP
            cat = lambda a, b: fp_concat(a, b, cfg)
            cut = lambda whole, suffix: fp_split_prefix(whole, suffix, cfg)
            pw = lambda a, t: fp_power(a, t, cfg)
            conv = lambda s: s.fp
        else:
            empty = empty_sketch(budget, cfg)
            cat = sk_concat
            cut = lambda whole, suffix: sk_split(whole, suffix, "suffix")
            pw = sk_power
            conv = lambda s: sk_truncate(s, budget)
        if x == self.boundary + 1:
            return empty
        if x == self.start - 1:
            single = sk_of_string((self.lead,), budget, cfg)
            return cat(single.fp if fp_only else single, self._suffix(self.start, budget, fp_only))
        D = self.D
        rho = D.rho
        rel = x - self.start
        a = rel // rho + 1
        o = rel % rho + 1
        i = bisect_right(D.blocks, a) - 1
        h = D.blocks[i]
        nb = D.blocks[i + 1] if i + 1 < len(D.blocks) else None
        end = self.start + (nb - 1) * rho - 1 if nb is not None else self.boundary
        ln = end - x + 1
        suf = D.block_suffix[h]
        bl = len(suf) - 1
        first = bl - o + 1
        if ln <= first:
            piece = cut(conv(suf[o - 1]), conv(suf[o - 1 + ln]))
        else:
            t, rem = divmod(ln - first, rho)
            whole = conv(suf[0])
            piece = cat(conv(suf[o - 1]), pw(whole, t))
            if rem:
                piece = cat(piece, cut(whole, conv(suf[rem])))
        if nb is not None:
            piece = cat(piece, conv(D.l_suffix[nb]))
        return piece


def empty_suffix(boundary: int, cfg: FieldConfig) -> PeriodicSuffix:
    return PeriodicSuffix(boundary, boundary + 1, 1, 0, DStructure(1, [], {}, {}), None, cfg)


class TextSource:
    """Substring sketches/fingerprints of the text from the ring, falling back to L'."""

    def __init__(self, ring: PrefixRing, state: PeriodicSuffix | None):
        self.ring = ring
        self.state = state
        self.cfg = ring.cfg

    def sketch(self, s: int, e: int, budget: int, reverse: bool = False) -> Sketch:
        ring = self.ring
        if e < s:
            return empty_sketch(budget, self.cfg)
        if ring.holds(s, e):
            return ring.sketch(s, e, budget, reverse)
        if reverse:
            return sk_reverse(self.sketch(s, e, budget))
        st = self.state
        if st is None or not st.covers(s):
            raise ValueError(f"T[{s}..{e}] is no longer retained")
        head = st.suffix_sketch(s, budget)
        if e >= st.boundary:
            return sk_concat(head, ring.sketch(st.boundary + 1, e, budget))
        return sk_split(head, self.sketch(e + 1, st.boundary, budget), "suffix")

    def fp(self, s: int, e: int) -> Fingerprint:
        ring = self.ring
        if e < s:
            return EMPTY_FP
        if ring.holds(s, e):
            return ring.fp(s, e)
        st = self.state
        if st is None or not st.covers(s):
            raise ValueError(f"T[{s}..{e}] is no longer retained")
        head = st.suffix_fp(s)
        if e >= st.boundary:
            return fp_concat(head, ring.fp(st.boundary + 1, e), self.cfg)
        return fp_split_prefix(head, self.fp(e + 1, st.boundary), self.cfg)

    def char(self, x: int) -> int:
        ring = self.ring
        if ring.pos - ring.cap < x <= ring.pos:
            return ring.char(x)
        return self.fp(x, x).phi


def update_steps(d: int, m: int, k: int) -> int:
    """Upper bound on the number of steps one :func:`update_L` run takes."""
    log_m = max(1, (m + 1).bit_length())
    return d * (log_m + 1) + (4 * k + 1) * d + 2


def update_L(
    source: TextSource,
    boundary: int,
    m: int,
    d: int,
    k: int,
    prev: PeriodicSuffix,
) -> Generator[None, None, PeriodicSuffix]:
    """Recompute L (and D) at ``boundary`` from the previous L; yields once per step."""
    if boundary % d:
        raise ValueError(f"boundary {boundary} is not a multiple of d={d}")
    cfg = source.cfg
    B = boundary
    budget = 4 * k
    lo = max(1, B - m + 1, prev.start)
    M = B - lo + 1
    memo: dict[int, Sketch] = {}

    def suf(x: int) -> Sketch:
        s = memo.get(x)
        if s is None:
            s = source.sketch(x, B, budget)
            memo[x] = s
        return s

    def sub(a: int, b: int) -> Sketch:
        return sk_split(suf(a), suf(b + 1), "suffix")

    def ok(ell: int, rho: int) -> bool:
        if ell <= rho:
            return True
        s = B - ell + 1
        return sk_distance(sub(s, B - rho), suf(s + rho)) is not FAR

    best_len, best_rho = 0, 1
    for rho in range(1, d + 1):
        if best_len + 1 > M:
            break
        yield
        if not ok(best_len + 1, rho):
            continue
        good, hi = best_len + 1, M
        while good < hi:
            mid = (good + hi + 1) // 2
            yield
            if ok(mid, rho):
                good = mid
            else:
                hi = mid - 1
        best_len, best_rho = good, rho

    start = B - best_len + 1
    rho = best_rho
    blocks = {1}
    if best_len > rho:
        yield
        verdict = sk_distance(sub(start, B - rho), suf(start + rho))
        if verdict is FAR:
            raise RuntimeError("sketch of the periodic suffix disagrees with its own period")
        for x, _, _ in verdict.mismatches:
            blocks.add((x - 1) // rho + 2)
    block_suffix: dict[int, list[Sketch]] = {}
    l_suffix: dict[int, Sketch] = {}
    for b in sorted(blocks):
        bs = start + (b - 1) * rho
        bl = min(rho, B - bs + 1)
        chars = []
        for x in range(bs, bs + bl):
            yield
            chars.append(source.char(x))
        sufs = [empty_sketch(budget, cfg)]
        for c in reversed(chars):
            sufs.append(sk_concat(sk_of_string((c,), budget, cfg), sufs[-1]))
        sufs.reverse()
        block_suffix[b] = sufs
        l_suffix[b] = suf(bs)
    lead = None
    if start - 1 >= 1:
        yield
        lead = source.char(start - 1)
    D = DStructure(rho, sorted(blocks), block_suffix, l_suffix)
    return PeriodicSuffix(B, start, rho, best_len, D, lead, cfg)


def run_update(source: TextSource, boundary: int, m: int, d: int, k: int, prev: PeriodicSuffix) -> PeriodicSuffix:
    """Run :func:`update_L` to completion."""
    gen = update_L(source, boundary, m, d, k, prev)
    while True:
        try:
            next(gen)
        except StopIteration as stop:
            return stop.value


def build_D(text: Sequence[int], start: int, rho: int, k: int, cfg: FieldConfig) -> PeriodicSuffix:
    """D for L = text[start..] given in full (1-based ``start``); used by tests and the naive paths."""
    B = len(text)
    ring = PrefixRing(cfg, 4 * k, B + 2)
    for c in text:
        ring.push(c)
    src = TextSource(ring, None)
    ell = B - start + 1
    budget = 4 * k
    blocks = {1}
    if ell > rho:
        a = ring.sketch(start, B - rho, budget)
        b = ring.sketch(start + rho, B, budget)
        verdict = sk_distance(a, b)
        if verdict is FAR:
            raise ValueError(f"2k-period of L exceeds rho={rho}")
        for x, _, _ in verdict.mismatches:
            blocks.add((x - 1) // rho + 2)
    block_suffix, l_suffix = {}, {}
    for b in sorted(blocks):
        bs = start + (b - 1) * rho
        bl = min(rho, B - bs + 1)
        chars = text[bs - 1 : bs - 1 + bl]
        block_suffix[b] = [sk_of_string(chars[o:], budget, cfg) for o in range(bl + 1)]
        l_suffix[b] = src.sketch(bs, B, budget)
    lead = text[start - 2] if start >= 2 else None
    return PeriodicSuffix(B, start, rho, ell, DStructure(rho, sorted(blocks), block_suffix, l_suffix), lead, cfg)


def d_suffix_sketch(L: PeriodicSuffix, start: int, budget: int | None = None) -> Sketch:
    """Sketch of L[start..|L|] (``start`` 1-based within L)."""
    if not 1 <= start <= L.len:
        raise ValueError(f"start {start} outside [1, {L.len}]")
    kb = L.D.block_suffix[1][0].k if budget is None else budget
    return L.suffix_sketch(L.start + start - 1, kb)
