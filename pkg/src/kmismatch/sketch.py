"""k-mismatch sketches: power-sum moments of a string plus its fingerprint.

``phi[j] = sum S[i] * i^j`` for j = 0..2k and ``phi2[j] = sum S[i]^2 * i^j`` for
j = 0..k, positions 1-based. Two sketches of equal-length strings decide whether
the strings are within Hamming distance k and, if so, recover every mismatch.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .fingerprint import (
    EMPTY_FP,
    FieldConfig,
    Fingerprint,
    fp_concat,
    fp_of_string,
    fp_reverse,
    fp_split_prefix,
    fp_split_suffix,
)

_BINOM: list[list[int]] = [[1]]


def _binom_rows(n: int) -> list[list[int]]:
    while len(_BINOM) < n:
        prev = _BINOM[-1]
        row = [1] + [prev[i] + prev[i + 1] for i in range(len(prev) - 1)] + [1]
        _BINOM.append(row)
    return _BINOM


@dataclass(frozen=True, slots=True)
class Sketch:
    cfg: FieldConfig
    k: int
    phi: tuple
    phi2: tuple
    fp: Fingerprint
    len: int


@dataclass(frozen=True, slots=True)
class Far:
    """Hamming distance exceeds the sketch budget."""


FAR = Far()


@dataclass(frozen=True, slots=True)
class Near:
    """Hamming distance within budget; ``mismatches`` holds (position, a, b) triples."""

    mismatches: tuple

    @property
    def distance(self) -> int:
        return len(self.mismatches)


def empty_sketch(k: int, cfg: FieldConfig) -> Sketch:
    return Sketch(cfg, k, (0,) * (2 * k + 1), (0,) * (k + 1), EMPTY_FP, 0)


def sk_of_string(s: Sequence[int], k: int, cfg: FieldConfig) -> Sketch:
    p = cfg.p
    n = len(s)
    if n >= p:
        raise ValueError(f"string length {n} must be below p={p}")
    phi = [0] * (2 * k + 1)
    phi2 = [0] * (k + 1)
    for i, c in enumerate(s, 1):
        c2 = c * c % p
        x = 1
        for j in range(2 * k + 1):
            phi[j] += c * x
            if j <= k:
                phi2[j] += c2 * x
            x = x * i % p
    return Sketch(
        cfg,
        k,
        tuple(v % p for v in phi),
        tuple(v % p for v in phi2),
        fp_of_string(s, cfg),
        n,
    )


@lru_cache(maxsize=4096)
def _shift_matrix(n: int, off: int, p: int) -> tuple:
    """Row j holds C(j, i) * off^(j-i) mod p for i <= j."""
    rows = _binom_rows(n)
    pw = [1] * n
    for i in range(1, n):
        pw[i] = pw[i - 1] * off % p
    return tuple(tuple(c * pw[j - i] % p for i, c in enumerate(rows[j])) for j in range(n))


def _shift(moms: tuple, off: int, p: int) -> list:
    """Moments of the same string with every position moved by ``off``."""
    if off == 0:
        return list(moms)
    return [sum(map(int.__mul__, row, moms)) % p for row in _shift_matrix(len(moms), off % p, p)]


def sk_truncate(s: Sketch, k: int) -> Sketch:
    """Reduce the mismatch budget; a no-op when ``k == s.k``."""
    if k == s.k:
        return s
    if k > s.k:
        raise ValueError(f"cannot raise sketch budget from {s.k} to {k}")
    return Sketch(s.cfg, k, s.phi[: 2 * k + 1], s.phi2[: k + 1], s.fp, s.len)


def sk_concat(a: Sketch, b: Sketch) -> Sketch:
    if a.k != b.k:
        raise ValueError("sketch budgets differ")
    if b.len == 0:
        return a
    if a.len == 0:
        return b
    cfg = a.cfg
    p = cfg.p
    sp = _shift(b.phi, a.len, p)
    sp2 = _shift(b.phi2, a.len, p)
    return Sketch(
        cfg,
        a.k,
        tuple((x + y) % p for x, y in zip(a.phi, sp)),
        tuple((x + y) % p for x, y in zip(a.phi2, sp2)),
        fp_concat(a.fp, b.fp, cfg),
        a.len + b.len,
    )


def sk_split(whole: Sketch, part: Sketch, side: str) -> Sketch:
    """Sketch of the complement of ``part`` inside ``whole``.

    ``side="prefix"``: part is a prefix, the suffix is returned.
    ``side="suffix"``: part is a suffix, the prefix is returned.
    """
    if whole.k != part.k:
        raise ValueError("sketch budgets differ")
    if part.len > whole.len:
        raise ValueError(f"part length {part.len} exceeds whole length {whole.len}")
    cfg = whole.cfg
    p = cfg.p
    if part.len == 0:
        return whole
    if side == "prefix":
        rest = whole.len - part.len
        diff = [(x - y) % p for x, y in zip(whole.phi, part.phi)]
        diff2 = [(x - y) % p for x, y in zip(whole.phi2, part.phi2)]
        phi = _shift(tuple(diff), -part.len, p)
        phi2 = _shift(tuple(diff2), -part.len, p)
        fp = fp_split_suffix(whole.fp, part.fp, cfg)
    elif side == "suffix":
        rest = whole.len - part.len
        sp = _shift(part.phi, rest, p)
        sp2 = _shift(part.phi2, rest, p)
        phi = [(x - y) % p for x, y in zip(whole.phi, sp)]
        phi2 = [(x - y) % p for x, y in zip(whole.phi2, sp2)]
        fp = fp_split_prefix(whole.fp, part.fp, cfg)
    else:
        raise ValueError(f"side must be 'prefix' or 'suffix', got {side!r}")
    return Sketch(cfg, whole.k, tuple(phi), tuple(phi2), fp, rest)


def sk_power(s: Sketch, times: int) -> Sketch:
    if times < 0:
        raise ValueError("repetition count must be non-negative")
    out = empty_sketch(s.k, s.cfg)
    base = s
    while times:
        if times & 1:
            out = sk_concat(out, base)
        times >>= 1
        if times:
            base = sk_concat(base, base)
    return out


def sk_reverse(s: Sketch) -> Sketch:
    if s.len == 0:
        return s
    p = s.cfg.p
    # position i maps to len+1-i: shift by -(len+1) then negate odd moments
    def flip(moms):
        sh = _shift(moms, -(s.len + 1), p)
        return tuple(v if j % 2 == 0 else (-v) % p for j, v in enumerate(sh))

    return Sketch(s.cfg, s.k, flip(s.phi), flip(s.phi2), fp_reverse(s.fp), s.len)


def sk_from_absolute(phi: Sequence[int], phi2: Sequence[int], fp: Fingerprint, start: int, k: int, cfg: FieldConfig, reverse: bool = False) -> Sketch:
    """Sketch of a substring whose moments were summed over absolute positions ``start..``.

    With ``reverse`` the sketch of the reversed substring is returned; either way
    only one moment shift is needed.
    """
    p = cfg.p
    n = fp.len
    if not reverse:
        return Sketch(cfg, k, tuple(_shift(tuple(phi), 1 - start, p)), tuple(_shift(tuple(phi2), 1 - start, p)), fp, n)

    # position i maps to start + n - i: shift by -(start + n) then negate odd moments
    def flip(moms):
        sh = _shift(tuple(moms), -(start + n), p)
        return tuple(v if j % 2 == 0 else (-v) % p for j, v in enumerate(sh))

    return Sketch(cfg, k, flip(phi), flip(phi2), fp_reverse(fp), n)


def sk_fix(s: Sketch, fixes: Sequence[tuple[int, int, int]]) -> Sketch:
    """Sketch after replacing characters: each fix is (position, old, new)."""
    if not fixes:
        return s
    cfg = s.cfg
    p = cfg.p
    phi = list(s.phi)
    phi2 = list(s.phi2)
    dphi = 0
    dphi_rev = 0
    n = s.len
    for pos, old, new in fixes:
        d1 = (new - old) % p
        d2 = (new * new - old * old) % p
        x = 1
        for j in range(len(phi)):
            phi[j] += d1 * x
            if j < len(phi2):
                phi2[j] += d2 * x
            x = x * pos % p
        dphi += d1 * cfg.rpow(n - pos)
        dphi_rev += d1 * cfg.rpow(pos - 1)
    f = s.fp
    fp = Fingerprint((f.phi + dphi) % p, (f.phi_rev + dphi_rev) % p, f.r_len, f.r_len_inv, f.len)
    return Sketch(cfg, s.k, tuple(v % p for v in phi), tuple(v % p for v in phi2), fp, n)


def _berlekamp_massey(seq: list, p: int) -> list:
    """Shortest connection polynomial C (C[0] = 1) generating ``seq`` over GF(p)."""
    c = [1]
    b = [1]
    ell = 0
    m = 1
    bb = 1
    for n in range(len(seq)):
        d = seq[n]
        for i in range(1, ell + 1):
            d += c[i] * seq[n - i]
        d %= p
        if d == 0:
            m += 1
            continue
        coef = d * pow(bb, -1, p) % p
        t = list(c)
        need = len(b) + m
        if len(c) < need:
            c.extend([0] * (need - len(c)))
        for i, bi in enumerate(b):
            c[i + m] = (c[i + m] - coef * bi) % p
        if 2 * ell <= n:
            ell = n + 1 - ell
            b = t
            bb = d
            m = 1
        else:
            m += 1
    del c[ell + 1 :]
    c.extend([0] * (ell + 1 - len(c)))
    return c


def _find_roots(c: list, n: int, p: int) -> list | None:
    """Positions x in [1, n] with prod (x - x_i) = 0 for the locator reversed from ``c``."""
    e = len(c) - 1
    if e == 1:
        x = (-c[1]) % p
        return [x] if 1 <= x <= n else None
    # reversed locator: x^e + c1 x^(e-1) + ... + ce
    roots = []
    for x in range(1, n + 1):
        acc = 1
        for coef in c[1:]:
            acc = (acc * x + coef) % p
        if acc == 0:
            roots.append(x)
            if len(roots) == e:
                break
    return roots if len(roots) == e else None


def _lagrange_basis(xs: list, p: int) -> list | None:
    """Per root x_i: coefficients of prod_{l != i}(x - x_l) / prod_{l != i}(x_i - x_l)."""
    full = [1]
    for xl in xs:
        nxt = [0] * (len(full) + 1)
        for t, a in enumerate(full):
            nxt[t] = (nxt[t] - a * xl) % p
            nxt[t + 1] = (nxt[t + 1] + a) % p
        full = nxt
    e = len(xs)
    basis = []
    for xi in xs:
        # synthetic division of full by (x - xi)
        quot = [0] * e
        carry = 0
        for t in range(e, 0, -1):
            carry = (full[t] + carry * xi) % p
            quot[t - 1] = carry
        denom = 0
        for c in reversed(quot):
            denom = (denom * xi + c) % p
        if denom == 0:
            return None
        inv = pow(denom, -1, p)
        basis.append([c * inv % p for c in quot])
    return basis


def _solve_transposed_vandermonde(xs: list, syn: Sequence[int], p: int, basis: list | None = None) -> list | None:
    """Values v with sum_i v_i xs_i^j = syn[j] for j < len(xs)."""
    if basis is None:
        basis = _lagrange_basis(xs, p)
        if basis is None:
            return None
    return [sum(map(int.__mul__, row, syn)) % p for row in basis]


def _moments_agree(xs: list, vals: list, syn: Sequence[int], p: int) -> bool:
    """Check sum_i vals_i xs_i^j == syn[j] for every j."""
    terms = list(vals)
    for target in syn:
        if sum(terms) % p != target:
            return False
        terms = [t * x % p for t, x in zip(terms, xs)]
    return True


def sk_distance(a: Sketch, b: Sketch) -> Near | Far:
    """Decide Hamming distance <= k and, if so, recover the mismatches."""
    if a.len != b.len:
        raise ValueError(f"sketch lengths differ: {a.len} vs {b.len}")
    if a.k != b.k:
        raise ValueError(f"sketch budgets differ: {a.k} vs {b.k}")
    cfg = a.cfg
    p = cfg.p
    syn = [(x - y) % p for x, y in zip(a.phi, b.phi)]
    fa, fb = a.fp, b.fp
    if not any(syn):
        if fa.phi == fb.phi and fa.phi_rev == fb.phi_rev:
            return Near(())
        return FAR
    k = a.k
    conn = _berlekamp_massey(syn[: 2 * k], p)
    e = len(conn) - 1
    if e == 0 or e > k:
        return FAR
    xs = _find_roots(conn, a.len, p)
    if xs is None:
        return FAR
    basis = _lagrange_basis(xs, p)
    if basis is None:
        return FAR
    deltas = _solve_transposed_vandermonde(xs, syn, p, basis)
    if not all(deltas):
        return FAR
    if not _moments_agree(xs, deltas, syn, p):
        return FAR
    syn2 = [(x - y) % p for x, y in zip(a.phi2, b.phi2)]
    deltas2 = _solve_transposed_vandermonde(xs, syn2, p, basis)
    if not _moments_agree(xs, deltas2, syn2, p):
        return FAR
    inv2 = cfg.inv2
    mism = []
    dphi = 0
    for x, dv, dv2 in sorted(zip(xs, deltas, deltas2)):
        ca = (dv2 * pow(dv, -1, p) + dv) * inv2 % p
        cb = (ca - dv) % p
        mism.append((x, ca, cb))
        dphi += dv * cfg.rpow(a.len - x)
    if (fb.phi + dphi - fa.phi) % p:
        return FAR
    return Near(tuple(mism))
