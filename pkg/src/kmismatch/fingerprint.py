"""Karp-Rabin fingerprints over a prime field.

A fingerprint of ``S = S[1..m]`` is the tuple ``(phi, phi_rev, r^m, r^-m, m)``
with ``phi = sum S[i] r^(m-i)`` and ``phi_rev = sum S[i] r^(i-1)`` (mod p).
Concatenation, splitting and reversal are O(1).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

MERSENNE_61 = (1 << 61) - 1


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True, eq=False)
class FieldConfig:
    """Prime modulus and random base shared by every fingerprint and sketch of a run."""

    p: int = MERSENNE_61
    r: int = 0
    seed: int | None = None
    _pow: list = field(default_factory=lambda: [1], repr=False, compare=False)
    _ipow: list = field(default_factory=lambda: [1], repr=False, compare=False)

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"modulus {self.p} is not prime")
        if not 0 <= self.r < self.p:
            raise ValueError(f"base r={self.r} outside [0, {self.p - 1}]")
        object.__setattr__(self, "r_inv", pow(self.r, -1, self.p) if self.r else 0)
        object.__setattr__(self, "inv2", (self.p + 1) // 2)

    @classmethod
    def from_seed(cls, seed: int | None = None, p: int = MERSENNE_61) -> "FieldConfig":
        """Draw ``r`` uniformly from [1, p-1] with a seeded PRNG."""
        rng = random.Random(seed)
        return cls(p=p, r=rng.randrange(1, p), seed=seed)

    def check_capacity(self, max_len: int, error_budget: float = 1e-6, trials: int = 1) -> None:
        """Raise if ``p`` is too small for strings of ``max_len`` at the given error budget."""
        if max_len >= self.p:
            raise ValueError(f"max length {max_len} must be below p={self.p}")
        if self.p <= max_len * trials / error_budget:
            raise ValueError(
                f"p={self.p} too small for max_len={max_len}, trials={trials}, "
                f"error budget {error_budget}"
            )

    def rpow(self, e: int) -> int:
        """r^e mod p for e >= 0, memoised."""
        table = self._pow
        if e < len(table):
            return table[e]
        if e > 1 << 16:
            return pow(self.r, e, self.p)
        p, r = self.p, self.r
        x = table[-1]
        for _ in range(len(table), e + 1):
            x = x * r % p
            table.append(x)
        return x

    def rpow_inv(self, e: int) -> int:
        """r^-e mod p for e >= 0, memoised."""
        table = self._ipow
        if e < len(table):
            return table[e]
        if e > 1 << 16:
            return pow(self.r_inv, e, self.p)
        p, ri = self.p, self.r_inv
        x = table[-1]
        for _ in range(len(table), e + 1):
            x = x * ri % p
            table.append(x)
        return x


@dataclass(frozen=True, slots=True)
class Fingerprint:
    phi: int
    phi_rev: int
    r_len: int
    r_len_inv: int
    len: int


EMPTY_FP = Fingerprint(0, 0, 1, 1, 0)


def fp_of_string(s: Sequence[int], cfg: FieldConfig) -> Fingerprint:
    p, r = cfg.p, cfg.r
    phi = 0
    phi_rev = 0
    rp = 1
    for c in s:
        if not 0 <= c < p:
            raise ValueError(f"character {c} outside [0, {p - 1}]")
        phi = (phi * r + c) % p
        phi_rev = (phi_rev + c * rp) % p
        rp = rp * r % p
    n = len(s)
    return Fingerprint(phi, phi_rev, rp, cfg.rpow_inv(n), n)


def fp_concat(fx: Fingerprint, fy: Fingerprint, cfg: FieldConfig) -> Fingerprint:
    p = cfg.p
    return Fingerprint(
        (fx.phi * fy.r_len + fy.phi) % p,
        (fx.phi_rev + fy.phi_rev * fx.r_len) % p,
        fx.r_len * fy.r_len % p,
        fx.r_len_inv * fy.r_len_inv % p,
        fx.len + fy.len,
    )


def fp_split_suffix(fz: Fingerprint, fx: Fingerprint, cfg: FieldConfig) -> Fingerprint:
    """Fingerprint of Y where Z = XY, given fingerprints of Z and of its prefix X."""
    if fx.len > fz.len:
        raise ValueError(f"prefix length {fx.len} exceeds string length {fz.len}")
    p = cfg.p
    r_y = fz.r_len * fx.r_len_inv % p
    return Fingerprint(
        (fz.phi - fx.phi * r_y) % p,
        (fz.phi_rev - fx.phi_rev) * fx.r_len_inv % p,
        r_y,
        fz.r_len_inv * fx.r_len % p,
        fz.len - fx.len,
    )


def fp_split_prefix(fz: Fingerprint, fy: Fingerprint, cfg: FieldConfig) -> Fingerprint:
    """Fingerprint of X where Z = XY, given fingerprints of Z and of its suffix Y."""
    if fy.len > fz.len:
        raise ValueError(f"suffix length {fy.len} exceeds string length {fz.len}")
    p = cfg.p
    r_x = fz.r_len * fy.r_len_inv % p
    return Fingerprint(
        (fz.phi - fy.phi) * fy.r_len_inv % p,
        (fz.phi_rev - fy.phi_rev * r_x) % p,
        r_x,
        fz.r_len_inv * fy.r_len % p,
        fz.len - fy.len,
    )


def fp_reverse(f: Fingerprint) -> Fingerprint:
    return Fingerprint(f.phi_rev, f.phi, f.r_len, f.r_len_inv, f.len)


def fp_power(f: Fingerprint, times: int, cfg: FieldConfig) -> Fingerprint:
    """Fingerprint of the string repeated ``times`` times, by doubling."""
    out = EMPTY_FP
    base = f
    while times:
        if times & 1:
            out = fp_concat(out, base, cfg)
        times >>= 1
        if times:
            base = fp_concat(base, base, cfg)
    return out
