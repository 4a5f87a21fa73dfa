"""Brute-force references: direct character comparison only, no hashing."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence


@dataclass
class OracleResult:
    occurrences: list = field(default_factory=list)

    def by_position(self) -> dict:
        out: dict = {}
        for end, pid, dist, _ in self.occurrences:
            out.setdefault(end, set()).add((pid, dist))
        return out


def naive_hamming(a: Sequence, b: Sequence) -> tuple[int, list]:
    """Hamming distance and mismatch list [(position, a_char, b_char)], 1-based."""
    if len(a) != len(b):
        raise ValueError(f"lengths differ: {len(a)} vs {len(b)}")
    mism = [(i, x, y) for i, (x, y) in enumerate(zip(a, b), 1) if x != y]
    return len(mism), mism


def naive_dictionary_match(dictionary: Sequence[Sequence], text: Sequence, k: int) -> OracleResult:
    """Every (end position, pattern index, distance, mismatches) with distance <= k."""
    res = OracleResult()
    for end in range(1, len(text) + 1):
        for pid, pat in enumerate(dictionary):
            n = len(pat)
            if n == 0 or n > end:
                continue
            dist, mism = naive_hamming(text[end - n : end], pat)
            if dist <= k:
                res.occurrences.append((end, pid, dist, mism))
    return res


def naive_k_period(s: Sequence, k: int) -> int:
    m = len(s)
    for pi in range(1, m + 1):
        if naive_hamming(s[pi:], s[: m - pi])[0] <= 2 * k:
            return pi
    raise ValueError("k-period of an empty string is undefined")


def naive_longest_small_period_suffix(window: Sequence, k: int, d: int) -> tuple[int, int]:
    """(start, rho) of the longest suffix of ``window`` whose shift by some rho <= d
    differs in at most 4k positions; ``start`` is 1-based, rho is the smallest such shift."""
    n = len(window)
    for ell in range(n, 0, -1):
        s = window[n - ell :]
        for rho in range(1, d + 1):
            if rho >= ell or naive_hamming(s[rho:], s[: ell - rho])[0] <= 4 * k:
                return n - ell + 1, rho
    return n + 1, 1
