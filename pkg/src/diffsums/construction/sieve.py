"""Segmented sieve for runs of consecutive primes above a threshold."""

from __future__ import annotations

from fractions import Fraction
from math import floor, isqrt

import numpy as np

SEGMENT = 1 << 21


class SieveBudgetError(RuntimeError):
    pass


def simple_sieve(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def primes_above(threshold, count: int, exclude_divisors_of: int = 1, limit: int = 1 << 34) -> np.ndarray:
    """The ``count`` smallest primes strictly greater than ``threshold``.

    Primes dividing ``exclude_divisors_of`` are skipped. ``limit`` caps the
    largest integer the sieve may touch.
    """
    if count <= 0:
        return np.zeros(0, dtype=np.int64)
    start = floor(Fraction(threshold)) + 1
    start = max(start, 2)
    base = simple_sieve(isqrt(limit) + 1)
    found: list[np.ndarray] = []
    have = 0
    lo = start
    while have < count:
        if lo > limit:
            raise SieveBudgetError(f"needed {count} primes above {threshold}, sieve limit {limit} reached")
        hi = min(lo + SEGMENT, limit + 1)
        seg = np.ones(hi - lo, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= hi:
                break
            first = max(p * p, -(-lo // p) * p)
            seg[first - lo :: p] = False
        if lo < 2:
            seg[: 2 - lo] = False
        primes = np.flatnonzero(seg).astype(np.int64) + lo
        if exclude_divisors_of != 1 and primes.size:
            primes = primes[exclude_divisors_of % primes != 0] if exclude_divisors_of < 2**63 else np.array(
                [p for p in primes.tolist() if exclude_divisors_of % p], dtype=np.int64
            )
        found.append(primes[: count - have])
        have += found[-1].size
        lo = hi
    return np.concatenate(found)


def smallest_primes_above(threshold, count: int) -> tuple[int, ...]:
    return tuple(primes_above(threshold, count, limit=max(1 << 20, 4 * (int(threshold) + 64 * count))).tolist())
