"""Weight pairs (u, v) and their canonical rank/unrank enumeration.

A pair of total weight k assigns (u(x), v(x)) to finitely many points; its
level is the number of points with positive weight. Pairs of a fixed level
on Z_N are ordered by support (lexicographic sorted tuple), then by weight
composition, then by the u-split, both lexicographic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from math import comb
from typing import Any, Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class LevelPair:
    """Sparse (u, v): ``support`` holds (point, u, v) entries, points distinct."""

    support: tuple[tuple[Any, int, int], ...]

    def __post_init__(self):
        for _, u, v in self.support:
            if u < 0 or v < 0 or u + v == 0:
                raise ValueError(f"bad weights ({u}, {v}) in support entry")

    @classmethod
    def from_mapping(cls, weights: dict) -> "LevelPair":
        return cls(tuple((x, u, v) for x, (u, v) in sorted(weights.items())))

    @property
    def level(self) -> int:
        return len(self.support)

    @property
    def weight(self) -> int:
        return sum(u + v for _, u, v in self.support)

    @property
    def u_weight(self) -> int:
        return sum(u for _, u, _ in self.support)

    @property
    def v_weight(self) -> int:
        return sum(v for _, _, v in self.support)

    def as_dict(self) -> dict:
        return {x: (u, v) for x, u, v in self.support}

    def __eq__(self, other) -> bool:
        if not isinstance(other, LevelPair):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash(frozenset(self.as_dict().items()))

    def __repr__(self):
        return f"LevelPair({self.as_dict()})"


def compositions(k: int, parts: int):
    """Compositions of k into ``parts`` positive parts, lexicographic."""
    if parts == 1:
        if k >= 1:
            yield (k,)
        return
    for first in range(1, k - parts + 2):
        for rest in compositions(k - first, parts - 1):
            yield (first,) + rest


def _splits(comp: Sequence[int]):
    if not comp:
        yield ()
        return
    for u in range(comp[0] + 1):
        for rest in _splits(comp[1:]):
            yield ((u, comp[0] - u),) + rest


def weight_patterns(k: int, level: int) -> list[tuple[tuple[int, int], ...]]:
    """All per-point (u, v) assignments of a level-``level`` pair, canonical order."""
    return [split for comp in compositions(k, level) for split in _splits(comp)]


def pattern_count(k: int, level: int) -> int:
    return len(weight_patterns(k, level))


def rank_combination(c: Sequence[int], n: int) -> int:
    """Lexicographic rank of a sorted combination of range(n)."""
    r = len(c)
    total = comb(n, r) - 1
    for i, ci in enumerate(c):
        total -= comb(n - 1 - ci, r - i)
    return total


def unrank_combination(rank: int, n: int, r: int) -> tuple[int, ...]:
    rest = comb(n, r) - 1 - rank
    out = []
    for i in range(r):
        need = r - i
        lo, hi = need - 1, n - 1
        # largest d with comb(d, need) <= rest
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if comb(mid, need) <= rest:
                lo = mid
            else:
                hi = mid - 1
        rest -= comb(lo, need)
        out.append(n - 1 - lo)
    return tuple(out)


class LevelPairEnumeration:
    """Canonical enumeration of the weight-k, exact-level pairs on Z_N."""

    def __init__(self, modulus: int, k: int, level: int):
        if not 1 <= level <= k:
            raise ValueError(f"level must lie in [1, {k}], got {level}")
        self.modulus = modulus
        self.k = k
        self.level = level
        self.patterns = weight_patterns(k, level)
        self._pattern_index = {p: i for i, p in enumerate(self.patterns)}
        self._containing: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    @cached_property
    def count(self) -> int:
        return comb(self.modulus, self.level) * len(self.patterns)

    def __len__(self) -> int:
        return self.count

    def unrank(self, index: int) -> LevelPair:
        if not 0 <= index < self.count:
            raise IndexError(index)
        s, w = divmod(index, len(self.patterns))
        points = unrank_combination(s, self.modulus, self.level)
        return LevelPair(tuple((x, u, v) for x, (u, v) in zip(points, self.patterns[w])))

    def rank(self, pair: LevelPair) -> int:
        if pair.level != self.level or pair.weight != self.k:
            raise ValueError(f"pair of level {pair.level}, weight {pair.weight} not in this enumeration")
        entries = sorted(pair.support, key=lambda e: e[0])
        points = [int(x) for x, _, _ in entries]
        if not all(0 <= x < self.modulus for x in points):
            raise ValueError("support point outside [0, modulus)")
        pattern = tuple((u, v) for _, u, v in entries)
        return rank_combination(points, self.modulus) * len(self.patterns) + self._pattern_index[pattern]

    def containing(self, x0: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Ranks of every pair whose support contains x0, with (u, v) at x0."""
        hit = self._containing.get(x0)
        if hit is not None:
            return hit
        others = [y for y in range(self.modulus) if y != x0]
        npat = len(self.patterns)
        ranks, us, vs = [], [], []
        for rest in combinations(others, self.level - 1):
            support = sorted(rest + (x0,))
            pos = support.index(x0)
            base = rank_combination(support, self.modulus) * npat
            for w, pat in enumerate(self.patterns):
                ranks.append(base + w)
                us.append(pat[pos][0])
                vs.append(pat[pos][1])
        hit = (np.array(ranks, dtype=np.int64), np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64))
        self._containing[x0] = hit
        return hit
