"""Exact finite set arithmetic over the integers and over Z_q.

Both set kinds are backed by Python integers used as bit-vectors, so a
sumset is an OR of shifted copies of one operand: O(|A| * q / w) word
operations, all exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import gcd
from typing import Iterable, Union

import numpy as np

# Magnitude bound for integer-set elements (signed 64-bit word with headroom).
WORD_BOUND = 2**62
# Integer sumsets fall back to hashing when the bit-vector would be this
# many times sparser than the pair count.
_DENSE_SPAN = 64


class EmptySetError(ValueError):
    pass


class SetOverflowError(OverflowError):
    pass


def mask_to_indices(mask: int) -> np.ndarray:
    """Indices of the set bits of ``mask`` in increasing order."""
    if mask == 0:
        return np.zeros(0, dtype=np.int64)
    raw = np.frombuffer(mask.to_bytes((mask.bit_length() + 7) // 8, "little"), dtype=np.uint8)
    return np.flatnonzero(np.unpackbits(raw, bitorder="little")).astype(np.int64)


def indices_to_mask(indices, size: int) -> int:
    flags = np.zeros(size, dtype=bool)
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size:
        flags[idx] = True
    return int.from_bytes(np.packbits(flags, bitorder="little").tobytes(), "little")


@dataclass(frozen=True)
class CyclicSet:
    """A subset of Z_q; bit i of ``mask`` is set iff residue i is a member."""

    modulus: int
    mask: int = 0

    def __post_init__(self):
        if self.modulus < 2:
            raise ValueError(f"modulus must be >= 2, got {self.modulus}")
        if self.mask < 0 or self.mask >> self.modulus:
            raise ValueError("mask has bits outside [0, modulus)")

    @classmethod
    def from_elements(cls, elements: Iterable[int], modulus: int) -> "CyclicSet":
        arr = np.fromiter((int(e) % modulus for e in elements), dtype=np.int64)
        return cls(modulus, indices_to_mask(arr, modulus))

    @classmethod
    def from_array(cls, residues: np.ndarray, modulus: int) -> "CyclicSet":
        return cls(modulus, indices_to_mask(np.asarray(residues) % modulus, modulus))

    @classmethod
    def full(cls, modulus: int) -> "CyclicSet":
        return cls(modulus, (1 << modulus) - 1)

    @property
    def full_mask(self) -> int:
        return (1 << self.modulus) - 1

    def is_full(self) -> bool:
        return self.mask == self.full_mask

    def elements(self) -> list[int]:
        return mask_to_indices(self.mask).tolist()

    def __iter__(self):
        return iter(self.elements())

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __contains__(self, x: int) -> bool:
        return bool((self.mask >> (x % self.modulus)) & 1)

    def __repr__(self) -> str:
        elems = self.elements()
        body = ", ".join(map(str, elems[:12])) + (", ..." if len(elems) > 12 else "")
        return f"CyclicSet(q={self.modulus}, {{{body}}})"


@dataclass(frozen=True)
class IntegerSet:
    """A finite set of integers, stored sorted and duplicate-free."""

    members: tuple[int, ...] = ()

    def __post_init__(self):
        m = tuple(sorted(set(int(x) for x in self.members)))
        for x in m[:1] + m[-1:]:
            if abs(x) > WORD_BOUND:
                raise SetOverflowError(f"element {x} exceeds word bound")
        object.__setattr__(self, "members", m)

    @classmethod
    def _from_mask(cls, mask: int, offset: int) -> "IntegerSet":
        out = cls.__new__(cls)
        object.__setattr__(out, "members", tuple((mask_to_indices(mask) + offset).tolist()))
        _check_word(out.members)
        out.__dict__["_packed"] = (mask, offset)
        return out

    @cached_property
    def _packed(self) -> tuple[int, int]:
        if not self.members:
            return 0, 0
        lo = self.members[0]
        return sum(1 << (x - lo) for x in self.members), lo

    @property
    def diameter(self) -> int:
        if not self.members:
            raise EmptySetError("diameter of an empty set")
        return self.members[-1] - self.members[0]

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, x: int) -> bool:
        mask, lo = self._packed
        return self.members != () and 0 <= x - lo and bool((mask >> (x - lo)) & 1)

    def __repr__(self) -> str:
        body = ", ".join(map(str, self.members[:12])) + (", ..." if len(self) > 12 else "")
        return f"IntegerSet({{{body}}})"


AnySet = Union[CyclicSet, IntegerSet]


@dataclass(frozen=True)
class RunReport:
    run_length: int
    run_start: int


def _check_word(members) -> None:
    if members and max(abs(members[0]), abs(members[-1])) > WORD_BOUND:
        raise SetOverflowError("result exceeds word bound")


def _require_nonempty(*sets: AnySet) -> None:
    for s in sets:
        if len(s) == 0:
            raise EmptySetError("operation requires a nonempty set")


def rotate(mask: int, shift: int, modulus: int) -> int:
    """Cyclic left shift of a modulus-bit vector."""
    shift %= modulus
    if shift == 0:
        return mask
    full = (1 << modulus) - 1
    return ((mask << shift) | (mask >> (modulus - shift))) & full


def sumset(a: AnySet, b: AnySet) -> AnySet:
    """A + B for two sets of the same kind (and modulus)."""
    _require_nonempty(a, b)
    if isinstance(a, CyclicSet):
        if not isinstance(b, CyclicSet) or a.modulus != b.modulus:
            raise TypeError("cyclic sumset needs two sets with the same modulus")
        if len(a) > len(b):
            a, b = b, a
        acc = 0
        for x in a.elements():
            acc |= rotate(b.mask, x, a.modulus)
        return CyclicSet(a.modulus, acc)
    if not isinstance(b, IntegerSet):
        raise TypeError("cannot mix integer and cyclic sets")
    if len(a) > len(b):
        a, b = b, a
    if abs(a.members[0] + b.members[0]) > WORD_BOUND or abs(a.members[-1] + b.members[-1]) > WORD_BOUND:
        raise SetOverflowError("sumset exceeds word bound")
    if b.diameter + a.diameter > _DENSE_SPAN * (len(a) * len(b) + 1):
        return IntegerSet(tuple({x + y for x in a.members for y in b.members}))
    bmask, blo = b._packed
    alo = a.members[0]
    acc = 0
    for x in a.members:
        acc |= bmask << (x - alo)
    return IntegerSet._from_mask(acc, alo + blo)


def negate(a: AnySet) -> AnySet:
    if isinstance(a, CyclicSet):
        return CyclicSet.from_array(-mask_to_indices(a.mask), a.modulus)
    return IntegerSet(tuple(-x for x in a.members))


def kfold_sum(a: AnySet, k: int) -> AnySet:
    """kA = A + ... + A (k times), by iterated pairwise sumsets."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    _require_nonempty(a)
    if isinstance(a, IntegerSet) and k * max(abs(a.members[0]), abs(a.members[-1])) > WORD_BOUND:
        raise SetOverflowError(f"{k}-fold sums exceed word bound")
    out = a
    for _ in range(k - 1):
        out = sumset(out, a)
    return out


def difference_set(a: AnySet) -> AnySet:
    """A - A; always contains 0 and is symmetric."""
    _require_nonempty(a)
    return sumset(a, negate(a))


def dilate(a: AnySet, m: int) -> AnySet:
    """The set of multiples {m*x : x in A}."""
    _require_nonempty(a)
    if isinstance(a, CyclicSet):
        return CyclicSet.from_array(mask_to_indices(a.mask) * (m % a.modulus), a.modulus)
    return IntegerSet(tuple(m * x for x in a.members))


def translate(a: AnySet, b: int) -> AnySet:
    if isinstance(a, CyclicSet):
        return CyclicSet(a.modulus, rotate(a.mask, b, a.modulus))
    return IntegerSet(tuple(x + b for x in a.members))


def crt_residue(r1: int, q1: int, r2: int, q2: int) -> int:
    """The residue mod q1*q2 congruent to r1 mod q1 and r2 mod q2."""
    inv = pow(q1, -1, q2)
    return (r1 + q1 * (((r2 - r1) * inv) % q2)) % (q1 * q2)


def crt_compose(a1: CyclicSet, a2: CyclicSet) -> CyclicSet:
    """Image of A1 x A2 under Z_q1 x Z_q2 -> Z_{q1 q2}."""
    q1, q2 = a1.modulus, a2.modulus
    if gcd(q1, q2) != 1:
        raise ValueError(f"moduli {q1} and {q2} are not coprime")
    e1 = mask_to_indices(a1.mask)
    e2 = mask_to_indices(a2.mask)
    inv = pow(q1, -1, q2)
    r1 = e1[:, None]
    r2 = e2[None, :]
    res = (r1 + q1 * (((r2 - r1) % q2 * inv) % q2)) % (q1 * q2)
    return CyclicSet.from_array(res.ravel(), q1 * q2)


def longest_consecutive_run(d: IntegerSet) -> RunReport:
    """Longest window of consecutive integers inside D (leftmost on ties)."""
    best_len, best_start = 0, 0
    cur_len, cur_start, prev = 0, 0, None
    for x in d.members:
        if prev is not None and x == prev + 1:
            cur_len += 1
        else:
            cur_len, cur_start = 1, x
        if cur_len > best_len:
            best_len, best_start = cur_len, cur_start
        prev = x
    return RunReport(best_len, best_start)


def reduce_mod(a: IntegerSet, q: int) -> CyclicSet:
    if q < 2:
        raise ValueError("modulus must be >= 2")
    return CyclicSet.from_elements(a.members, q)


def cardinality_bounds(n: int, k: int) -> tuple[int, int]:
    """Upper bounds (|kA|, |A-A|) for an n-element set; attained by B_k sets."""
    from math import comb

    return comb(n + k - 1, k), n * n - n + 1


# ---- text format ---------------------------------------------------------


def format_set(a: AnySet) -> str:
    if isinstance(a, CyclicSet):
        lines = [f"zq {a.modulus}"] + [str(x) for x in a.elements()]
    else:
        lines = ["int"] + [str(x) for x in a.members]
    return "\n".join(lines) + "\n"


def parse_set(text: str) -> AnySet:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty set file")
    head = lines[0].split()
    try:
        values = [int(ln) for ln in lines[1:]]
    except ValueError as exc:
        raise ValueError(f"bad element line: {exc}") from None
    if head == ["int"]:
        return IntegerSet(tuple(values))
    if len(head) == 2 and head[0] == "zq":
        q = int(head[1])
        bad = [v for v in values if not 0 <= v < q]
        if bad:
            raise ValueError(f"residues out of range for q={q}: {bad[:5]}")
        return CyclicSet.from_elements(values, q)
    raise ValueError(f"unrecognised header line: {lines[0]!r}")
