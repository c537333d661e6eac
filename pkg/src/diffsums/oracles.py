"""Exhaustive minimisation of the six extremal functions on small arguments.

Every quantity here has a side condition and an objective that are both
monotone under adding elements, so a depth-first search over sets built in
increasing element order can stop a branch as soon as the side condition
holds, prune on the incumbent, and prune when even all remaining elements
cannot satisfy the side condition.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

from .setcore import WORD_BOUND, CyclicSet, IntegerSet, SetOverflowError, mask_to_indices, rotate

QUANTITIES = ("F", "G", "H", "f", "g", "h")
EXHAUSTIVE_Q_LIMIT = 26
DIAMETER_LIMIT = 26


class OracleLimitError(ValueError):
    pass


class InfeasibleError(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    quantity: str
    k: int
    q: int
    value: int
    witness: CyclicSet | IntegerSet
    exhaustive: bool
    diameter_bound: Optional[int] = None

    @property
    def upper_bound_only(self) -> bool:
        """G/H-side values are exact only within the stated diameter class."""
        return self.diameter_bound is not None

    def witness_elements(self) -> list[int]:
        w = self.witness
        return w.elements() if isinstance(w, CyclicSet) else list(w.members)

    def as_row(self) -> dict:
        return {
            "quantity": self.quantity,
            "k": self.k,
            "q": self.q,
            "value": self.value,
            "exhaustive": self.exhaustive,
            "diameter_bound": "" if self.diameter_bound is None else self.diameter_bound,
            "witness": " ".join(map(str, self.witness_elements())),
        }


# ---- bit-vector kernels ---------------------------------------------------


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def cyc_sum(a: int, b: int, q: int) -> int:
    acc = 0
    for x in _bits(a):
        acc |= rotate(b, x, q)
    return acc


def cyc_kfold(a: int, k: int, q: int) -> int:
    out = a
    for _ in range(k - 1):
        out = cyc_sum(out, a, q)
    return out


def cyc_diff(a: int, q: int) -> int:
    acc = 0
    for x in _bits(a):
        acc |= rotate(a, -x, q)
    return acc


def int_kfold(a: int, k: int) -> int:
    out = a
    for _ in range(k - 1):
        acc = 0
        for x in _bits(a):
            acc |= out << x
        out = acc
    return out


def int_diff(a: int, d: int) -> int:
    """A - A shifted by +d, for A within [0, d]."""
    acc = 0
    shifted = a << d
    for x in _bits(a):
        acc |= shifted >> x
    return acc


def has_run(mask: int, length: int) -> bool:
    for _ in range(length - 1):
        mask &= mask >> 1
        if not mask:
            return False
    return mask != 0


# ---- problem descriptions -------------------------------------------------


@dataclass
class _Problem:
    universe: int
    start: int  # elements forced into every set
    first_free: int
    side: Callable[[int], bool]
    objective: Callable[[int], int]


def _problem(quantity: str, k: int, q: int, d: int) -> _Problem:
    if quantity in ("F", "f"):
        full = (1 << q) - 1
        if quantity == "F":
            # 1 is a difference, so some translate of A contains both 0 and 1
            return _Problem(q, 0b11, 2, lambda m: cyc_diff(m, q) == full, lambda m: cyc_kfold(m, k, q).bit_count())
        return _Problem(q, 1, 1, lambda m: cyc_kfold(m, k, q) == full, lambda m: cyc_diff(m, q).bit_count())
    u = d + 1
    side_k = {
        "H": lambda m: int_diff(m, d).bit_count() >= q,
        "G": lambda m: has_run(int_diff(m, d), q),
        "h": lambda m: int_kfold(m, k).bit_count() >= q,
        "g": lambda m: has_run(int_kfold(m, k), q),
    }[quantity]
    if quantity in ("H", "G"):
        obj = lambda m: int_kfold(m, k).bit_count()
    else:
        obj = lambda m: int_diff(m, d).bit_count()
    return _Problem(u, 1, 1, side_k, obj)


def _search_branch(args) -> tuple[int, int]:
    """First optimum in DFS order within one top-level branch."""
    quantity, k, q, d, mask, nxt, bound = args
    prob = _problem(quantity, k, q, d)
    best = [bound, -1]
    u = prob.universe
    tails = [((1 << u) - 1) ^ ((1 << i) - 1) for i in range(u + 1)]

    def dfs(m: int, i: int) -> None:
        val = prob.objective(m)
        if val >= best[0]:
            return
        if prob.side(m):
            best[0], best[1] = val, m
            return
        if i >= u or not prob.side(m | tails[i]):
            return
        for e in range(i, u):
            dfs(m | (1 << e), e + 1)

    dfs(mask, nxt)
    return best[0], best[1]


def _minimise(quantity: str, k: int, q: int, d: int, workers: int) -> tuple[int, int]:
    prob = _problem(quantity, k, q, d)
    everything = prob.start | (((1 << prob.universe) - 1) ^ ((1 << prob.first_free) - 1))
    if not prob.side(everything):
        raise InfeasibleError(f"{quantity}_{k}({q}) has no admissible set" + (f" of diameter <= {d}" if d else ""))
    bound = prob.objective(everything) + 1
    # branches: the start set itself, then start + {e} for each free e
    branches = [(quantity, k, q, d, prob.start, prob.universe, bound)]
    branches += [(quantity, k, q, d, prob.start | (1 << e), e + 1, bound) for e in range(prob.first_free, prob.universe)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_search_branch, branches))
    else:
        results = [_search_branch(b) for b in branches]
    value = min(r[0] for r in results)
    witness = next(r[1] for r in results if r[0] == value)
    return value, witness


def affine_canonical(a: CyclicSet) -> CyclicSet:
    """Lexicographically least sorted image of A under x -> u x + b, gcd(u, q) = 1."""
    q = a.modulus
    elems = a.elements()
    best = None
    for u in range(1, q):
        if math.gcd(u, q) != 1:
            continue
        scaled = [(u * x) % q for x in elems]
        for b in {(-y) % q for y in scaled}:
            img = tuple(sorted((y + b) % q for y in scaled))
            if best is None or img < best:
                best = img
    return CyclicSet.from_elements(best, q)


def oracle_F(k: int, q: int, mode: str = "F", limit: int = EXHAUSTIVE_Q_LIMIT, workers: int = 1) -> OracleResult:
    """F_k(q) (mode F) or f_k(q) (mode f) by exhaustive search over Z_q."""
    if mode not in ("F", "f"):
        raise ValueError("mode must be 'F' or 'f'")
    if k < 1 or q < 2:
        raise ValueError("need k >= 1 and q >= 2")
    if q > limit:
        raise OracleLimitError(f"q = {q} exceeds exhaustive limit {limit}")
    value, mask = _minimise(mode, k, q, 0, workers)
    witness = affine_canonical(CyclicSet(q, mask))
    return OracleResult(mode, k, q, value, witness, True)


def _integer_oracle(quantity, k, q, diameter, limit, workers) -> OracleResult:
    if k < 1 or q < 2:
        raise ValueError("need k >= 1 and q >= 2")
    if diameter > limit:
        raise OracleLimitError(f"diameter {diameter} exceeds limit {limit}")
    if diameter < 0:
        raise ValueError("diameter must be nonnegative")
    value, mask = _minimise(quantity, k, q, diameter, workers)
    witness = IntegerSet(tuple(mask_to_indices(mask).tolist()))
    return OracleResult(quantity, k, q, value, witness, True, diameter)


def oracle_H(k: int, q: int, diameter: int, mode: str = "H", limit: int = DIAMETER_LIMIT, workers: int = 1) -> OracleResult:
    """H_k(q) (|A-A| >= q) or h_k(q) (|kA| >= q) over A in [0, diameter]."""
    if mode not in ("H", "h"):
        raise ValueError("mode must be 'H' or 'h'")
    return _integer_oracle(mode, k, q, diameter, limit, workers)


def oracle_G(k: int, q: int, diameter: int, mode: str = "G", limit: int = DIAMETER_LIMIT, workers: int = 1) -> OracleResult:
    """G_k(q) (q consecutive differences) or g_k(q) (q consecutive k-fold sums)."""
    if mode not in ("G", "g"):
        raise ValueError("mode must be 'G' or 'g'")
    return _integer_oracle(mode, k, q, diameter, limit, workers)


def oracle(quantity: str, k: int, q: int, diameter: int | None = None, workers: int = 1,
           q_limit: int = EXHAUSTIVE_Q_LIMIT, diameter_limit: int = DIAMETER_LIMIT) -> OracleResult:
    if quantity in ("F", "f"):
        return oracle_F(k, q, quantity, q_limit, workers)
    if diameter is None:
        raise ValueError(f"quantity {quantity} needs a diameter bound")
    if quantity in ("H", "h"):
        return oracle_H(k, q, diameter, quantity, diameter_limit, workers)
    if quantity in ("G", "g"):
        return oracle_G(k, q, diameter, quantity, diameter_limit, workers)
    raise ValueError(f"unknown quantity {quantity!r}")


def greedy_bk_set(k: int, n: int) -> IntegerSet:
    """Greedy B_k set from 0: each new element is the least integer keeping
    all k-fold sums (as multisets) distinct. For k = 2 this is Mian-Chowla."""
    if n < 1 or k < 1:
        raise ValueError("need n >= 1 and k >= 1")
    elems = [0]
    # layer[i] = set of i-fold sums, i = 0..k (distinct per multiset)
    layer = [{0}] + [{0} for _ in range(k)]
    c = 0
    while len(elems) < n:
        c += 1
        if k * c > WORD_BOUND:
            raise SetOverflowError("greedy B_k element exceeds word bound")
        new = [j * c + s for j in range(1, k + 1) for s in layer[k - j]]
        fresh = set(new)
        if len(fresh) != len(new) or fresh & layer[k]:
            continue
        elems.append(c)
        layer = [layer[0]] + [
            set().union(*({j * c + s for s in layer[i - j]} for j in range(0, i + 1))) for i in range(1, k + 1)
        ]
    return IntegerSet(tuple(elems))


@dataclass
class ExponentReport:
    quantity: str
    k: int
    rows: list[tuple[int, int, float, float]] = field(default_factory=list)  # (q, value, ratio, running inf)
    diameter_bound: Optional[int] = None

    @property
    def running_infimum(self) -> float:
        return self.rows[-1][3] if self.rows else math.inf


def exponent_table(quantity: str, k: int, q_range, diameter: int | None = None, workers: int = 1,
                   q_limit: int = EXHAUSTIVE_Q_LIMIT, diameter_limit: int = DIAMETER_LIMIT) -> ExponentReport:
    """log(value)/log(q) for each q, with the running infimum."""
    report = ExponentReport(quantity, k, diameter_bound=diameter if quantity not in ("F", "f") else None)
    inf = math.inf
    for q in sorted(q_range):
        res = oracle(quantity, k, q, diameter, workers, q_limit, diameter_limit)
        ratio = math.log(res.value) / math.log(q)
        inf = min(inf, ratio)
        report.rows.append((q, res.value, ratio, inf))
    return report
