"""Bridges between integer sets and residue sets: submultiplicativity
witnesses, the doubling lift, the projection n -> floor(q * frac(t n)),
randomized covering, and the full integers-to-residues pipeline."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .setcore import (
    CyclicSet,
    IntegerSet,
    crt_compose,
    difference_set,
    dilate,
    kfold_sum,
    longest_consecutive_run,
    negate,
    sumset,
)

TWO64 = 1 << 64
FIND_T_ATTEMPTS = 1000
COVER_ATTEMPTS = 1000
PIPELINE_RETRIES = 20


class SearchFailure(RuntimeError):
    pass


def _rng(seed: int, stream: int, counter: int = 0) -> np.random.Generator:
    key = (seed & (TWO64 - 1)) | ((stream & (TWO64 - 1)) << 64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter << 128))


# ---- projection ----------------------------------------------------------


@dataclass(frozen=True)
class ProjectionParam:
    """t = numerator / 2^64 in (0, 1), projecting into [0, q)."""

    numerator: int
    q: int

    def __post_init__(self):
        if not 0 < self.numerator < TWO64:
            raise ValueError("numerator must lie in (0, 2^64)")
        if self.q < 1:
            raise ValueError("q must be positive")

    @property
    def t(self) -> Fraction:
        return Fraction(self.numerator, TWO64)


def project_pi(p: ProjectionParam, n: int) -> int:
    """floor(q * frac(t n)), exactly."""
    return (p.q * ((p.numerator * n) % TWO64)) >> 64


def project_set(p: ProjectionParam, s) -> set[int]:
    return {project_pi(p, n) for n in s}


def quasi_additivity_residue(p: ProjectionParam, x: int, y: int) -> int:
    """pi(x + y) - pi(x) - pi(y); always one of 0, 1, -q, 1 - q."""
    return project_pi(p, x + y) - project_pi(p, x) - project_pi(p, y)


def find_good_t(s: IntegerSet, seed: int, attempts: int = FIND_T_ATTEMPTS, stream: int = 0) -> tuple[ProjectionParam, int]:
    """Draw t until |pi_t(S)| > |S|/3, with q = |S|."""
    q = len(s)
    if q < 2:
        raise ValueError("need |S| >= 2")
    rng = _rng(seed, stream)
    for _ in range(attempts):
        a = int(rng.bit_generator.random_raw())
        if a == 0:
            continue
        p = ProjectionParam(a, q)
        size = len(project_set(p, s.members))
        if 3 * size > q:
            return p, size
    raise SearchFailure(f"no good t in {attempts} draws")


# ---- covering ------------------------------------------------------------


@dataclass
class CoverResult:
    sets: list[CyclicSet]
    per_set_bound: int
    attempts: int
    bound_exceeded: bool = False
    uncovered: list[int] = field(default_factory=list)

    def union_size(self) -> int:
        return len(set().union(*(set(b.elements()) for b in self.sets))) if self.sets else 0


def cover_size_bound(q: int, size: int, k: int) -> int:
    """m = ceil((ln q / t)^{1/k}) with t = size / q."""
    target = q * math.log(q) / size
    m = max(1, math.ceil(target ** (1.0 / k)))
    while m > 1 and (m - 1) ** k >= target:
        m -= 1
    while m**k < target:
        m += 1
    return min(m, q)


def lorentz_cover(a: CyclicSet, k: int, seed: int, attempts: int = COVER_ATTEMPTS, stream: int = 0) -> CoverResult:
    """Find B_1..B_k of size <= m with A + B_1 + ... + B_k = Z_q.

    Each round draws uniform m-subsets until the uncovered count is at most
    its expectation q * C(U, m) / C(q, m) (U = currently uncovered), so the
    uncovered fraction u satisfies u_i <= u_{i-1}^m and ends below 1/q.
    If the draws never meet that, the best draw is kept, and any residue
    still uncovered after round k is repaired greedily into B_k.
    """
    if len(a) == 0:
        raise ValueError("A must be nonempty")
    q = a.modulus
    m = cover_size_bound(q, len(a), k)
    cm = math.comb(q, m)
    covered = a
    sets: list[CyclicSet] = []
    history = [q - len(a)]
    used = 0
    for rnd in range(k):
        u = q - len(covered)
        if u == 0:
            sets.append(CyclicSet.from_elements([0], q))
            history.append(0)
            continue
        rng = _rng(seed, stream + rnd + 1)
        allowed = q * math.comb(u, m)
        best = None
        for _ in range(attempts):
            used += 1
            b = CyclicSet.from_array(rng.choice(q, size=m, replace=False), q)
            new = sumset(covered, b)
            left = q - len(new)
            if best is None or left < best[0]:
                best = (left, b, new)
            if left * cm <= allowed:
                break
        _, b, covered = best
        sets.append(b)
        history.append(q - len(covered))
    exceeded = not covered.is_full()
    if exceeded:
        prev = a
        for b in sets[:-1]:
            prev = sumset(prev, b)
        last = set(sets[-1].elements())
        anchor = prev.elements()[0]
        while not covered.is_full():
            z = next(x for x in range(q) if x not in covered)
            last.add((z - anchor) % q)
            sets[-1] = CyclicSet.from_elements(last, q)
            covered = sumset(prev, sets[-1])
        history.append(0)
    return CoverResult(sets, m, used, exceeded, history)


# ---- lift and submultiplicativity witnesses ------------------------------


def lift_doubling(a: CyclicSet) -> IntegerSet:
    """A' = {n : -q < n <= q, n mod q in A}; two representatives per residue."""
    if len(a) == 0:
        raise ValueError("A must be nonempty")
    q = a.modulus
    out = []
    for r in a.elements():
        out += [r, q] if r == 0 else [r, r - q]
    return IntegerSet(tuple(out))


def witness_product(a1: CyclicSet, a2: CyclicSet) -> CyclicSet:
    """A1 x A2 inside Z_{q1 q2} for coprime moduli."""
    return crt_compose(a1, a2)


def witness_base_q(a1: IntegerSet, q1: int, a2: IntegerSet) -> IntegerSet:
    """A1 + q1 * A2: a run of q1 differences in A1 - A1 and a run of q2 in
    A2 - A2 combine into a run of q1 q2."""
    return sumset(a1, dilate(a2, q1))


def spread_factor(a1: IntegerSet, k: int) -> int:
    return max(k, 2) * a1.diameter + 1


def witness_spread(a1: IntegerSet, a2: IntegerSet, k: int) -> IntegerSet:
    """A1 + m * A2 with m = max(k, 2) * diam(A1) + 1, which separates every
    k-fold sum and every difference, so both counts multiply."""
    return sumset(a1, dilate(a2, spread_factor(a1, k)))


# ---- integers to residues ------------------------------------------------


@dataclass
class PipelineResult:
    a3: CyclicSet
    b_union: CyclicSet
    trace: dict


def full_difference_pipeline(a: IntegerSet, q: int, k: int, seed: int, retries: int = PIPELINE_RETRIES) -> PipelineResult:
    """Turn an integer set with |A - A| >= q into A3 in Z_q with A3 - A3 = Z_q
    and |k A3| within a (log q)^{k/2}-type factor of |kA|."""
    d = difference_set(a)
    if len(d) < q:
        raise ValueError(f"|A - A| = {len(d)} < q = {q}")
    s = IntegerSet(d.members[:q])
    ka = kfold_sum(a, k)
    for attempt in range(retries):
        p, s_image = find_good_t(s, seed, stream=attempt)
        a1 = project_set(p, a.members)
        a2 = CyclicSet.from_elements(a1, q)
        d2 = difference_set(a2)
        d_image = len(project_set(p, d.members))
        if 6 * len(d2) <= q:
            continue
        ka2 = kfold_sum(a2, k)
        cover = lorentz_cover(d2, 2, seed, stream=1000 * (attempt + 1))
        b1, b2 = cover.sets
        b = CyclicSet(q, b1.mask | negate(b2).mask)
        a3 = sumset(a2, b)
        if not difference_set(a3).is_full():
            continue
        ka3 = kfold_sum(a3, k)
        kb = kfold_sum(b, k)
        lorentz_b = 2 * math.ceil(math.sqrt(6 * math.log(q)))
        trace = {
            "q": q,
            "k": k,
            "seed": seed,
            "attempt": attempt,
            "t_numerator": p.numerator,
            "sizes": {
                "A": len(a),
                "A-A": len(d),
                "kA": len(ka),
                "pi_t(S)": s_image,
                "pi_t(A-A)": d_image,
                "A2": len(a2),
                "A2-A2": len(d2),
                "kA2": len(ka2),
                "B1": len(b1),
                "B2": len(b2),
                "B1|-B2": len(b),
                "kB": len(kb),
                "A3": len(a3),
                "kA3": len(ka3),
            },
            "cover": {"m": cover.per_set_bound, "attempts": cover.attempts,
                      "bound_exceeded": cover.bound_exceeded, "uncovered": cover.uncovered},
            "checks": {
                "pi_t(S) > q/3": 3 * s_image > q,
                "A2-A2 > q/6": 6 * len(d2) > q,
                "kA2 <= k|kA|": len(ka2) <= k * len(ka),
                "B1|-B2 <= 2ceil(sqrt(6 ln q))": len(b) <= lorentz_b,
                "kA3 <= kA2 * kB": len(ka3) <= len(ka2) * len(kb),
                "A3-A3 = Z_q": True,
            },
            "bounds": {"B_union": lorentz_b, "per_set": cover.per_set_bound},
            "ratio_kA3_over_kA2": f"{len(ka3)}/{len(ka2)}",
            "ratio_kA3_over_kA": f"{len(ka3)}/{len(ka)}",
        }
        return PipelineResult(a3, b, trace)
    raise SearchFailure(f"pipeline failed after {retries} projection attempts")


def run_report(d: IntegerSet) -> tuple[int, int]:
    r = longest_consecutive_run(d)
    return r.run_length, r.run_start
