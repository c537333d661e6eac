"""One inductive step: choose the step primes, certify the density
recursion in exact rationals, and sample-check the coordinate dichotomy."""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import gmpy2
import numpy as np

from .pairs import LevelPair, pattern_count, weight_patterns
from .sieve import primes_above
from .tree import (
    MATERIALIZE_LIMIT,
    CrtPoint,
    Stage1,
    Step,
    compute_level_sums,
    representation_sum,
    shadow_of,
)

SIEVE_LIMIT = 1 << 34


class DensityCheckError(AssertionError):
    """The exact density recursion failed; this indicates a bug."""


@dataclass(frozen=True)
class DensityBudget:
    delta: Fraction
    delta_prime: Fraction
    epsilon: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "delta", Fraction(self.delta))
        object.__setattr__(self, "delta_prime", Fraction(self.delta_prime))
        if not 0 < self.delta < self.delta_prime < 1:
            raise ValueError(f"need 0 < delta < delta' < 1, got {self.delta}, {self.delta_prime}")


@dataclass(frozen=True, eq=False)
class StepCertificate:
    tree: Step
    claimed_density: object  # gmpy2.mpq, exact
    verified_samples: int = 0
    seed: int = 0
    violations: int = 0
    branch_counts: dict = field(default_factory=lambda: {"inner_block": 0, "step_coordinate": 0})

    @property
    def accepted(self) -> bool:
        return self.violations == 0 and self.claimed_density < gmpy2.mpq(
            self.tree.delta_prime.numerator, self.tree.delta_prime.denominator
        )


_level_sum_cache: dict[tuple, object] = {}


def inner_level_sums(inner: Stage1, limit: int = MATERIALIZE_LIMIT):
    key = (inner.k, inner.primes)
    if key not in _level_sum_cache:
        _level_sum_cache[key] = compute_level_sums(inner, inner.level, limit=limit)
    return _level_sum_cache[key]


def reciprocal_sum(primes: np.ndarray) -> tuple:
    """(N, D) with N/D = sum 1/p exactly, D = product of the primes."""
    vals = [gmpy2.mpz(int(p)) for p in primes]
    if not vals:
        return gmpy2.mpz(0), gmpy2.mpz(1)

    def rec(lo, hi):
        if hi - lo == 1:
            return gmpy2.mpz(1), vals[lo]
        mid = (lo + hi) // 2
        n1, d1 = rec(lo, mid)
        n2, d2 = rec(mid, hi)
        return n1 * d2 + n2 * d1, d1 * d2

    return rec(0, len(vals))


def exact_claimed_density(inner_density: Fraction, primes: np.ndarray):
    n, d = reciprocal_sum(primes)
    # d is a product of primes coprime to the inner modulus, so this is reduced
    num = inner_density.numerator * d + inner_density.denominator * n
    den = inner_density.denominator * d
    return gmpy2.mpq(num, den)


def density_digest(value) -> str:
    text = value.numerator.digits(16) + "/" + value.denominator.digits(16)
    return hashlib.sha256(text.encode()).hexdigest()


def step_prime_threshold(pair_count: int, budget: DensityBudget) -> Fraction:
    return Fraction(pair_count) / (budget.delta_prime - budget.delta)


def step_build(inner: Stage1, budget: DensityBudget, sieve_limit: int = SIEVE_LIMIT,
               materialize_limit: int = MATERIALIZE_LIMIT) -> tuple[Step, StepCertificate]:
    """Extend a stage-1 tree by one level.

    ``budget.delta`` must bound the verified inner density |S_m|/q; the step
    primes are the ``t`` smallest primes above t/(delta' - delta), where t is
    the number of level-(m+1) pairs on the inner modulus.
    """
    if not isinstance(inner, Stage1):
        raise ValueError("only one inductive step is supported; inner must be a stage-1 tree")
    m = inner.level
    if m >= inner.k:
        raise ValueError(f"k = {inner.k}: stage-1 already controls every level")
    s_m = inner_level_sums(inner, materialize_limit)
    density = Fraction(len(s_m), inner.modulus)
    if density > budget.delta:
        raise ValueError(f"inner density {density} exceeds budget delta {budget.delta}")
    t = comb(inner.modulus, m + 1) * pattern_count(inner.k, m + 1)
    threshold = step_prime_threshold(t, budget)
    primes = primes_above(threshold, t, exclude_divisors_of=inner.modulus, limit=sieve_limit)
    claimed = exact_claimed_density(density, primes)
    tree = Step(inner, t, primes, m + 1, budget.delta, budget.delta_prime, threshold, claimed)
    cert = StepCertificate(tree, claimed)
    if not cert.accepted:
        raise DensityCheckError(f"claimed density is not below delta' = {budget.delta_prime}")
    return tree, cert


# ---- sampled verification ------------------------------------------------


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for one sample: Philox keyed by the seed, with the
    sample index in the high counter words so streams never overlap."""
    return np.random.Generator(np.random.Philox(key=seed & (2**64 - 1), counter=index << 128))


class _Sampler:
    def __init__(self, tree: Step):
        self.tree = tree
        m1 = tree.level
        big_q = gmpy2.mpz(tree.inner.modulus) * reciprocal_sum(tree.step_primes)[1]
        counts = [gmpy2.comb(big_q, lev) * pattern_count(tree.k, lev) for lev in range(1, m1 + 1)]
        total = sum(counts)
        # r < cutoff[l] (r uniform 64-bit) <=> r * total < (counts[0] + ... + counts[l]) * 2^64
        self.cutoffs = []
        acc = 0
        for c in counts:
            acc += c
            self.cutoffs.append(int(-(-(acc << 64) // total)))
        self.patterns = {lev: weight_patterns(tree.k, lev) for lev in range(1, m1 + 1)}
        self.mods = tree.coordinate_moduli

    def level(self, rng) -> int:
        r = int(rng.bit_generator.random_raw())
        for lev, cut in enumerate(self.cutoffs, start=1):
            if r < cut:
                return lev
        return len(self.cutoffs)

    def point(self, rng) -> CrtPoint:
        return CrtPoint(rng.integers(0, self.mods))

    def pair(self, rng) -> LevelPair:
        lev = self.level(rng)
        pts: list[CrtPoint] = []
        while len(pts) < lev:
            x = self.point(rng)
            if all(x != y for y in pts):
                pts.append(x)
        pats = self.patterns[lev]
        pat = pats[int(rng.bit_generator.random_raw()) % len(pats)]
        return LevelPair(tuple((x, u, v) for x, (u, v) in zip(pts, pat)))


def check_dichotomy(tree: Step, pair: LevelPair, s_m) -> tuple[str, bool]:
    """Either the inner block of the sum lies in S_m, or the step coordinate
    indexed by the shadow's rank vanishes."""
    total = representation_sum(tree, pair)
    shadow = shadow_of(tree, pair)
    a = tree.inner.arity
    if shadow.level <= tree.level - 1:
        return "inner_block", tree.inner.flatten(total.coords[:a]) in s_m
    j = tree.enumeration.rank(shadow)
    return "step_coordinate", int(total.coords[a + j]) == 0


def step_sample_verify(tree: Step, samples: int, seed: int, workers: int = 1,
                       materialize_limit: int = MATERIALIZE_LIMIT) -> StepCertificate:
    s_m = inner_level_sums(tree.inner, materialize_limit)
    sampler = _Sampler(tree)

    def run(indices: range):
        out = []
        for i in indices:
            out.append(check_dichotomy(tree, sampler.pair(sample_rng(seed, i)), s_m))
        return out

    chunk = max(1, -(-samples // max(1, workers)))
    ranges = [range(lo, min(lo + chunk, samples)) for lo in range(0, samples, chunk)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = [r for part in pool.map(run, ranges) for r in part]
    else:
        results = [r for rg in ranges for r in run(rg)]
    branches = {"inner_block": 0, "step_coordinate": 0}
    violations = 0
    for branch, ok in results:
        branches[branch] += 1
        violations += not ok
    claimed = tree.claimed_density
    if claimed is None:
        claimed = exact_claimed_density(Fraction(len(s_m), tree.inner.modulus), tree.step_primes)
        object.__setattr__(tree, "claimed_density", claimed)
    return StepCertificate(tree, claimed, samples, seed, violations, branches)
