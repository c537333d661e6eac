"""Construction trees: the stage-1 product-of-primes modulus with its linear
phi, and one inductive step layered over it.

Elements of Z_q are handled as residue vectors (CrtPoint) aligned with the
tree's list of coordinate moduli; a step tree is never flattened to one
integer modulus.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import prod

import numpy as np

from ..setcore import CyclicSet, sumset
from .pairs import LevelPair, LevelPairEnumeration, weight_patterns
from .sieve import smallest_primes_above

MATERIALIZE_LIMIT = 1 << 20
LEVEL_SUM_BUDGET = 10_000


class TooLargeError(RuntimeError):
    """Modulus too large to materialize; use sampled verification instead."""


class BudgetError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class CrtPoint:
    coords: np.ndarray

    def __eq__(self, other) -> bool:
        return isinstance(other, CrtPoint) and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(self.coords.tobytes())

    def __len__(self) -> int:
        return len(self.coords)

    def __repr__(self):
        c = self.coords.tolist()
        return f"CrtPoint({c if len(c) <= 8 else c[:8] + ['...']})"


@dataclass(frozen=True, eq=False)
class Stage1:
    """Modulus q = p_0 ... p_k, phi(x)_j = (j - k)/k * x_j mod p_j."""

    k: int
    primes: tuple[int, ...]
    delta: Fraction

    def __post_init__(self):
        if len(self.primes) != self.k + 1 or len(set(self.primes)) != len(self.primes):
            raise ValueError("stage-1 needs k+1 distinct primes")
        if min(self.primes) <= self.k:
            raise ValueError("stage-1 primes must exceed k")

    level = 1

    @property
    def coordinate_moduli(self) -> np.ndarray:
        return np.array(self.primes, dtype=np.int64)

    @property
    def arity(self) -> int:
        return len(self.primes)

    @cached_property
    def modulus(self) -> int:
        return prod(self.primes)

    @cached_property
    def coefficients(self) -> np.ndarray:
        k = self.k
        return np.array([((j - k) * pow(k, -1, p)) % p for j, p in enumerate(self.primes)], dtype=np.int64)

    @cached_property
    def _idempotents(self) -> np.ndarray:
        q = self.modulus
        return np.array([(q // p) * pow(q // p, -1, p) % q for p in self.primes], dtype=object)

    def point(self, residue: int) -> CrtPoint:
        return CrtPoint(np.array([residue % p for p in self.primes], dtype=np.int64))

    def flatten(self, point: CrtPoint | np.ndarray) -> int:
        coords = point.coords if isinstance(point, CrtPoint) else point
        return int(sum(int(c) * e for c, e in zip(coords[: self.arity], self._idempotents)) % self.modulus)

    def flatten_array(self, coords: np.ndarray) -> np.ndarray:
        """Flatten a (arity, n) array of residue vectors to residues mod q."""
        q = self.modulus
        out = np.zeros(coords.shape[1], dtype=np.int64)
        for row, e in zip(coords, self._idempotents):
            out = (out + row * int(e)) % q
        return out

    def all_coords(self) -> np.ndarray:
        r = np.arange(self.modulus, dtype=np.int64)
        return np.stack([r % p for p in self.primes])


@dataclass(frozen=True, eq=False)
class Step:
    """q' = q * p_1 ... p_t over a stage-1 inner tree; coordinate j of phi
    kills the representation sums whose shadow is the j-th level-(m+1) pair."""

    inner: Stage1
    pair_count: int
    step_primes: np.ndarray
    level: int
    delta: Fraction
    delta_prime: Fraction
    threshold: Fraction
    claimed_density: object = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.step_primes) != self.pair_count:
            raise ValueError("need exactly one step prime per level pair")
        # u_j + v_j <= k must be invertible mod every step prime.
        if self.pair_count and int(self.step_primes.min()) <= self.k:
            raise ValueError("step primes must exceed k")

    @property
    def k(self) -> int:
        return self.inner.k

    @property
    def arity(self) -> int:
        return self.inner.arity + self.pair_count

    @cached_property
    def coordinate_moduli(self) -> np.ndarray:
        return np.concatenate([self.inner.coordinate_moduli, self.step_primes])

    @cached_property
    def enumeration(self) -> LevelPairEnumeration:
        return LevelPairEnumeration(self.inner.modulus, self.k, self.level)

    @cached_property
    def inverses(self) -> np.ndarray:
        """Row w-1 holds w^{-1} mod p_j for every step prime."""
        p = self.step_primes
        rows = []
        for w in range(1, self.k + 1):
            rows.append(_modpow(np.full_like(p, w), p - 2, p))
        return np.stack(rows)

    @cached_property
    def modulus_bits(self) -> float:
        return float(np.log2(self.inner.modulus) + np.log2(self.step_primes.astype(np.float64)).sum())


def _modpow(base: np.ndarray, exp: np.ndarray, mod: np.ndarray) -> np.ndarray:
    result = np.ones_like(base)
    base = base % mod
    exp = exp.copy()
    while exp.any():
        odd = (exp & 1).astype(bool)
        result[odd] = (result[odd] * base[odd]) % mod[odd]
        base = (base * base) % mod
        exp >>= 1
    return result


Tree = Stage1 | Step


def stage1_build(k: int, delta) -> Stage1:
    """Smallest k+1 primes above max(k, (k+1)/delta), so sum 1/p_j < delta."""
    delta = Fraction(delta)
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    threshold = max(Fraction(k), Fraction(k + 1) / delta)
    primes = smallest_primes_above(threshold, k + 1)
    tree = Stage1(k, primes, delta)
    assert sum(Fraction(1, p) for p in primes) < delta
    return tree


def _as_point(tree: Tree, x) -> CrtPoint:
    if isinstance(x, CrtPoint):
        if len(x) != tree.arity:
            raise ValueError(f"point has {len(x)} coordinates, tree expects {tree.arity}")
        return x
    if isinstance(tree, Stage1):
        return tree.point(int(x))
    raise ValueError("step-tree points must be CrtPoints")


def _phi_step_sparse(tree: Step, x0: int, x_step: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nonzero step coordinates of phi: -v_j(x0) x_j / (u_j(x0) + v_j(x0)) mod p_j,
    at the ranks j of the level pairs whose support contains x0."""
    ranks, u, v = tree.enumeration.containing(x0)
    if not ranks.size:
        return ranks, ranks
    pr = tree.step_primes[ranks]
    inv = tree.inverses[u + v - 1, ranks]
    return ranks, (((pr - v) % pr) * x_step[ranks] % pr) * inv % pr


def phi_eval(tree: Tree, x) -> CrtPoint:
    x = _as_point(tree, x)
    if isinstance(tree, Stage1):
        return CrtPoint((tree.coefficients * x.coords) % tree.coordinate_moduli)
    a = tree.inner.arity
    inner = phi_eval(tree.inner, CrtPoint(x.coords[:a]))
    ranks, vals = _phi_step_sparse(tree, tree.inner.flatten(x.coords[:a]), x.coords[a:])
    step = np.zeros(tree.pair_count, dtype=np.int64)
    step[ranks] = vals
    return CrtPoint(np.concatenate([inner.coords, step]))


def representation_sum(tree: Tree, pair: LevelPair) -> CrtPoint:
    """sum over the support of u(x) phi(x) + v(x) (x + phi(x))."""
    if pair.weight != tree.k:
        raise ValueError(f"pair weight {pair.weight} != k = {tree.k}")
    mods = tree.coordinate_moduli
    points = [(_as_point(tree, x), u, v) for x, u, v in pair.support]
    if isinstance(tree, Stage1):
        total = np.zeros(tree.arity, dtype=np.int64)
        for xp, u, v in points:
            total = (total + (u + v) * phi_eval(tree, xp).coords + v * xp.coords) % mods
        return CrtPoint(total)
    # Step tree: the dense part is sum v x; phi contributes only on sparse ranks.
    a = tree.inner.arity
    total = np.zeros(tree.arity, dtype=np.int64)
    for xp, u, v in points:
        if v:
            total += v * xp.coords
    total %= mods
    inner = tree.inner
    for xp, u, v in points:
        ph = phi_eval(inner, CrtPoint(xp.coords[:a])).coords
        total[:a] = (total[:a] + (u + v) * ph) % inner.coordinate_moduli
        ranks, vals = _phi_step_sparse(tree, inner.flatten(xp.coords[:a]), xp.coords[a:])
        idx = a + ranks
        total[idx] = (total[idx] + (u + v) * vals) % mods[idx]
    return CrtPoint(total)


def shadow_of(tree: Step, pair: LevelPair) -> LevelPair:
    """Sum the weights over the step coordinates, keeping the inner block."""
    a = tree.inner.arity
    acc: dict[int, list[int]] = {}
    for x, u, v in pair.support:
        x0 = tree.inner.flatten(_as_point(tree, x).coords[:a])
        w = acc.setdefault(x0, [0, 0])
        w[0] += u
        w[1] += v
    return LevelPair(tuple((x0, u, v) for x0, (u, v) in sorted(acc.items())))


def _check_materializable(tree: Tree, limit: int) -> Stage1:
    if not isinstance(tree, Stage1):
        raise TooLargeError("step moduli are never materialized; use step_sample_verify")
    if tree.modulus > limit:
        raise TooLargeError(f"modulus {tree.modulus} exceeds materialization limit {limit}; use sampled verification")
    return tree


def _branch_images(tree: Stage1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    coords = tree.all_coords()
    mods = tree.coordinate_moduli[:, None]
    phi = (tree.coefficients[:, None] * coords) % mods
    return coords, phi, mods


def materialize_set(tree: Tree, limit: int = MATERIALIZE_LIMIT) -> CyclicSet:
    """A = {phi(x), x + phi(x) : x in Z_q} as residues."""
    tree = _check_materializable(tree, limit)
    coords, phi, mods = _branch_images(tree)
    left = tree.flatten_array(phi)
    right = tree.flatten_array((coords + phi) % mods)
    return CyclicSet.from_array(np.concatenate([left, right]), tree.modulus)


def weighted_image(tree: Stage1, u: int, v: int, limit: int = MATERIALIZE_LIMIT) -> CyclicSet:
    """{u phi(x) + v (x + phi(x)) : x in Z_q}."""
    tree = _check_materializable(tree, limit)
    coords, phi, mods = _branch_images(tree)
    return CyclicSet.from_array(tree.flatten_array(((u + v) * phi + v * coords) % mods), tree.modulus)


def compute_level_sums(tree: Tree, m: int, limit: int = MATERIALIZE_LIMIT, budget: int = LEVEL_SUM_BUDGET) -> CyclicSet:
    """S_m(phi): all representation sums of level <= m.

    For a level-l weight pattern the sumset of the per-point images also
    picks up coinciding points, which are level < l representations and
    therefore already in S_m; so the union below is exact.
    """
    tree = _check_materializable(tree, limit)
    k = tree.k
    if not 1 <= m <= k:
        raise ValueError(f"level cap must lie in [1, {k}]")
    shapes = set()
    for level in range(1, m + 1):
        for pat in weight_patterns(k, level):
            shapes.add(tuple(sorted(pat)))
    if len(shapes) > budget:
        raise BudgetError(f"{len(shapes)} weight shapes exceed level-sum budget {budget}")
    images: dict[tuple[int, int], CyclicSet] = {}
    acc = 0
    for shape in sorted(shapes):
        part = None
        for uv in shape:
            if uv not in images:
                images[uv] = weighted_image(tree, *uv, limit=limit)
            part = images[uv] if part is None else sumset(part, images[uv])
        acc |= part.mask
    return CyclicSet(tree.modulus, acc)
