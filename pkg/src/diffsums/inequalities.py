"""Empirical checkers for the sumset/difference-set inequalities.

Every comparison with a fractional exponent is decided in integers
(a <= b^{p/r} iff a^r <= b^p); the float margin is only reported.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from .oracles import greedy_bk_set
from .setcore import AnySet, CyclicSet, IntegerSet, crt_compose, difference_set, dilate, kfold_sum, sumset

K_RANGE = (1, 2, 3)
POWER_MEAN_K_MAX = 4


class Slack(NamedTuple):
    ok: bool
    margin: float


def _sizes(a: AnySet, k: int) -> tuple[int, int, int]:
    return len(a), len(kfold_sum(a, k)), len(difference_set(a))


def check_triangle_lower(a: AnySet, k: int) -> Slack:
    """|kA| >= |A - A|^{1 - 2^-k}."""
    _, ka, d = _sizes(a, k)
    e = 1 << k
    return Slack(ka**e >= d ** (e - 1), ka - d ** (1 - 1 / e))


def check_plunnecke(a: AnySet, k: int) -> Slack:
    """|kA| <= t^k n where n = |A|, t = |A - A| / n."""
    n, ka, d = _sizes(a, k)
    bound = Fraction(d) ** k / Fraction(n) ** (k - 1)
    return Slack(bound >= ka, float(bound - ka))


def check_trivial(a: AnySet, k: int) -> Slack:
    """|kA| <= |A|^k."""
    n, ka, _ = _sizes(a, k)
    return Slack(ka <= n**k, float(n**k - ka))


def check_combined_beta(a: AnySet, k: int) -> Slack:
    """|kA|^{2k-1} <= |A - A|^{k^2}; margin on a log scale."""
    _, ka, d = _sizes(a, k)
    return Slack(ka ** (2 * k - 1) <= d ** (k * k), k * k * math.log(d) - (2 * k - 1) * math.log(ka))


def check_freiman_pigaev(a: AnySet) -> tuple[Slack, Slack]:
    """|2A|^{3/4} <= |A - A| <= |2A|^{4/3}."""
    _, s, d = _sizes(a, 2)
    return (
        Slack(s**3 <= d**4, d - s**0.75),
        Slack(d**3 <= s**4, s ** (4 / 3) - d),
    )


def check_power_mean(a: AnySet, k_max: int) -> list[Slack]:
    """|(k+1)A|^k <= |kA|^{k+1} for 1 <= k < k_max: |kA|^{1/k} never increases."""
    sizes = [len(a)]
    cur = a
    for _ in range(1, k_max):
        cur = sumset(cur, a)
        sizes.append(len(cur))
    out = []
    for k in range(1, k_max):
        lo, hi = sizes[k - 1], sizes[k]
        out.append(Slack(hi**k <= lo ** (k + 1), (k + 1) * math.log(lo) - k * math.log(hi)))
    return out


# ---- generators ----------------------------------------------------------


def _uniform_interval(rng) -> IntegerSet:
    n = int(rng.integers(1, 61))
    keep = rng.random(n + 1) < rng.uniform(0.05, 0.9)
    keep[0] = True
    return IntegerSet(tuple(np.flatnonzero(keep).tolist()))


def _uniform_cyclic(rng) -> CyclicSet:
    q = int(rng.integers(2, 81))
    keep = rng.random(q) < rng.uniform(0.05, 0.9)
    keep[int(rng.integers(0, q))] = True
    return CyclicSet.from_array(np.flatnonzero(keep), q)


def _ap(rng) -> IntegerSet:
    n, d, a0 = int(rng.integers(1, 21)), int(rng.integers(1, 10)), int(rng.integers(-50, 51))
    return IntegerSet(tuple(a0 + d * i for i in range(n)))


@lru_cache(maxsize=None)
def _bk(k: int, n: int) -> IntegerSet:
    return greedy_bk_set(k, n)


def _greedy_bk(rng) -> IntegerSet:
    return _bk(int(rng.integers(2, 4)), int(rng.integers(1, 9)))


def _two_aps(rng) -> IntegerSet:
    out = set()
    for _ in range(2):
        n, d, a0 = int(rng.integers(1, 13)), int(rng.integers(1, 8)), int(rng.integers(0, 40))
        out.update(a0 + d * i for i in range(n))
    return IntegerSet(tuple(out))


_COPRIME = [(2, 3), (2, 5), (3, 4), (3, 5), (4, 5), (2, 7), (3, 7), (5, 6), (4, 7), (5, 7)]


def _crt_composite(rng) -> CyclicSet:
    q1, q2 = _COPRIME[int(rng.integers(0, len(_COPRIME)))]
    parts = []
    for q in (q1, q2):
        keep = rng.random(q) < 0.5
        keep[int(rng.integers(0, q))] = True
        parts.append(CyclicSet.from_array(np.flatnonzero(keep), q))
    q = q1 * q2
    unit = next(u for u in range(int(rng.integers(1, q)), 2 * q) if math.gcd(u, q) == 1)
    return dilate(crt_compose(*parts), unit)


GENERATORS: dict[str, Callable[[np.random.Generator], AnySet]] = {
    "uniform_interval": _uniform_interval,
    "uniform_cyclic": _uniform_cyclic,
    "ap": _ap,
    "greedy_bk": _greedy_bk,
    "two_aps": _two_aps,
    "crt_composite": _crt_composite,
}

PROPERTIES = (
    "triangle_lower",
    "plunnecke",
    "combined_beta",
    "combined_implied",
    "freiman_pigaev_lower",
    "freiman_pigaev_upper",
    "power_mean",
)


@dataclass
class CheckOutcome:
    property: str
    trials: int
    violations: int
    worst_margin: float
    generator: str
    seed: int


def check_all(a: AnySet) -> dict[str, list[Slack]]:
    """Run every checker on one set."""
    out: dict[str, list[Slack]] = {p: [] for p in PROPERTIES}
    for k in K_RANGE:
        plu = check_plunnecke(a, k)
        comb = check_combined_beta(a, k)
        out["triangle_lower"].append(check_triangle_lower(a, k))
        out["plunnecke"].append(plu)
        out["combined_beta"].append(comb)
        # the growth bound and |kA| <= n^k together must give the combined bound
        if plu.ok and check_trivial(a, k).ok:
            out["combined_implied"].append(Slack(comb.ok, comb.margin))
    lower, upper = check_freiman_pigaev(a)
    out["freiman_pigaev_lower"].append(lower)
    out["freiman_pigaev_upper"].append(upper)
    out["power_mean"].extend(check_power_mean(a, POWER_MEAN_K_MAX))
    return out


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & (2**64 - 1), counter=trial << 128))


def run_suite(generators, trials: int, seed: int, threads: int = 1) -> list[CheckOutcome]:
    """Draw ``trials`` sets, cycling through ``generators``, and aggregate
    every checker per (property, generator)."""
    names = list(generators)
    if not names:
        return []
    for name in names:
        if name not in GENERATORS:
            raise ValueError(f"unknown generator {name!r}")

    def one(i: int):
        name = names[i % len(names)]
        return name, check_all(GENERATORS[name](trial_rng(seed, i)))

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(one, range(trials), chunksize=64))
    else:
        results = [one(i) for i in range(trials)]

    table: dict[tuple[str, str], CheckOutcome] = {}
    for name in names:
        for prop in PROPERTIES:
            table[(prop, name)] = CheckOutcome(prop, 0, 0, math.inf, name, seed)
    for name, checks in results:
        for prop, slacks in checks.items():
            row = table[(prop, name)]
            for s in slacks:
                row.trials += 1
                row.violations += not s.ok
                row.worst_margin = min(row.worst_margin, s.margin)
    return [table[(prop, name)] for prop in PROPERTIES for name in names]


def outcomes_csv(outcomes: list[CheckOutcome]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["property", "trials", "violations", "worst_margin", "generator", "seed"])
    for o in outcomes:
        w.writerow([o.property, o.trials, o.violations, f"{o.worst_margin:.9g}", o.generator, o.seed])
    return buf.getvalue()
