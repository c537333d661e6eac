"""Feasibility schedule for the full recursive construction at given k, epsilon."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, lgamma, log, log10

from .pairs import pattern_count
from .step import SIEVE_LIMIT, step_prime_threshold, DensityBudget
from .tree import MATERIALIZE_LIMIT, compute_level_sums, stage1_build

# Largest number of step primes a symbolic step will hold in memory.
PAIR_BUDGET = 10**7


@dataclass
class StagePlan:
    level: int
    budget: Fraction
    kind: str
    status: str
    modulus: int | None = None
    log10_modulus: float = 0.0
    pair_count: int | None = None
    log10_pair_count: float | None = None
    threshold: Fraction | None = None
    density: Fraction | None = None
    note: str = ""


@dataclass
class SchedulePlan:
    k: int
    epsilon: Fraction
    stages: list[StagePlan] = field(default_factory=list)

    def rows(self) -> list[dict]:
        out = []
        for s in self.stages:
            out.append({
                "level": s.level,
                "budget": f"{s.budget.numerator}/{s.budget.denominator}",
                "kind": s.kind,
                "status": s.status,
                "modulus": s.modulus,
                "log10_modulus": round(s.log10_modulus, 3),
                "pair_count": s.pair_count,
                "log10_pair_count": None if s.log10_pair_count is None else round(s.log10_pair_count, 3),
                "threshold": None if s.threshold is None else f"{s.threshold.numerator}/{s.threshold.denominator}",
                "density": None if s.density is None else f"{s.density.numerator}/{s.density.denominator}",
                "note": s.note,
            })
        return out


def _log10_comb(n_log10: float, r: int) -> float:
    return r * n_log10 - lgamma(r + 1) / log(10)


def construction_schedule(k: int, epsilon, materialize_limit: int = MATERIALIZE_LIMIT,
                          sieve_limit: int = SIEVE_LIMIT, pair_budget: int = PAIR_BUDGET) -> SchedulePlan:
    """Budgets delta_m = (m+1) eps / (k+1) for m = 1..k, with the status of
    each stage under the configured limits. Nothing is truncated silently:
    stages beyond reach are listed with size estimates and marked infeasible."""
    epsilon = Fraction(epsilon)
    if k < 1 or not 0 < epsilon < 1:
        raise ValueError("need k >= 1 and 0 < epsilon < 1")
    budgets = [Fraction(m + 1, k + 1) * epsilon for m in range(1, k + 1)]
    plan = SchedulePlan(k, epsilon)

    tree = stage1_build(k, budgets[0])
    q = tree.modulus
    first = StagePlan(1, budgets[0], "stage1", "materializable", modulus=q, log10_modulus=log10(q))
    if q <= materialize_limit:
        first.density = Fraction(len(compute_level_sums(tree, 1, limit=materialize_limit)), q)
        first.note = f"primes {tree.primes}"
    else:
        first.status = "symbolic-verifiable"
        first.density = budgets[0]
        first.note = f"primes {tree.primes}; modulus above materialization limit"
    plan.stages.append(first)

    log_q = log10(q)
    density = first.density
    inner_exact = q if q <= materialize_limit else None
    for m in range(1, k):
        lev = m + 1
        w = pattern_count(k, lev)
        stage = StagePlan(lev, budgets[m], "step", "infeasible")
        if inner_exact is not None:
            t = comb(inner_exact, lev) * w
            stage.pair_count = t
            stage.log10_pair_count = log10(t)
        else:
            stage.log10_pair_count = _log10_comb(log_q, lev) + log10(w)
        if density is None or density >= budgets[m]:
            stage.note = "density budget exhausted"
            stage.log10_modulus = float("inf")
            plan.stages.append(stage)
            density, inner_exact, log_q = None, None, float("inf")
            continue
        if stage.pair_count is not None:
            stage.threshold = step_prime_threshold(stage.pair_count, DensityBudget(density, budgets[m]))
            thr = float(stage.threshold)
            top = thr + 1.2 * stage.pair_count * log(max(thr, 3.0)) + 10**4
            stage.log10_modulus = log_q + stage.pair_count * log10(top)
            if stage.pair_count <= pair_budget and top <= sieve_limit:
                stage.status = "symbolic-verifiable"
                stage.note = f"largest step prime about {top:.3g}"
            else:
                stage.note = "pair count or prime range exceeds budgets"
        else:
            # t is astronomically large; primes exceed t / (delta' - delta) >= t.
            stage.log10_modulus = log_q + 10**stage.log10_pair_count * stage.log10_pair_count if stage.log10_pair_count < 300 else float("inf")
            stage.note = f"t ~ 10^{stage.log10_pair_count:.3g}: tower growth"
        plan.stages.append(stage)
        density = budgets[m]
        inner_exact = None
        log_q = stage.log10_modulus
    return plan
