"""Recursive construction of sets with A - A = Z_q and small k-fold sumset."""

from .pairs import LevelPair, LevelPairEnumeration, weight_patterns
from .plan import SchedulePlan, construction_schedule
from .step import DensityBudget, StepCertificate, step_build, step_sample_verify
from .tree import (
    CrtPoint,
    Stage1,
    Step,
    TooLargeError,
    compute_level_sums,
    materialize_set,
    phi_eval,
    representation_sum,
    shadow_of,
    stage1_build,
)


def enumerate_level_pairs(q_inner: int, k: int, level: int) -> LevelPairEnumeration:
    return LevelPairEnumeration(q_inner, k, level)


__all__ = [
    "CrtPoint",
    "DensityBudget",
    "SchedulePlan",
    "LevelPair",
    "LevelPairEnumeration",
    "Stage1",
    "Step",
    "StepCertificate",
    "TooLargeError",
    "compute_level_sums",
    "enumerate_level_pairs",
    "construction_schedule",
    "materialize_set",
    "phi_eval",
    "representation_sum",
    "shadow_of",
    "stage1_build",
    "step_build",
    "step_sample_verify",
    "weight_patterns",
]
