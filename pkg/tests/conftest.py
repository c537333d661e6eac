import pytest

from diffsums.construction import DensityBudget, stage1_build, step_build


@pytest.fixture(scope="session")
def toy_step():
    """One inductive step over the (5, 7, 11) stage-1 tree, delta' = 1/2."""
    inner = stage1_build(2, "3/4")
    return step_build(inner, DensityBudget("29/77", "1/2"))
