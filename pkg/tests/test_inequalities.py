import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diffsums.inequalities import (
    GENERATORS,
    PROPERTIES,
    check_all,
    check_combined_beta,
    check_freiman_pigaev,
    check_plunnecke,
    check_power_mean,
    check_triangle_lower,
    check_trivial,
    outcomes_csv,
    run_suite,
    trial_rng,
)
from diffsums.oracles import greedy_bk_set
from diffsums.setcore import CyclicSet, IntegerSet, kfold_sum

A013 = IntegerSet((0, 1, 3))
SINGLE = IntegerSet((5,))


def test_triangle_lower_examples():
    s = check_triangle_lower(A013, 2)
    assert s.ok and s.margin == pytest.approx(6 - 7**0.75)
    assert check_triangle_lower(SINGLE, 3).ok
    assert check_triangle_lower(IntegerSet((0, 1)), 1).ok


def test_plunnecke_examples():
    s = check_plunnecke(A013, 2)
    assert s.ok and s.margin == pytest.approx(float(Fraction(49, 3) - 6))
    assert check_plunnecke(SINGLE, 4).margin == 0
    for n in (2, 5, 9):
        ap = IntegerSet(tuple(range(0, 3 * n, 3)))
        for k in (1, 2, 3):
            assert len(kfold_sum(ap, k)) == k * n - k + 1
            assert check_plunnecke(ap, k).ok


def test_trivial_bound():
    assert check_trivial(A013, 2).ok
    assert check_trivial(SINGLE, 3).margin == 0


def test_combined_beta_examples():
    s = check_combined_beta(A013, 2)
    assert s.ok and 6**3 <= 7**4
    assert check_combined_beta(A013, 1).ok
    b2 = greedy_bk_set(2, 5)
    assert len(kfold_sum(b2, 2)) == 15
    assert check_combined_beta(b2, 2).ok


def test_freiman_pigaev_examples():
    lo, hi = check_freiman_pigaev(A013)
    assert lo.ok and hi.ok
    assert lo.margin == pytest.approx(7 - 6**0.75) and hi.margin == pytest.approx(6 ** (4 / 3) - 7)
    lo, hi = check_freiman_pigaev(SINGLE)
    assert lo.ok and hi.ok
    lo, hi = check_freiman_pigaev(IntegerSet(tuple(range(10))))
    assert lo.ok and hi.ok and hi.margin == pytest.approx(19 ** (4 / 3) - 19)


def test_power_mean_examples():
    slacks = check_power_mean(A013, 3)
    assert [s.ok for s in slacks] == [True, True]
    # |3A| = 9 for {0, 1, 3}: 81 <= 216
    assert len(kfold_sum(A013, 3)) == 9
    assert slacks[1].margin == pytest.approx(3 * math.log(6) - 2 * math.log(9))
    assert all(s.margin == 0 for s in check_power_mean(SINGLE, 4))


any_set = st.one_of(
    st.lists(st.integers(-40, 40), min_size=1, max_size=10).map(lambda xs: IntegerSet(tuple(xs))),
    st.integers(2, 60).flatmap(
        lambda q: st.lists(st.integers(0, q - 1), min_size=1, max_size=10).map(lambda xs: CyclicSet.from_elements(xs, q))
    ),
)


@settings(max_examples=200, deadline=None)
@given(any_set)
def test_checkers_never_fail(a):
    checks = check_all(a)
    for prop, slacks in checks.items():
        assert all(s.ok for s in slacks), prop


@settings(max_examples=200, deadline=None)
@given(any_set, st.integers(1, 3))
def test_plunnecke_and_trivial_imply_combined(a, k):
    if check_plunnecke(a, k).ok and check_trivial(a, k).ok:
        assert check_combined_beta(a, k).ok


def test_generators_are_seeded():
    for name, gen in GENERATORS.items():
        a, b = gen(trial_rng(3, 17)), gen(trial_rng(3, 17))
        assert a == b, name
        assert len(a) >= 1


def test_run_suite_small():
    out = run_suite(list(GENERATORS), 300, seed=1)
    assert len(out) == len(PROPERTIES) * len(GENERATORS)
    assert all(o.violations == 0 for o in out)
    assert all(o.trials > 0 for o in out if o.property != "combined_implied")


def test_run_suite_threads_identical():
    a = outcomes_csv(run_suite(list(GENERATORS), 200, seed=5, threads=1))
    b = outcomes_csv(run_suite(list(GENERATORS), 200, seed=5, threads=4))
    assert a == b


def test_empty_generator_list():
    assert run_suite([], 100, seed=1) == []


def test_unknown_generator():
    with pytest.raises(ValueError):
        run_suite(["nope"], 1, seed=1)


def test_sidon_sets_sit_near_the_upper_side():
    for n in range(3, 10):
        a = greedy_bk_set(2, n)
        lo, hi = check_freiman_pigaev(a)
        assert lo.ok and hi.ok
        ratio = math.log(n * n - n + 1) / math.log(n * (n + 1) // 2)
        assert 4 / 3 - ratio < ratio - 3 / 4
