import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diffsums.oracles import greedy_bk_set, oracle_F
from diffsums.setcore import (
    CyclicSet,
    IntegerSet,
    difference_set,
    kfold_sum,
    longest_consecutive_run,
    negate,
    reduce_mod,
    sumset,
)
from diffsums.transforms import (
    TWO64,
    ProjectionParam,
    SearchFailure,
    cover_size_bound,
    full_difference_pipeline,
    find_good_t,
    lift_doubling,
    lorentz_cover,
    project_pi,
    quasi_additivity_residue,
    witness_base_q,
    witness_product,
    witness_spread,
)

# ---- projection ----------------------------------------------------------


def test_projection_examples():
    assert project_pi(ProjectionParam(1 << 63, 10), 3) == 5
    for a in (1, 12345, TWO64 - 1):
        assert project_pi(ProjectionParam(a, 17), 0) == 0


def test_projection_matches_float_definition():
    p = ProjectionParam(0x9E3779B97F4A7C15, 101)
    for n in range(-500, 500, 7):
        frac = (p.t * n) - math.floor(p.t * n)
        assert project_pi(p, n) == math.floor(101 * frac)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, TWO64 - 1), st.integers(1, 500), st.integers(-10**12, 10**12), st.integers(-10**12, 10**12))
def test_quasi_additivity(a, q, x, y):
    assert quasi_additivity_residue(ProjectionParam(a, q), x, y) in (0, 1, -q, 1 - q)


def test_find_good_t():
    q = 31
    spread = IntegerSet(tuple(i * 10**9 for i in range(q)))
    p, size = find_good_t(spread, seed=4)
    assert 3 * size > q
    assert size == len({project_pi(p, n) for n in spread})
    p, size = find_good_t(IntegerSet(tuple(range(q))), seed=4)
    assert 3 * size > q
    with pytest.raises(ValueError):
        find_good_t(IntegerSet((5,)), seed=1)


def test_find_good_t_attempt_cap():
    # |S| = 2 needs an injective projection; a cap of zero draws always fails
    with pytest.raises(SearchFailure):
        find_good_t(IntegerSet((0, 1)), seed=1, attempts=0)


# ---- covering ------------------------------------------------------------


def test_cover_size_bound():
    assert cover_size_bound(4, 2, 1) == 3
    assert cover_size_bound(101, 101, 2) == math.ceil(math.sqrt(math.log(101)))


def test_cover_of_full_group():
    res = lorentz_cover(CyclicSet.full(9), 2, seed=1)
    assert [b.elements() for b in res.sets] == [[0], [0]]
    assert res.per_set_bound >= 1 and not res.bound_exceeded


def test_cover_small():
    a = CyclicSet.from_elements([0, 1], 4)
    res = lorentz_cover(a, 1, seed=2)
    assert res.per_set_bound == 3
    assert sumset(a, res.sets[0]).is_full()
    assert len(res.sets[0]) <= 3


@settings(max_examples=40, deadline=None)
@given(st.integers(5, 120).flatmap(lambda q: st.tuples(
    st.just(q), st.lists(st.integers(0, q - 1), min_size=1, max_size=q))), st.integers(1, 3), st.integers(0, 2**32))
def test_cover_always_covers(data, k, seed):
    q, xs = data
    a = CyclicSet.from_elements(xs, q)
    res = lorentz_cover(a, k, seed)
    total = a
    for b in res.sets:
        total = sumset(total, b)
    assert total.is_full()
    assert len(res.sets) == k
    if not res.bound_exceeded:
        assert all(len(b) <= res.per_set_bound for b in res.sets)


def test_cover_is_seeded():
    a = CyclicSet.from_elements(range(0, 90, 7), 97)
    r1, r2 = lorentz_cover(a, 2, 5), lorentz_cover(a, 2, 5)
    assert [b.mask for b in r1.sets] == [b.mask for b in r2.sets]


# ---- lift and witnesses --------------------------------------------------


def test_lift_example():
    a = CyclicSet.from_elements([0, 1, 3], 7)
    lifted = lift_doubling(a)
    assert lifted.members == (-6, -4, 0, 1, 3, 7)
    d = difference_set(lifted)
    assert all(x in d for x in range(-7, 8))
    assert longest_consecutive_run(d).run_length >= 15
    assert reduce_mod(lifted, 7) == a
    assert len(kfold_sum(lifted, 2)) <= 4 * len(kfold_sum(a, 2))


@pytest.mark.parametrize("q", range(2, 20))
@pytest.mark.parametrize("k", [1, 2, 3])
def test_lift_of_oracle_witness(q, k):
    r = oracle_F(k, q)
    lifted = lift_doubling(r.witness)
    assert len(lifted) == 2 * len(r.witness)
    assert longest_consecutive_run(difference_set(lifted)).run_length >= 2 * q + 1
    assert len(kfold_sum(lifted, k)) <= 2 * k * r.value


def test_witness_product():
    w = witness_product(CyclicSet.from_elements([0, 1, 3], 7), CyclicSet.from_elements([0, 1], 2))
    assert w.modulus == 14 and len(w) == 6
    assert difference_set(w).is_full()
    with pytest.raises(ValueError):
        witness_product(CyclicSet.from_elements([0, 1], 4), CyclicSet.from_elements([0, 1], 2))


def test_witness_base_q():
    w = witness_base_q(IntegerSet((0, 1)), 2, IntegerSet((0, 1)))
    assert w.members == (0, 1, 2, 3)
    assert longest_consecutive_run(difference_set(w)).run_length >= 4


def test_witness_spread_example():
    a = IntegerSet((0, 1, 3))
    w = witness_spread(a, a, 2)
    assert len(kfold_sum(w, 2)) == 36 and len(difference_set(w)) == 49


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 30), min_size=1, max_size=6), st.lists(st.integers(-20, 20), min_size=1, max_size=6),
       st.integers(1, 3))
def test_witness_spread_multiplies(xs, ys, k):
    a1, a2 = IntegerSet(tuple(xs)), IntegerSet(tuple(ys))
    w = witness_spread(a1, a2, k)
    assert len(kfold_sum(w, k)) == len(kfold_sum(a1, k)) * len(kfold_sum(a2, k))
    assert len(difference_set(w)) == len(difference_set(a1)) * len(difference_set(a2))


# ---- pipeline ------------------------------------------------------------


def test_pipeline_sidon():
    a = greedy_bk_set(2, 11)
    assert len(difference_set(a)) >= 101
    res = full_difference_pipeline(a, 101, 2, seed=1)
    assert res.a3.modulus == 101
    assert difference_set(res.a3).is_full()
    sizes = res.trace["sizes"]
    assert 6 * sizes["A2-A2"] > 101
    assert sizes["B1|-B2"] <= 2 * math.ceil(math.sqrt(6 * math.log(101))) == 12
    assert all(res.trace["checks"].values())
    assert len(res.b_union) == sizes["B1|-B2"]


def test_pipeline_dense_input():
    a = IntegerSet(tuple(range(12)))
    res = full_difference_pipeline(a, 13, 2, seed=3)
    assert difference_set(res.a3).is_full()
    if res.trace["sizes"]["A2-A2"] == 13:
        assert res.b_union.elements() == [0]
        assert res.trace["sizes"]["A3"] == res.trace["sizes"]["A2"]


def test_pipeline_rejects_small_difference_set():
    with pytest.raises(ValueError):
        full_difference_pipeline(IntegerSet((0, 1, 3)), 11, 2, seed=0)


def test_pipeline_is_seeded():
    a = greedy_bk_set(2, 11)
    r1, r2 = full_difference_pipeline(a, 101, 2, seed=9), full_difference_pipeline(a, 101, 2, seed=9)
    assert r1.trace == r2.trace and r1.a3 == r2.a3
