import itertools
from fractions import Fraction
from math import comb, prod

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diffsums.construction import (
    CrtPoint,
    DensityBudget,
    LevelPair,
    TooLargeError,
    compute_level_sums,
    enumerate_level_pairs,
    construction_schedule,
    materialize_set,
    phi_eval,
    representation_sum,
    shadow_of,
    stage1_build,
    step_build,
    step_sample_verify,
)
from diffsums.construction import certificate as certs
from diffsums.construction.sieve import primes_above, simple_sieve, smallest_primes_above
from diffsums.construction.step import check_dichotomy, exact_claimed_density, inner_level_sums, reciprocal_sum
from diffsums.setcore import difference_set, kfold_sum


@pytest.fixture(scope="module")
def t2():
    return stage1_build(2, "1/2")


# ---- sieve ---------------------------------------------------------------


def test_simple_sieve():
    assert simple_sieve(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_primes_above_skips_divisors_and_threshold():
    assert smallest_primes_above(Fraction(13, 2), 3) == (7, 11, 13)
    assert primes_above(6, 3, exclude_divisors_of=7).tolist() == [11, 13, 17]
    # strictly above an integer threshold
    assert primes_above(7, 1).tolist() == [11]


def test_segmented_sieve_matches_simple():
    seg = primes_above(3_000_000, 2000)
    ref = simple_sieve(int(seg[-1]))
    ref = ref[ref > 3_000_000][:2000]
    assert seg.tolist() == ref.tolist()


# ---- stage 1 -------------------------------------------------------------


@pytest.mark.parametrize(
    "k, delta, primes",
    [(2, "1/2", (7, 11, 13)), (3, "1/2", (11, 13, 17, 19)), (1, "1/2", (5, 7))],
)
def test_stage1_primes(k, delta, primes):
    tree = stage1_build(k, delta)
    assert tree.primes == primes
    assert tree.modulus == prod(primes)
    assert sum(Fraction(1, p) for p in primes) < Fraction(delta)


def test_stage1_rejects_bad_parameters():
    with pytest.raises(ValueError):
        stage1_build(0, "1/2")
    with pytest.raises(ValueError):
        stage1_build(2, 1)


def test_phi_examples(t2):
    assert phi_eval(t2, CrtPoint(np.array([1, 1, 1]))).coords.tolist() == [6, 5, 0]
    assert phi_eval(t2, 0).coords.tolist() == [0, 0, 0]
    # last coordinate is always 0
    for x in range(0, 1001, 37):
        assert phi_eval(t2, x).coords[-1] == 0


def test_materialized_set_k2(t2):
    a = materialize_set(t2)
    assert len(a) == 209
    assert difference_set(a).is_full()


def test_level_sums_k2(t2):
    s1 = compute_level_sums(t2, 1)
    assert len(s1) == 281 == 1001 - 6 * 10 * 12
    assert len(s1) < Fraction(1, 2) * 1001
    assert compute_level_sums(t2, 2) == kfold_sum(materialize_set(t2), 2)


def test_level_one_is_union_of_hyperplanes(t2):
    s1 = compute_level_sums(t2, 1)
    hyper = {x for x in range(1001) if any(x % p == 0 for p in t2.primes)}
    assert set(s1.elements()) == hyper


def test_level_one_pair_kills_coordinate(t2):
    for x in range(0, 1001, 13):
        for j in range(3):
            s = representation_sum(t2, LevelPair(((x, j, 2 - j),)))
            assert s.coords[j] == 0


def test_kfold_equals_level_k_sums_k3():
    tree = stage1_build(3, "1/2")
    a = materialize_set(tree)
    assert len(a) == 6409 and difference_set(a).is_full()
    assert len(compute_level_sums(tree, 1)) == 11629 == 46189 - 10 * 12 * 16 * 18


@pytest.mark.parametrize("k, delta", [(1, "1/2"), (2, "3/4"), (2, "1/3"), (3, "3/5")])
def test_stage1_invariants(k, delta):
    tree = stage1_build(k, delta)
    a = materialize_set(tree)
    assert difference_set(a).is_full()
    s1 = compute_level_sums(tree, 1)
    q = tree.modulus
    expected = q - prod(p - 1 for p in tree.primes)
    assert len(s1) == expected < Fraction(delta) * q
    if q < 5000:
        assert compute_level_sums(tree, k) == kfold_sum(a, k)


def test_materialize_limit(t2):
    with pytest.raises(TooLargeError):
        materialize_set(t2, limit=1000)


# ---- enumeration -----------------------------------------------------------


def test_pair_counts():
    assert enumerate_level_pairs(385, 2, 2).count == 295680 == 4 * comb(385, 2)
    assert enumerate_level_pairs(17, 2, 1).count == 51
    with pytest.raises(ValueError):
        enumerate_level_pairs(17, 2, 3)


def test_enumeration_order_small():
    e = enumerate_level_pairs(4, 2, 2)
    first = [e.unrank(i).support for i in range(5)]
    # support {0, 1} first, then the u-splits in lexicographic order
    assert first[:4] == [((0, 0, 1), (1, 0, 1)), ((0, 0, 1), (1, 1, 0)), ((0, 1, 0), (1, 0, 1)), ((0, 1, 0), (1, 1, 0))]
    assert first[4] == ((0, 0, 1), (2, 0, 1))


@pytest.mark.parametrize("n, k, level", [(6, 3, 2), (5, 4, 3), (7, 2, 1), (4, 3, 3)])
def test_rank_unrank_exhaustive(n, k, level):
    e = enumerate_level_pairs(n, k, level)
    seen = set()
    for i in range(e.count):
        p = e.unrank(i)
        assert p.level == level and p.weight == k
        assert e.rank(p) == i
        seen.add(p)
    assert len(seen) == e.count


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 295679))
def test_rank_unrank_toy(i):
    e = enumerate_level_pairs(385, 2, 2)
    assert e.rank(e.unrank(i)) == i


def test_containing_matches_enumeration():
    e = enumerate_level_pairs(6, 3, 2)
    ranks, u, v = e.containing(2)
    for r, uu, vv in zip(ranks.tolist(), u.tolist(), v.tolist()):
        assert e.unrank(r).as_dict()[2] == (uu, vv)
    assert sorted(ranks.tolist()) == [i for i in range(e.count) if 2 in e.unrank(i).as_dict()]


# ---- inductive step --------------------------------------------------------


def _step_point(step, x0, rng):
    inner = step.inner.point(x0).coords
    tail = rng.integers(0, step.step_primes)
    return CrtPoint(np.concatenate([inner, tail]))


def test_step_parameters(toy_step):
    step, cert = toy_step
    assert step.pair_count == 295680
    assert step.threshold == Fraction(45534720, 19)
    assert int(step.step_primes[0]) == 2396567
    assert step.delta == Fraction(29, 77)
    assert cert.accepted


def test_claimed_density_is_exact(toy_step):
    step, cert = toy_step
    num, den = reciprocal_sum(step.step_primes)
    density = exact_claimed_density(Fraction(29, 77), step.step_primes)
    assert density == cert.claimed_density
    assert density * 77 * den == 29 * den + 77 * num
    assert density < Fraction(1, 2)


def test_budget_requires_gap():
    with pytest.raises(ValueError):
        DensityBudget("1/2", "1/2")
    with pytest.raises(ValueError):
        DensityBudget("1/2", "1/3")


def test_budget_below_inner_density_rejected():
    with pytest.raises(ValueError):
        step_build(stage1_build(2, "3/4"), DensityBudget("1/4", "1/2"))


def test_shadow_examples(toy_step):
    step, _ = toy_step
    rng = np.random.default_rng(0)
    x, y, z = _step_point(step, 10, rng), _step_point(step, 10, rng), _step_point(step, 200, rng)
    assert shadow_of(step, LevelPair(((x, 1, 1),))) == LevelPair(((10, 1, 1),))
    assert shadow_of(step, LevelPair(((x, 1, 0), (y, 0, 1)))) == LevelPair(((10, 1, 1),))
    assert shadow_of(step, LevelPair(((x, 0, 1), (z, 1, 0)))) == LevelPair(((10, 0, 1), (200, 1, 0)))


def test_step_phi_zero(toy_step):
    step, _ = toy_step
    zero = CrtPoint(np.zeros(step.arity, dtype=np.int64))
    assert not phi_eval(step, zero).coords.any()


def test_step_pair_kills_shadow_coordinate(toy_step):
    step, _ = toy_step
    s1 = inner_level_sums(step.inner)
    rng = np.random.default_rng(1)
    a = step.inner.arity
    for x0, y0 in [(3, 17), (0, 384), (100, 101)]:
        for pu, pv in [((1, 0), (1, 0)), ((0, 1), (1, 0)), ((0, 1), (0, 1))]:
            x, y = _step_point(step, x0, rng), _step_point(step, y0, rng)
            pair = LevelPair(((x, *pu), (y, *pv)))
            j = step.enumeration.rank(shadow_of(step, pair))
            total = representation_sum(step, pair)
            assert total.coords[a + j] == 0
            assert check_dichotomy(step, pair, s1) == ("step_coordinate", True)


def test_collapsed_shadow_takes_inner_branch(toy_step):
    step, _ = toy_step
    s1 = inner_level_sums(step.inner)
    rng = np.random.default_rng(2)
    x, y = _step_point(step, 42, rng), _step_point(step, 42, rng)
    assert check_dichotomy(step, LevelPair(((x, 1, 0), (y, 0, 1))), s1) == ("inner_block", True)
    assert check_dichotomy(step, LevelPair(((x, 2, 0),)), s1) == ("inner_block", True)


def test_step_formula_needs_the_coordinate_factor(toy_step):
    # Using -v_j/(u_j+v_j) without multiplying by x_j leaves
    # sum v(x)(x_j - 1) in coordinate j, which is nonzero in general.
    step, _ = toy_step
    rng = np.random.default_rng(3)
    a = step.inner.arity
    x, y = _step_point(step, 5, rng), _step_point(step, 9, rng)
    pair = LevelPair(((x, 0, 1), (y, 1, 0)))
    j = step.enumeration.rank(shadow_of(step, pair))
    p = int(step.step_primes[j])
    literal = {}
    for pt, u, v in pair.support:
        uj, vj = shadow_of(step, pair).as_dict()[step.inner.flatten(pt.coords[:a])]
        literal[pt] = (-vj * pow(uj + vj, -1, p)) % p
    coord = sum((u + v) * literal[pt] + v * int(pt.coords[a + j]) for pt, u, v in pair.support) % p
    assert coord == (int(x.coords[a + j]) - 1) % p != 0
    assert representation_sum(step, pair).coords[a + j] == 0


def test_sampled_verification_small(toy_step):
    step, _ = toy_step
    cert = step_sample_verify(step, 200, seed=7)
    assert cert.violations == 0 and cert.accepted
    assert sum(cert.branch_counts.values()) == 200
    again = step_sample_verify(step, 200, seed=7, workers=3)
    assert again.branch_counts == cert.branch_counts


def test_step_never_materialized(toy_step):
    with pytest.raises(TooLargeError):
        materialize_set(toy_step[0])


# ---- certificates ----------------------------------------------------------


def test_stage1_certificate_round_trip(t2):
    record = certs.stage1_certificate(t2)
    assert record["modulus"] == 1001 and record["level_sum_size"] == 281
    assert record["set_size"] == 209 and record["union_bound"] == 311
    text = certs.dumps(record)
    assert certs.dumps(certs.loads(text)) == text
    tree = certs.tree_from_certificate(certs.loads(text))
    assert tree.primes == t2.primes


def test_step_certificate_round_trip(toy_step):
    step, _ = toy_step
    cert = step_sample_verify(step, 20, seed=11)
    record = certs.step_certificate(cert)
    assert record["primes"]["list"] == step.step_primes.tolist()
    text = certs.dumps(record)
    rebuilt = certs.tree_from_certificate(certs.loads(text))
    assert np.array_equal(rebuilt.step_primes, step.step_primes)
    # without the explicit list the primes are re-sieved from the recorded parameters
    bare = certs.loads(text)
    del bare["primes"]["list"]
    assert np.array_equal(certs.tree_from_certificate(bare).step_primes, step.step_primes)
    again = certs.step_certificate(step_sample_verify(rebuilt, 20, seed=11))
    assert certs.dumps(again) == text


def test_tampered_certificate_rejected(toy_step):
    step, _ = toy_step
    record = certs.loads(certs.dumps(certs.step_certificate(step_sample_verify(step, 5, seed=1))))
    record["claimed_density"]["sha256"] = "0" * 64
    with pytest.raises(certs.CertificateError):
        certs.tree_from_certificate(record)


# ---- schedule ---------------------------------------------------------------


def test_schedule_k1():
    plan = construction_schedule(1, "1/2")
    assert [s.status for s in plan.stages] == ["materializable"]


def test_schedule_toy_step():
    # eps = 19/20 puts stage 1 on (5, 7, 11) with delta_1 = 19/30
    plan = construction_schedule(2, "19/20")
    s1, s2 = plan.stages
    assert s1.modulus == 385
    assert s2.pair_count == 295680
    assert s2.status == "symbolic-verifiable"


def test_schedule_marks_unreachable_stages():
    plan = construction_schedule(3, "3/4")
    assert plan.stages[-1].status == "infeasible"
    assert len(plan.stages) == 3
