import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from partilab.core import Objective, evaluate_objective, partition_from_one_based, score_matrix, validate_partition
from partilab.general_solvers import brute_force_optimal, iter_partitions
from partilab.score_solvers import greedy_moa, heterophilous_partition, homophilous_partition


def P1(*groups):
    return partition_from_one_based(groups)


DESC6 = [6, 5, 4, 3, 2, 1]  # argsort gives sigma = (1 2 3 4 5 6)


def test_homophilous_example():
    assert homophilous_partition(DESC6, 2) == P1((1, 2), (3, 4), (5, 6))


def test_homophilous_ties_by_index():
    assert homophilous_partition([1, 1, 1, 1], 2) == P1((1, 2), (3, 4))


def test_homophilous_sorting():
    assert homophilous_partition([10, 1, 9, 2], 2) == P1((1, 3), (2, 4))


def test_heterophilous_example():
    assert heterophilous_partition(DESC6, 2) == P1((1, 6), (2, 5), (3, 4))


def test_heterophilous_k3():
    assert heterophilous_partition(DESC6, 3) == P1((1, 2, 6), (3, 4, 5))


def test_heterophilous_beats_alternatives():
    s = [4, 3, 2, 1]
    W = score_matrix(s)
    values = sorted(evaluate_objective(P, W, "mom") for P in
                    (partition_from_one_based(g) for g in [((1, 2), (3, 4)), ((1, 3), (2, 4)), ((1, 4), (2, 3))]))
    assert values == [2, 3, 4]
    assert evaluate_objective(heterophilous_partition(s, 2), W, "mom") == 4


def test_k1_singletons():
    s = [3, 1, 2]
    for solver in (homophilous_partition, heterophilous_partition, greedy_moa):
        assert solver(s, 1) == P1((1,), (2,), (3,))


def _group_sums(P, s):
    return sorted(sum(s[i] for i in g) for g in P.groups)


def test_greedy_example_and_opt():
    s = [5, 4, 3, 2, 1, 0]
    P = greedy_moa(s, 3)
    assert _group_sums(P, s) == [7, 8]
    assert P == P1((1, 4, 5), (2, 3, 6))
    opt = max(min(sum(s[i] for i in g) for g in Q) for Q in iter_partitions(6, 3))
    assert opt == 7


def test_greedy_equal_scores():
    s = [1, 1, 1, 1]
    assert _group_sums(greedy_moa(s, 2), s) == [2, 2]


def test_greedy_half_ratio_example():
    s = [9, 8, 1, 1, 1, 1]
    greedy = min(_group_sums(greedy_moa(s, 3), s))
    opt = max(min(sum(s[i] for i in g) for g in Q) for Q in iter_partitions(6, 3))
    assert opt == 10 and greedy == 10
    assert greedy >= 0.5 * opt


def test_greedy_trace_invariant():
    rng = np.random.default_rng(0)
    for _ in range(50):
        k = int(rng.integers(2, 5))
        m = int(rng.integers(1, 5))
        s = rng.uniform(0, 10, m * k)
        trace = []
        greedy_moa(s, k, trace=trace)
        assert len(trace) == m * k
        for step in trace:
            open_totals = [t for t, size in zip(step["totals"], step["sizes"]) if size < k]
            assert step["sizes"][step["group"]] < k
            assert step["totals"][step["group"]] == min(open_totals)


def test_padding_adds_zero_dummies():
    P = homophilous_partition([5, 4, 3], 2)
    assert P.n == 4 and P.n_real == 3 and P.has_dummies
    assert P.without_dummies() == ((0, 1), (2,))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([(4, 2), (6, 2), (6, 3), (8, 2), (9, 3)]))
def test_structural_optimality_small(seed, nk):
    n, k = nk
    s = np.random.default_rng(seed).uniform(0, 10, n)
    W = score_matrix(s)
    hom, het = homophilous_partition(s, k), heterophilous_partition(s, k)
    for kind, P in ((Objective.AOA, hom), (Objective.AOM, hom), (Objective.MOM, het)):
        assert evaluate_objective(P, W, kind) == pytest.approx(brute_force_optimal(W, k, kind).value, abs=1e-9)
    assert evaluate_objective(greedy_moa(s, k), W, "moa") >= 0.5 * brute_force_optimal(W, k, "moa").value


@settings(max_examples=50)
@given(st.lists(st.floats(0, 50, allow_nan=False), min_size=1, max_size=13), st.integers(1, 5))
def test_outputs_valid(s, k):
    for solver in (homophilous_partition, heterophilous_partition, greedy_moa):
        P = solver(s, k)
        assert validate_partition(P, P.n, k) == []
        assert P.n == len(s) + (-len(s)) % k
