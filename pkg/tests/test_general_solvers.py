import math

import numpy as np
import pytest

from partilab.core import Objective, Partition, evaluate_objective, partition_from_one_based, score_matrix
from partilab.errors import InstanceTooLargeError, InvalidInputError, PreconditionError
from partilab.general_solvers import (
    brute_force_all,
    brute_force_optimal,
    count_partitions,
    is_transitive,
    iter_partitions,
    solve_k2_avg,
    solve_k2_min,
    threshold_feasible,
    transitive_mom,
)


def P1(*groups):
    return partition_from_one_based(groups)


def random_zero_diag(rng, n):
    A = rng.uniform(0, 1, (n, n))
    W = (A + A.T) / 2
    np.fill_diagonal(W, 0)
    return W


@pytest.mark.parametrize("n,k,expected", [(4, 2, 3), (6, 2, 15), (6, 3, 10), (9, 3, 280)])
def test_enumeration_counts(n, k, expected):
    groups = list(iter_partitions(n, k))
    assert len(groups) == expected == count_partitions(n, k)
    assert len({frozenset(map(frozenset, g)) for g in groups}) == expected
    W = np.ones((n, n))
    _, visited = brute_force_all(W, k, ["aoa"])
    assert visited == expected


def test_count_formula():
    n, k = 12, 3
    assert count_partitions(n, k) == math.factorial(12) // (math.factorial(3) ** 4 * math.factorial(4))


def test_brute_force_example():
    res = brute_force_optimal(score_matrix([4, 3, 2, 1]), 2, "mom")
    assert res.value == 4
    assert res.partition == P1((1, 4), (2, 3))
    P, v = res
    assert v == 4 and P == res.partition


def test_brute_force_single_group():
    W = np.arange(9, dtype=float).reshape(3, 3)
    W = W + W.T
    for kind in Objective:
        res = brute_force_optimal(W, 3, kind)
        assert res.partition == Partition(((0, 1, 2),))
        assert res.value == pytest.approx(evaluate_objective(res.partition, W, kind))


def test_brute_force_constant_aom():
    W = np.full((6, 6), 3.0)
    np.fill_diagonal(W, 0)
    assert brute_force_optimal(W, 3, "aom").value == 3.0


def test_brute_force_cap():
    with pytest.raises(InstanceTooLargeError):
        brute_force_optimal(np.ones((12, 12)), 2, "aoa", cap=100)


def test_brute_force_pads_with_warning():
    with pytest.warns(UserWarning):
        res = brute_force_optimal(np.ones((3, 3)), 2, "aoa")
    assert res.partition.n_real == 3 and res.partition.n == 4


def test_k2_avg_examples():
    res = solve_k2_avg(score_matrix([4, 3, 2, 1]))
    assert res.partition == P1((1, 2), (3, 4))
    assert res.info["matching_weight"] == 14
    W = np.ones((4, 4))
    assert solve_k2_avg(W).value == brute_force_optimal(W, 2, "aoa").value


def test_k2_avg_random_8():
    rng = np.random.default_rng(11)
    W = random_zero_diag(rng, 8)
    for kind in ("aoa", "aom"):
        assert solve_k2_avg(W, kind).value == pytest.approx(brute_force_optimal(W, 2, kind).value, abs=1e-9)


def test_k2_odd_rejected():
    for fn in (solve_k2_avg, solve_k2_min):
        with pytest.raises(InvalidInputError):
            fn(np.ones((5, 5)))


def test_k2_min_examples():
    assert solve_k2_min(score_matrix([4, 3, 2, 1]), "mom").value == 4
    W = np.zeros((4, 4))
    W[0, 1] = W[1, 0] = 5.0
    W[2, 3] = W[3, 2] = 2.0
    res = solve_k2_min(W, "mom")
    assert res.value == 2.0 and res.partition == P1((1, 2), (3, 4))


def test_k2_min_random_10_moa():
    rng = np.random.default_rng(5)
    W = random_zero_diag(rng, 10)
    assert solve_k2_min(W, "moa").value == pytest.approx(brute_force_optimal(W, 2, "moa").value, abs=1e-9)


def test_k2_min_with_diagonal_moa():
    s = np.random.default_rng(2).uniform(0, 5, 8)
    W = score_matrix(s)
    assert solve_k2_min(W, "moa").value == pytest.approx(brute_force_optimal(W, 2, "moa").value, abs=1e-9)


@pytest.mark.parametrize("seed", range(20))
def test_threshold_monotone(seed):
    rng = np.random.default_rng(seed)
    W = random_zero_diag(rng, 8)
    levels = np.unique(W[np.triu_indices(8, 1)])
    feas = [threshold_feasible(W, t, "mom") for t in levels]
    # once infeasible, stays infeasible
    first_bad = feas.index(False) if False in feas else len(feas)
    assert all(feas[:first_bad]) and not any(feas[first_bad:])
    assert levels[first_bad - 1] == solve_k2_min(W, "mom").info["threshold"]


def cliques(sizes, weights, n_extra=0):
    n = sum(sizes) + n_extra
    W = np.zeros((n, n))
    start = 0
    for size, w in zip(sizes, weights):
        idx = list(range(start, start + size))
        for i in idx:
            for j in idx:
                if i != j:
                    W[i, j] = w
        start += size
    return W


def test_is_transitive_examples():
    assert is_transitive(score_matrix([2, 2, 2, 2]))
    assert is_transitive(cliques([3, 2], [1.0, 4.0]))
    W = np.array([[0, 0, 1], [0, 0, 1], [1, 1, 0]], dtype=float)
    assert not is_transitive(W)


def test_transitive_two_triangles():
    W = cliques([3, 3], [5.0, 5.0])
    res = transitive_mom(W, 3)
    assert res.value == 5 == brute_force_optimal(W, 3, "mom").value
    assert not res.info["has_dummies"]


def test_transitive_heavier_edge():
    W = cliques([4], [2.0])
    W[0, 1] = W[1, 0] = 7.0
    assert is_transitive(W)
    res = transitive_mom(W, 2)
    assert res.value == 2.0 == brute_force_optimal(W, 2, "mom").value


@pytest.mark.parametrize("k", [2, 3, 6])
def test_transitive_uniform(k):
    W = cliques([6], [1.5])
    assert transitive_mom(W, k).value == 1.5


def test_transitive_rejects_non_transitive():
    W = np.array([[0, 0, 1, 1], [0, 0, 1, 1], [1, 1, 0, 1], [1, 1, 1, 0]], dtype=float)
    with pytest.raises(PreconditionError):
        transitive_mom(W, 2)


def test_transitive_padding_flags_and_unpadded_optimum():
    W = cliques([2, 4], [3.0, 1.0])  # sizes not multiples of 3
    res = transitive_mom(W, 3)
    assert res.info["has_dummies"]
    assert res.partition.n == 9 and res.partition.n_real == 6
    assert res.value == 1.0
    unpadded = res.info["unpadded"]
    assert unpadded.value == brute_force_optimal(W, 3, "mom").value == 0.0
