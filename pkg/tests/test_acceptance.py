"""End-to-end exit criteria, each with its tolerance and wall-clock limit.

A summary line per criterion is printed at the end of the pytest run.
"""

import itertools
import time

import numpy as np
import pytest

from partilab.cli import main
from partilab.core import Objective, argsort_desc, evaluate_objective, score_matrix
from partilab.experiment import run_repetitions
from partilab.general_solvers import brute_force_all, is_transitive, solve_k2_avg, solve_k2_min, transitive_mom
from partilab.learner import LearnConfig, learn_order
from partilab.matching import (
    exhaustive_max_cardinality_matching,
    exhaustive_max_weight_perfect_matching,
    max_cardinality_matching,
    max_weight_perfect_matching,
)
from partilab.manifest import RunManifest
from partilab.score_solvers import greedy_moa, heterophilous_partition, homophilous_partition
from partilab.simenv import FeedbackEnv, NoiseModel

TOL = 1e-9
SCORE_FAMILY = [(4, 2), (6, 2), (6, 3), (8, 2), (9, 3), (10, 2), (10, 5)]


class Clock:
    def __init__(self, limit):
        self.limit = limit
        self.start = time.perf_counter()

    @property
    def elapsed(self):
        return time.perf_counter() - self.start

    def check(self, report):
        report(f"{self.elapsed:.1f}s of {self.limit}s")
        assert self.elapsed <= self.limit, f"took {self.elapsed:.1f}s, limit {self.limit}s"


def distinct_uniform(rng, n, high=10.0):
    while True:
        s = rng.uniform(0, high, n)
        if np.unique(s).size == n:
            return s


def score_instances(seed, count=500):
    rng = np.random.default_rng(seed)
    for i in range(count):
        n, k = SCORE_FAMILY[i % len(SCORE_FAMILY)]
        yield n, k, distinct_uniform(rng, n)


def random_zero_diag(rng, n):
    A = rng.uniform(0, 1, (n, n))
    W = (A + A.T) / 2
    np.fill_diagonal(W, 0)
    return W


@pytest.mark.acceptance(1, "homophilous partition is AoA and AoM optimal")
def test_homophily_optimal(report):
    clock = Clock(120)
    misses = 0
    for n, k, s in score_instances(101):
        W = score_matrix(s)
        best, _ = brute_force_all(W, k, [Objective.AOA, Objective.AOM])
        P = homophilous_partition(s, k)
        for kind in (Objective.AOA, Objective.AOM):
            if abs(evaluate_objective(P, W, kind) - best[kind].value) > TOL:
                misses += 1
    report(f"{misses} mismatches in 500 instances x 2 objectives")
    assert misses == 0
    clock.check(report)


@pytest.mark.acceptance(2, "heterophilous partition is MoM optimal")
def test_heterophily_optimal(report):
    clock = Clock(120)
    misses = 0
    for n, k, s in score_instances(202):
        W = score_matrix(s)
        best, _ = brute_force_all(W, k, [Objective.MOM])
        if abs(evaluate_objective(heterophilous_partition(s, k), W, "mom") - best[Objective.MOM].value) > TOL:
            misses += 1
    report(f"{misses} mismatches in 500 instances")
    assert misses == 0
    clock.check(report)


@pytest.mark.acceptance(3, "greedy MoA reaches half the optimum")
def test_greedy_half_approximation(report):
    clock = Clock(180)
    rng = np.random.default_rng(303)
    sizes = {2: [4, 6, 8, 10, 12], 3: [6, 9, 12], 4: [8, 12]}
    ratios = []
    for i in range(500):
        k = (2, 3, 4)[i % 3]
        n = sizes[k][int(rng.integers(len(sizes[k])))]
        s = rng.uniform(0, 10, n)
        W = score_matrix(s)
        best, _ = brute_force_all(W, k, [Objective.MOA])
        ratios.append(evaluate_objective(greedy_moa(s, k), W, "moa") / best[Objective.MOA].value)
    worst = min(ratios)
    report(f"worst ratio {worst:.4f}, mean {np.mean(ratios):.4f}")
    assert worst >= 0.5
    clock.check(report)


@pytest.mark.acceptance(4, "k=2 solvers match brute force")
def test_k2_exact(report):
    clock = Clock(120)
    rng = np.random.default_rng(404)
    misses = 0
    for i in range(200):
        n = (6, 8, 10, 12)[i % 4]
        W = random_zero_diag(rng, n)
        best, _ = brute_force_all(W, 2, list(Objective))
        for kind in Objective:
            solver = solve_k2_avg if kind in (Objective.AOA, Objective.AOM) else solve_k2_min
            res = solver(W, kind)
            got = evaluate_objective(res.partition, W, kind)
            if abs(got - best[kind].value) > TOL or abs(res.value - got) > TOL:
                misses += 1
    report(f"{misses} mismatches in 200 matrices x 4 objectives")
    assert misses == 0
    clock.check(report)


def transitive_instance(rng):
    k = int(rng.integers(2, 5))
    n = k * int(rng.integers(1, 12 // k + 1))
    W = np.zeros((n, n))
    perm = rng.permutation(n)
    aligned = rng.random() < 0.5  # clique sizes all multiples of k
    start = 0
    while start < n:
        left = n - start
        size = k * int(rng.integers(1, left // k + 1)) if aligned else int(rng.integers(1, left + 1))
        members = perm[start:start + size]
        w = rng.uniform(0.5, 5.0)
        for a, b in itertools.combinations(members, 2):
            W[a, b] = W[b, a] = w
        if size >= 2 and rng.random() < 0.5:
            a, b = rng.choice(members, 2, replace=False)
            W[a, b] = W[b, a] = w + rng.uniform(0.1, 3.0)
        start += size
    return W, k


@pytest.mark.acceptance(5, "transitive MoM solver matches brute force")
def test_transitive(report):
    clock = Clock(60)
    rng = np.random.default_rng(505)
    misses = padded = 0
    for _ in range(100):
        W, k = transitive_instance(rng)
        assert is_transitive(W)
        res = transitive_mom(W, k)
        best, _ = brute_force_all(W, k, [Objective.MOM])
        opt = best[Objective.MOM].value
        padded += res.info["has_dummies"]
        if abs(res.info["unpadded"].value - opt) > TOL:
            misses += 1
        if not res.info["has_dummies"] and abs(res.value - opt) > TOL:
            misses += 1
    report(f"{misses} mismatches in 100 instances, {padded} needed padding")
    assert misses == 0
    clock.check(report)


def connected_weighted_graph(rng, n):
    while True:
        A = np.triu(rng.random((n, n)) < rng.uniform(0.2, 0.9), 1)
        A = A | A.T
        seen, stack = {0}, [0]
        while stack:
            v = stack.pop()
            for u in np.flatnonzero(A[v]):
                if u not in seen:
                    seen.add(int(u))
                    stack.append(int(u))
        if len(seen) == n:
            W = np.triu(rng.uniform(0, 1, (n, n)), 1)
            return A.astype(int), (W + W.T) * A


@pytest.mark.acceptance(6, "blossom matchers agree with exhaustive oracles")
def test_matching_oracle(report):
    clock = Clock(120)
    rng = np.random.default_rng(606)
    misses = weighted = 0
    for _ in range(200):
        n = int(rng.integers(2, 9))
        A, W = connected_weighted_graph(rng, n)
        if len(max_cardinality_matching(A)) != len(exhaustive_max_cardinality_matching(A)):
            misses += 1
        if n % 2 == 0:
            weighted += 1
            if abs(max_weight_perfect_matching(W).weight - exhaustive_max_weight_perfect_matching(W).weight) > TOL:
                misses += 1
    report(f"{misses} mismatches; 200 cardinality and {weighted} weighted checks")
    assert misses == 0
    clock.check(report)


@pytest.mark.acceptance(7, "noiseless learning is exact")
def test_noiseless_learning(report):
    clock = Clock(30)
    failures = 0
    for seed in range(50):
        s = np.random.default_rng(seed).integers(1, 11, 16).astype(float)
        cfg = LearnConfig(n=16, k=4, rounds_per_edge=1, noise_bound=0.0, seed=seed)
        res = learn_order(cfg, FeedbackEnv(s, 4))
        ok = (res.graph.is_connected() and res.final_error == 0.0
              and np.array_equal(res.sigma_hat, argsort_desc(s)))
        failures += not ok
    report(f"{50 - failures}/50 exact")
    assert failures == 0
    clock.check(report)


@pytest.mark.acceptance(8, "learner meets its confidence level")
def test_pac(report):
    clock = Clock(300)
    cfg = LearnConfig(n=8, k=2, delta=0.1, rounds_per_edge="auto", noise_bound=1.0)
    results = run_repetitions(cfg, NoiseModel("uniform", 1.0), runs=200, seed=808, score_kind="distinct",
                              true_gap=True)
    correct = sum(bool(r.ordering_correct) for r in results)
    report(f"{correct}/200 exactly ordered, mean {np.mean([r.rounds_used for r in results]):.0f} rounds")
    assert correct >= 170
    clock.check(report)


@pytest.mark.acceptance(9, "error curve falls with budget, reaches 10%")
def test_error_curve(report):
    clock = Clock(180)
    budgets = (1, 4, 16, 64)
    errors, rounds = [], []
    for r in budgets:
        cfg = LearnConfig(n=16, k=4, rounds_per_edge=r, noise_bound=1.0)
        results = run_repetitions(cfg, NoiseModel("uniform", 1.0), runs=30, seed=909)
        errors.append(float(np.mean([x.final_error for x in results])))
        rounds.append(float(np.mean([x.rounds_used for x in results])))
    curve = ", ".join(f"r={r}: {e:.4f} @ {t:.0f} rounds" for r, e, t in zip(budgets, errors, rounds))
    report(curve)
    for a, b in zip(errors, errors[1:]):
        assert b <= 1.05 * a
    assert any(e <= 0.10 and t <= 1e4 for e, t in zip(errors, rounds))
    clock.check(report)


@pytest.mark.acceptance(10, "identical manifests give byte-identical outputs")
def test_replay(tmp_path, report):
    learn = ["learn", "--n", "16", "--k", "4", "--rounds-per-edge", "4", "--runs", "5", "--seed", "1010"]
    scores = tmp_path / "scores.csv"
    scores.write_text("item,score\n1,4\n2,3\n3,2\n4,1\n5,0.5\n6,7\n")
    solve = ["solve", "--scores", str(scores), "--k", "3", "--objective", "moa", "--trace"]
    checked = 0
    for name, argv in (("learn", learn), ("solve", solve)):
        first, second = tmp_path / f"{name}1", tmp_path / f"{name}2"
        assert main(argv + ["--out-dir", str(first)]) == 0
        assert main(argv + ["--out-dir", str(second)]) == 0
        manifest = RunManifest.read(first / "manifest.json")
        for out_name in manifest.outputs:
            assert (first / out_name).read_bytes() == (second / out_name).read_bytes()
            checked += 1
        assert main(["replay", str(first / "manifest.json"), "--out-dir", str(tmp_path / f"{name}3")]) == 0
    report(f"{checked} output files identical across reruns and replays")
