"""Exact solvers for general compatibility matrices.

Covers the cases with polynomial algorithms (pairs, transitive
compatibilities) plus :func:`brute_force_optimal`, the exhaustive oracle
every other solver is checked against.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Objective,
    Partition,
    as_matrix,
    evaluate_objective,
    objective_from_group_values,
    pad_matrix,
)
from .errors import InstanceTooLargeError, InvalidInputError, PreconditionError
from .matching import max_cardinality_matching, max_weight_perfect_matching

DEFAULT_CAP = 10**7


@dataclass(frozen=True)
class SolveResult:
    """A partition with its objective value. Unpacks as ``(partition, value)``."""

    partition: Partition
    value: float
    method: str = ""
    info: dict = field(default_factory=dict, compare=False)

    def __iter__(self):
        return iter((self.partition, self.value))


def count_partitions(n: int, k: int) -> int:
    """Number of ways to split ``n`` items into unlabeled groups of size ``k``."""
    if k < 1 or n % k:
        raise InvalidInputError(f"k={k} must be positive and divide n={n}")
    m = n // k
    return math.factorial(n) // (math.factorial(k) ** m * math.factorial(m))


def iter_partitions(n: int, k: int):
    """Yield every k-partition of ``range(n)`` exactly once, as a tuple of groups.

    The lowest unassigned item always opens the next group, so each partition
    has a single canonical generation path.
    """
    if k < 1 or n % k:
        raise InvalidInputError(f"k={k} must be positive and divide n={n}")

    def rec(free: tuple[int, ...]):
        if not free:
            yield ()
            return
        first, rest = free[0], free[1:]
        for combo in itertools.combinations(rest, k - 1):
            chosen = set(combo)
            remaining = tuple(i for i in rest if i not in chosen)
            group = (first,) + combo
            for tail in rec(remaining):
                yield (group,) + tail

    yield from rec(tuple(range(n)))


def brute_force_all(W, k: int, kinds, *, cap: int = DEFAULT_CAP) -> tuple[dict[Objective, SolveResult], int]:
    """One enumeration pass scoring several objectives at once.

    Returns the canonically-first maximizer for each requested kind and the
    number of partitions visited.
    """
    kinds = [Objective.parse(x) for x in kinds]
    W = as_matrix(W)
    n_real = W.shape[0]
    W, extra = pad_matrix(W, k)
    n = W.shape[0]
    if k < 2 and any(x in (Objective.MOM, Objective.AOM) for x in kinds):
        raise InvalidInputError("MoM and AoM need groups of at least two items")
    total = count_partitions(n, k)
    if total > cap:
        raise InstanceTooLargeError(f"{total} partitions of n={n}, k={k} exceed the cap of {cap}")

    cache: dict[tuple[int, ...], tuple[float, float]] = {}

    def group_stats(g: tuple[int, ...]) -> tuple[float, float]:
        hit = cache.get(g)
        if hit is None:
            sub = W[np.ix_(g, g)]
            h = float(sub.sum()) / (k * k)
            mn = min((float(W[a, b]) for a, b in itertools.combinations(g, 2)), default=math.inf)
            hit = cache[g] = (h, mn)
        return hit

    best: dict[Objective, list] = {x: [None, -math.inf] for x in kinds}
    visited = 0
    for groups in iter_partitions(n, k):
        visited += 1
        stats = [group_stats(g) for g in groups]
        H = [h for h, _ in stats]
        M = [mn for _, mn in stats] if k >= 2 else None
        for x in kinds:
            v = objective_from_group_values(x, H, M)
            if v > best[x][1]:
                best[x] = [groups, v]

    results = {
        x: SolveResult(
            Partition(best[x][0], n_real=n_real if extra else None),
            best[x][1],
            "brute",
            {"enumerated": visited},
        )
        for x in kinds
    }
    return results, visited


def brute_force_optimal(W, k: int, kind, *, cap: int = DEFAULT_CAP) -> SolveResult:
    """Exact optimum by enumerating every k-partition (oracle for tests)."""
    kind = Objective.parse(kind)
    results, _ = brute_force_all(W, k, [kind], cap=cap)
    return results[kind]


def _pairs_partition(matching) -> Partition:
    return Partition(tuple(matching.sorted_pairs()))


def solve_k2_avg(W, kind=Objective.AOA) -> SolveResult:
    """AoA / AoM optimum for pairs via maximum-weight perfect matching.

    For k = 2 both objectives are increasing in the total off-diagonal weight
    of the chosen pairs (the diagonal adds a partition-independent constant
    to AoA), so one matching serves both.
    """
    kind = Objective.parse(kind)
    if kind not in (Objective.AOA, Objective.AOM):
        raise InvalidInputError(f"solve_k2_avg handles AoA/AoM, not {kind.label}")
    W = as_matrix(W)
    if W.shape[0] % 2:
        raise InvalidInputError(f"k=2 needs an even number of items, got {W.shape[0]}")
    matching = max_weight_perfect_matching(W)
    P = _pairs_partition(matching)
    return SolveResult(P, evaluate_objective(P, W, kind), "k2", {"matching_weight": matching.weight})


def pair_weights(W, kind) -> np.ndarray:
    """Effective per-pair value for the min-type objectives at k = 2.

    MoM uses the raw compatibility; MoA uses the happiness of the pair,
    ``(W_ii + W_jj + 2 W_ij) / 4``.
    """
    kind = Objective.parse(kind)
    W = np.asarray(W, dtype=float)
    if kind is Objective.MOM:
        return W.copy()
    if kind is Objective.MOA:
        d = np.diag(W)
        return (d[:, None] + d[None, :] + 2.0 * W) / 4.0
    raise InvalidInputError(f"pair_weights handles MoM/MoA, not {kind.label}")


def _threshold_graph(eff: np.ndarray, t: float) -> list[list[int]]:
    n = eff.shape[0]
    return [[j for j in range(n) if j != i and eff[i, j] >= t] for i in range(n)]


def threshold_feasible(W, t: float, kind) -> bool:
    """True iff the pairs with effective weight ``>= t`` contain a perfect matching."""
    eff = pair_weights(W, kind)
    return max_cardinality_matching(_threshold_graph(eff, t)).is_perfect(eff.shape[0])


def solve_k2_min(W, kind=Objective.MOM) -> SolveResult:
    """MoM / MoA optimum for pairs by bottleneck perfect matching.

    Binary search over the sorted distinct effective weights for the largest
    threshold whose ``>=``-subgraph still has a perfect matching; feasibility
    is monotone because raising the threshold only deletes edges.
    """
    kind = Objective.parse(kind)
    W = as_matrix(W)
    n = W.shape[0]
    if n % 2:
        raise InvalidInputError(f"k=2 needs an even number of items, got {n}")
    eff = pair_weights(W, kind)
    iu = np.triu_indices(n, 1)
    levels = np.unique(eff[iu])
    lo, hi = 0, len(levels) - 1  # levels[lo] is always feasible on a complete graph
    best = max_cardinality_matching(_threshold_graph(eff, levels[lo]))
    checks = 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        cand = max_cardinality_matching(_threshold_graph(eff, levels[mid]))
        checks += 1
        if cand.is_perfect(n):
            lo, best = mid, cand
        else:
            hi = mid - 1
    P = _pairs_partition(best)
    return SolveResult(
        P,
        evaluate_objective(P, W, kind),
        "k2",
        {"threshold": float(levels[lo]), "feasibility_checks": checks},
    )


def is_transitive(W, tol: float = 0.0) -> bool:
    """Check ``W_ij >= min(W_ik, W_kj)`` over all triples of distinct items."""
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    off = ~np.eye(n, dtype=bool)
    for k in range(n):
        bound = np.minimum.outer(W[:, k], W[k, :])
        mask = off.copy()
        mask[k, :] = False
        mask[:, k] = False
        if np.any(W[mask] < bound[mask] - tol):
            return False
    return True


def positive_components(W) -> list[list[int]]:
    """Connected components of the graph of positive off-diagonal entries."""
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    seen = [False] * n
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = True
        comp, queue = [], deque([start])
        while queue:
            v = queue.popleft()
            comp.append(v)
            for u in np.flatnonzero(W[v] > 0):
                u = int(u)
                if u != v and not seen[u]:
                    seen[u] = True
                    queue.append(u)
        comps.append(sorted(comp))
    return comps


def transitive_mom(W, k: int, *, check: bool = True) -> SolveResult:
    """Linear-time MoM optimum when compatibilities are transitive.

    Transitivity forces the positive-weight graph into disjoint cliques, each
    with at most one edge heavier than the rest, so any grouping that stays
    inside cliques is optimal. Cliques whose size is not a multiple of ``k``
    are topped up with dummy items; dummy pairs are ignored in the reported
    value and ``info["has_dummies"]`` flags the padding.

    ``info["unpadded"]`` is a k-partition of the real items (when ``k``
    divides ``n``) with its exact MoM. It differs from the padded answer only
    when some clique size is not a multiple of ``k``; then every real
    k-partition must mix cliques and the optimum is 0.
    """
    W = as_matrix(W)
    n = W.shape[0]
    if k < 2:
        raise InvalidInputError("MoM needs groups of at least two items")
    if check and not is_transitive(W):
        raise PreconditionError("compatibility matrix is not transitive")
    comps = positive_components(W)

    groups: list[tuple[int, ...]] = []
    next_dummy = n
    for comp in comps:
        items = list(comp)
        pad = (-len(items)) % k
        items.extend(range(next_dummy, next_dummy + pad))
        next_dummy += pad
        groups.extend(tuple(items[i:i + k]) for i in range(0, len(items), k))
    padded = Partition(tuple(groups), n_real=n)

    real_mins = [
        min(float(W[a, b]) for a, b in itertools.combinations([i for i in g if i < n], 2))
        for g in groups
        if sum(1 for i in g if i < n) >= 2
    ]
    value = min(real_mins) if real_mins else 0.0

    info: dict = {"has_dummies": padded.has_dummies, "components": comps}
    if n % k == 0:
        flat = [i for comp in comps for i in comp]
        unpadded = Partition(tuple(tuple(flat[i:i + k]) for i in range(0, n, k)))
        info["unpadded"] = SolveResult(unpadded, evaluate_objective(unpadded, W, Objective.MOM), "transitive")
    return SolveResult(padded, value, "transitive", info)
