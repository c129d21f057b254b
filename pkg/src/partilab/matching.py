"""Matchings in general graphs.

``max_cardinality_matching`` is Edmonds' blossom-contraction algorithm.
``max_weight_perfect_matching`` delegates the primal-dual weighted blossom
algorithm to networkx. The ``exhaustive_*`` functions enumerate every
matching and exist as independent oracles for tests and audits.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class Matching:
    pairs: frozenset[tuple[int, int]]
    weight: float = 0.0

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]], W=None) -> "Matching":
        canon = frozenset((min(a, b), max(a, b)) for a, b in pairs)
        covered = [v for p in canon for v in p]
        if len(covered) != len(set(covered)):
            raise InvalidInputError("matching uses an item twice")
        weight = 0.0
        if W is not None:
            W = np.asarray(W, dtype=float)
            weight = float(sum(W[a, b] for a, b in sorted(canon)))
        return cls(canon, weight)

    def __len__(self) -> int:
        return len(self.pairs)

    def is_perfect(self, n: int) -> bool:
        return 2 * len(self.pairs) == n

    def mate(self) -> dict[int, int]:
        out = {}
        for a, b in self.pairs:
            out[a] = b
            out[b] = a
        return out

    def sorted_pairs(self) -> list[tuple[int, int]]:
        return sorted(self.pairs)


def adjacency_lists(graph) -> list[list[int]]:
    """Normalize a graph to sorted neighbor lists.

    Accepts a square 0/1 (or boolean) matrix, a sequence of neighbor
    iterables indexed by node, or a mapping ``node -> neighbors`` with nodes
    ``0..n-1``. Self-loops are dropped.
    """
    if isinstance(graph, np.ndarray):
        if graph.ndim != 2 or graph.shape[0] != graph.shape[1]:
            raise InvalidInputError("adjacency matrix must be square")
        A = graph != 0
        n = A.shape[0]
        return [[j for j in range(n) if j != i and (A[i, j] or A[j, i])] for i in range(n)]
    if isinstance(graph, Mapping):
        n = len(graph)
        items = [graph[i] for i in range(n)]
    else:
        items = list(graph)
        n = len(items)
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for i, row in enumerate(items):
        for j in row:
            j = int(j)
            if not 0 <= j < n:
                raise InvalidInputError(f"neighbor {j} of node {i} out of range")
            if j != i:
                nbrs[i].add(j)
                nbrs[j].add(i)
    return [sorted(s) for s in nbrs]


def max_cardinality_matching(graph) -> Matching:
    """Maximum-cardinality matching by augmenting paths with blossom contraction."""
    adj = adjacency_lists(graph)
    n = len(adj)
    match = [-1] * n

    for v in range(n):
        if match[v] == -1:
            for u in adj[v]:
                if match[u] == -1:
                    match[u], match[v] = v, u
                    break

    def find_augmenting(root: int) -> int:
        used = [False] * n
        parent = [-1] * n
        base = list(range(n))
        used[root] = True
        queue = deque([root])

        def lca(a: int, b: int) -> int:
            seen = [False] * n
            while True:
                a = base[a]
                seen[a] = True
                if match[a] == -1:
                    break
                a = parent[match[a]]
            while True:
                b = base[b]
                if seen[b]:
                    return b
                b = parent[match[b]]

        def mark_path(v: int, b: int, child: int, blossom: list[bool]) -> None:
            while base[v] != b:
                blossom[base[v]] = blossom[base[match[v]]] = True
                parent[v] = child
                child = match[v]
                v = parent[match[v]]

        while queue:
            v = queue.popleft()
            for to in adj[v]:
                if base[v] == base[to] or match[v] == to:
                    continue
                if to == root or (match[to] != -1 and parent[match[to]] != -1):
                    cur = lca(v, to)
                    blossom = [False] * n
                    mark_path(v, cur, to, blossom)
                    mark_path(to, cur, v, blossom)
                    for i in range(n):
                        if blossom[base[i]]:
                            base[i] = cur
                            if not used[i]:
                                used[i] = True
                                queue.append(i)
                elif parent[to] == -1:
                    parent[to] = v
                    if match[to] == -1:
                        return _flip(to, parent)
                    used[match[to]] = True
                    queue.append(match[to])
        return -1

    def _flip(v: int, parent: list[int]) -> int:
        while v != -1:
            pv = parent[v]
            ppv = match[pv]
            match[v], match[pv] = pv, v
            v = ppv
        return 0

    for v in range(n):
        if match[v] == -1:
            find_augmenting(v)

    return Matching.from_pairs((v, match[v]) for v in range(n) if match[v] > v)


def _check_even_matrix(W) -> np.ndarray:
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise InvalidInputError("weight matrix must be square")
    if W.shape[0] % 2:
        raise InvalidInputError(f"perfect matching needs an even number of items, got {W.shape[0]}")
    return W


def max_weight_perfect_matching(W) -> Matching:
    """Perfect matching of maximum total weight on the complete graph over ``W``.

    Every pair is an admissible edge (zero weights included), so a perfect
    matching always exists for even ``n``.
    """
    W = _check_even_matrix(W)
    n = W.shape[0]
    if n == 0:
        return Matching(frozenset(), 0.0)
    G = nx.Graph()
    G.add_nodes_from(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            G.add_edge(i, j, weight=float(W[i, j]))
    pairs = nx.max_weight_matching(G, maxcardinality=True)
    result = Matching.from_pairs(pairs, W)
    if not result.is_perfect(n):
        raise RuntimeError("weighted blossom returned a non-perfect matching on a complete graph")
    return result


def exhaustive_max_weight_perfect_matching(W) -> Matching:
    """Enumerate all ``(n-1)!!`` perfect matchings; return the first heaviest."""
    W = _check_even_matrix(W)
    n = W.shape[0]
    best: list = [None, -np.inf]

    def rec(free: list[int], acc: float, pairs: list[tuple[int, int]]) -> None:
        if not free:
            if acc > best[1]:
                best[0], best[1] = list(pairs), acc
            return
        a = free[0]
        for idx in range(1, len(free)):
            b = free[idx]
            pairs.append((a, b))
            rec(free[1:idx] + free[idx + 1:], acc + W[a, b], pairs)
            pairs.pop()

    rec(list(range(n)), 0.0, [])
    return Matching.from_pairs(best[0], W)


def exhaustive_max_cardinality_matching(graph) -> Matching:
    """Branch on the lowest free vertex: leave it unmatched or match a free neighbor."""
    adj = [set(a) for a in adjacency_lists(graph)]
    n = len(adj)
    best: list = [[]]

    def rec(v: int, free: set[int], pairs: list[tuple[int, int]]) -> None:
        remaining = sum(1 for u in free if u >= v)
        if len(pairs) + remaining // 2 <= len(best[0]):
            return
        while v < n and v not in free:
            v += 1
        if v >= n:
            if len(pairs) > len(best[0]):
                best[0] = list(pairs)
            return
        free.discard(v)
        for u in sorted(adj[v] & free):
            free.discard(u)
            pairs.append((v, u))
            rec(v + 1, free, pairs)
            pairs.pop()
            free.add(u)
        rec(v + 1, free, pairs)
        free.add(v)

    rec(0, set(range(n)), [])
    return Matching.from_pairs(best[0])


def perfect_matching_exists(graph: Sequence[Iterable[int]] | np.ndarray) -> bool:
    adj = adjacency_lists(graph)
    return max_cardinality_matching(adj).is_perfect(len(adj))
