"""Build score vectors from a social graph plus per-node feature sets.

The pipeline samples a connected subgraph, then scores each sampled node by
its mean Jaccard similarity to the other sampled nodes.
"""

from __future__ import annotations

import json
import re
from collections import deque
from collections.abc import Hashable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, ParseError, SamplingError

_SPLIT = re.compile(r"[,\s]+")


@dataclass
class EdgeGraph:
    """Simple undirected graph keyed by the node ids found in the input."""

    adj: dict[Hashable, set] = field(default_factory=dict)
    weights: dict[frozenset, float] = field(default_factory=dict)

    def add_edge(self, u, v, w: float | None = None) -> None:
        self.adj.setdefault(u, set()).add(v)
        self.adj.setdefault(v, set()).add(u)
        if w is not None:
            self.weights[frozenset((u, v))] = w

    @property
    def nodes(self) -> list:
        return sorted(self.adj, key=_node_key)

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adj.values()) // 2

    def neighbors(self, v) -> list:
        return sorted(self.adj.get(v, ()), key=_node_key)


def _node_key(v):
    return (0, v, "") if isinstance(v, int) else (1, 0, str(v))


def _node_id(token: str):
    try:
        return int(token)
    except ValueError:
        return token


def load_edge_list(path) -> EdgeGraph:
    """Read ``u v`` or ``u,v[,w]`` lines; ``#`` starts a comment.

    Duplicate edges collapse into one (the last weight wins); self-loops are
    rejected.
    """
    graph = EdgeGraph()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p for p in _SPLIT.split(line) if p]
            if len(parts) not in (2, 3):
                raise ParseError(f"expected 'u v' or 'u,v,w', got {line!r}", str(path), lineno)
            u, v = _node_id(parts[0]), _node_id(parts[1])
            if u == v:
                raise ParseError(f"self-loop on node {u}", str(path), lineno)
            w = None
            if len(parts) == 3:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise ParseError(f"bad weight {parts[2]!r}", str(path), lineno) from None
            graph.add_edge(u, v, w)
    return graph


def load_features(path) -> dict:
    """Read a JSON object mapping node id to a list of feature tokens."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", str(path), exc.lineno) from None
    if not isinstance(raw, dict):
        raise ParseError("feature file must hold a JSON object", str(path))
    table = {}
    for key, tokens in raw.items():
        if not isinstance(tokens, list):
            raise ParseError(f"features of node {key!r} must be a list", str(path))
        node = _node_id(key)
        if node in table:
            raise ParseError(f"node {key!r} listed twice", str(path))
        table[node] = frozenset(str(t) for t in tokens)
    return table


def jaccard(a: frozenset | set, b: frozenset | set) -> float:
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def jaccard_scores(features: Mapping, nodes: Sequence) -> np.ndarray:
    """Mean Jaccard similarity of each node's features to the other nodes'."""
    missing = [v for v in nodes if v not in features]
    if missing:
        raise InvalidInputError(f"nodes without features: {missing}")
    sets = [frozenset(features[v]) for v in nodes]
    n = len(sets)
    if n < 2:
        return np.zeros(n)
    S = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            S[i, j] = S[j, i] = jaccard(sets[i], sets[j])
    return S.sum(axis=1) / (n - 1)


def sample_subgraph(graph: EdgeGraph, size: int, rng: np.random.Generator) -> list:
    """Nodes of a connected subgraph found by BFS from a random start.

    Starts are tried in a seeded random order until one lies in a component
    with at least ``size`` nodes. Nodes come back in BFS visiting order.
    """
    nodes = graph.nodes
    if not 1 <= size <= len(nodes):
        raise SamplingError(f"cannot sample {size} of {len(nodes)} nodes")
    for idx in rng.permutation(len(nodes)):
        start = nodes[int(idx)]
        order, seen = [start], {start}
        queue = deque([start])
        while queue and len(order) < size:
            v = queue.popleft()
            for u in graph.neighbors(v):
                if u not in seen:
                    seen.add(u)
                    order.append(u)
                    queue.append(u)
                    if len(order) == size:
                        break
        if len(order) == size:
            return order
    raise SamplingError(f"no connected subgraph with {size} nodes")
