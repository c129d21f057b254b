"""Adaptive learning of the score ordering from noisy group happiness.

For an edge ``(p, q)`` of a sparse random query graph the learner plays the
two groups ``{p} | S`` and ``{q} | S`` with a shared companion set ``S``.
Since ``k**2 * H = (s_anchor + sum(S))**2`` for score-based compatibilities,
square roots of the scaled responses differ by ``s_p - s_q``. Averaged edge
differences are chained along BFS shortest paths from item 0, which is
pinned to score 0, and the estimated scores are sorted.
"""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .core import argsort_desc
from .errors import ConfigError, InvalidInputError
from .simenv import FeedbackEnv

Edge = tuple[int, int]


@dataclass(frozen=True)
class QueryGraph:
    n: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        canon = sorted({(min(u, v), max(u, v)) for u, v in self.edges})
        for u, v in canon:
            if u == v or not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidInputError(f"bad edge {(u, v)} for n={self.n}")
        object.__setattr__(self, "edges", tuple(canon))

    @classmethod
    def complete(cls, n: int) -> "QueryGraph":
        return cls(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return [sorted(a) for a in adj]

    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency()), default=0)

    def components(self) -> list[list[int]]:
        adj = self.adjacency()
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, queue = [s], deque([s])
            while queue:
                v = queue.popleft()
                for u in adj[v]:
                    if not seen[u]:
                        seen[u] = True
                        comp.append(u)
                        queue.append(u)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    @property
    def diameter(self) -> int:
        """Largest BFS eccentricity within the largest component."""
        adj = self.adjacency()
        comp = max(self.components(), key=len)
        best = 0
        for s in comp:
            dist = bfs_distances(adj, s)
            best = max(best, max(d for d in dist if d >= 0))
        return best


def bfs_distances(adj: Sequence[Sequence[int]], source: int) -> list[int]:
    dist = [-1] * len(adj)
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for u in adj[v]:
            if dist[u] < 0:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def generate_er_graph(n: int, rng: np.random.Generator, p: float | None = None) -> QueryGraph:
    """G(n, p) with ``p = ln(n) / n`` unless overridden."""
    if n < 2:
        raise InvalidInputError(f"query graph needs n >= 2, got {n}")
    if p is None:
        p = math.log(n) / n
    if not 0.0 <= p <= 1.0:
        raise InvalidInputError(f"edge probability must be in [0, 1], got {p}")
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    return QueryGraph(n, tuple(zip(iu[keep].tolist(), ju[keep].tolist())))


def edge_coloring(G: QueryGraph) -> list[list[Edge]]:
    """Greedy proper edge coloring: each edge takes the lowest color free at
    both endpoints, so at most ``2 * max_degree - 1`` colors are used."""
    used: list[set[int]] = [set() for _ in range(G.n)]
    classes: list[list[Edge]] = []
    for u, v in G.edges:
        c = 0
        while c in used[u] or c in used[v]:
            c += 1
        if c == len(classes):
            classes.append([])
        classes[c].append((u, v))
        used[u].add(c)
        used[v].add(c)
    return classes


@dataclass(frozen=True)
class LearnConfig:
    n: int
    k: int
    m: int | None = None
    delta: float = 0.1
    rounds_per_edge: int | str = "auto"
    delta_guess: float | None = None
    noise_bound: float = 1.0
    seed: int | None = 0
    constant: float = 8.0
    edge_prob: float | None = None
    connected: bool = True
    max_graph_attempts: int = 1000

    def __post_init__(self):
        if self.k < 1 or self.n < 2:
            raise ConfigError(f"need n >= 2 and k >= 1, got n={self.n}, k={self.k}")
        if self.m is None:
            if self.n % self.k:
                raise ConfigError(f"k={self.k} must divide n={self.n}")
            object.__setattr__(self, "m", self.n // self.k)
        if self.n != self.m * self.k:
            raise ConfigError(f"n={self.n} must equal m*k={self.m}*{self.k}")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must be in (0, 1), got {self.delta}")
        if self.rounds_per_edge != "auto":
            if int(self.rounds_per_edge) != self.rounds_per_edge or self.rounds_per_edge < 1:
                raise ConfigError(f"rounds_per_edge must be 'auto' or an integer >= 1, got {self.rounds_per_edge!r}")
        if self.noise_bound < 0:
            raise ConfigError("noise_bound must be >= 0")
        if self.delta_guess is not None and self.delta_guess <= 0:
            raise ConfigError("delta_guess must be > 0")
        if self.constant <= 0:
            raise ConfigError("constant must be > 0")
        if self.k - 1 > self.n - 2:
            raise ConfigError(f"companion sets need k-1 <= n-2, got k={self.k}, n={self.n}")

    @property
    def per_edge_confidence(self) -> float:
        return (1.0 - math.exp(-self.delta / self.k)) / self.m


def rounds_per_edge_raw(diam: int, Delta: float, cfg: LearnConfig) -> float:
    """``C * b**2 * diam**2 / Delta**2 * ln(1 / delta_star)`` before rounding."""
    if not Delta > 0:
        raise ConfigError(f"score gap Delta must be > 0, got {Delta}")
    return cfg.constant * cfg.noise_bound**2 * diam**2 / Delta**2 * math.log(1.0 / cfg.per_edge_confidence)


def rounds_per_edge_auto(diam: int, Delta: float, cfg: LearnConfig) -> int:
    return max(1, math.ceil(rounds_per_edge_raw(diam, Delta, cfg)))


def companion_set(p: int, q: int, n: int, k: int) -> tuple[int, ...]:
    """The first ``k-1`` items other than ``p`` and ``q``, in index order."""
    if k - 1 > n - 2:
        raise ConfigError(f"no companion set of size {k - 1} avoids two of {n} items")
    out = []
    i = 0
    while len(out) < k - 1:
        if i != p and i != q:
            out.append(i)
        i += 1
    return tuple(out)


@dataclass(frozen=True)
class Query:
    anchor: int
    companions: tuple[int, ...]
    edge: Edge
    arm: str  # "left" queries edge[0], "right" queries edge[1]

    @property
    def group(self) -> tuple[int, ...]:
        return (self.anchor,) + self.companions


@dataclass(frozen=True)
class QuerySchedule:
    rounds: tuple[tuple[Query, ...], ...]
    bins: tuple[tuple[Edge, ...], ...]
    rounds_per_edge: int
    m: int

    @property
    def total_queries(self) -> int:
        return sum(len(r) for r in self.rounds)


def build_schedule(
    G: QueryGraph,
    cfg: LearnConfig,
    rounds_per_edge: int | None = None,
    colors: list[list[Edge]] | None = None,
) -> QuerySchedule:
    """Lay out every arm query into rounds of at most ``m`` groups.

    Each color class is cut into bins of at most ``m`` edges. One sweep plays
    every bin once, as a round of left arms followed by a round of right
    arms; the schedule repeats the sweep ``rounds_per_edge`` times.
    """
    if G.n != cfg.n:
        raise ConfigError(f"graph has {G.n} nodes, config says n={cfg.n}")
    if not G.edges:
        raise InvalidInputError("query graph has no edges")
    r = rounds_per_edge if rounds_per_edge is not None else cfg.rounds_per_edge
    if r == "auto" or int(r) != r or r < 1:
        raise ConfigError(f"build_schedule needs an explicit rounds_per_edge >= 1, got {r!r}")
    r = int(r)
    if colors is None:
        colors = edge_coloring(G)
    m = int(cfg.m)
    bins = tuple(
        tuple(cls[i:i + m]) for cls in colors for i in range(0, len(cls), m)
    )
    companions = {e: companion_set(e[0], e[1], cfg.n, cfg.k) for e in G.edges}
    sweep = []
    for b in bins:
        sweep.append(tuple(Query(e[0], companions[e], e, "left") for e in b))
        sweep.append(tuple(Query(e[1], companions[e], e, "right") for e in b))
    return QuerySchedule(tuple(sweep) * r, bins, r, m)


def _root(x: float, k: int) -> float:
    return math.sqrt(max(0.0, k * k * x))


def estimate_edge_diff(left: Sequence[float], right: Sequence[float], k: int) -> float:
    """Estimate ``s_p - s_q`` from paired responses of the two arms of edge ``(p, q)``."""
    if len(left) != len(right):
        raise InvalidInputError(f"arm response counts differ: {len(left)} vs {len(right)}")
    if not left:
        raise InvalidInputError("need at least one response per arm")
    return sum(_root(a, k) - _root(b, k) for a, b in zip(left, right)) / len(left)


def propagate_scores(
    G: QueryGraph, diffs: Mapping[Edge, float], root: int = 0
) -> tuple[np.ndarray, list[int]]:
    """Chain edge differences from ``root`` along a BFS tree.

    ``diffs[(p, q)]`` estimates ``s_p - s_q`` for ``p < q``. Returns the
    estimates (root pinned to 0, unreachable nodes 0) and the unreachable
    nodes. Only edges present in ``diffs`` are traversed.
    """
    adj: list[list[int]] = [[] for _ in range(G.n)]
    for u, v in G.edges:
        if (u, v) in diffs:
            adj[u].append(v)
            adj[v].append(u)
    for a in adj:
        a.sort()
    s_hat = np.zeros(G.n)
    seen = [False] * G.n
    seen[root] = True
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for u in adj[v]:
            if not seen[u]:
                seen[u] = True
                d = diffs[(v, u)] if v < u else -diffs[(u, v)]
                s_hat[u] = s_hat[v] - d
                queue.append(u)
    return s_hat, [i for i in range(G.n) if not seen[i]]


def ordering_consistent(sigma_hat: Sequence[int], s) -> bool:
    """True iff ``sigma_hat`` lists items in non-increasing true score."""
    vals = np.asarray(s, dtype=float)[np.asarray(sigma_hat)]
    return bool(np.all(vals[:-1] >= vals[1:]))


@dataclass(frozen=True)
class TraceRow:
    run_id: int
    round: int
    cumulative_queries: int
    normalized_error: float | None
    ordering_correct: bool | None


@dataclass
class LearnResult:
    sigma_hat: np.ndarray
    s_hat: np.ndarray
    rounds_used: int
    queries_used: int
    trace: list[TraceRow]
    graph: QueryGraph
    colors: list[list[Edge]]
    rounds_per_edge: int
    unreachable: list[int] = field(default_factory=list)
    graph_attempts: int = 1

    @property
    def final_error(self) -> float | None:
        return self.trace[-1].normalized_error if self.trace else None

    @property
    def ordering_correct(self) -> bool | None:
        return self.trace[-1].ordering_correct if self.trace else None


def draw_query_graph(cfg: LearnConfig, rng: np.random.Generator) -> tuple[QueryGraph, int]:
    """Random query graph; redrawn until connected when ``cfg.connected``."""
    attempts = 0
    while True:
        attempts += 1
        G = generate_er_graph(cfg.n, rng, cfg.edge_prob)
        if not cfg.connected or (G.edges and G.is_connected()) or attempts >= cfg.max_graph_attempts:
            return G, attempts


def learn_order(
    cfg: LearnConfig,
    env: FeedbackEnv,
    *,
    run_id: int = 0,
    graph: QueryGraph | None = None,
) -> LearnResult:
    """Run the full learning loop against ``env`` and return the estimated order.

    The query graph is drawn from ``cfg.seed`` unless ``graph`` is given.
    When the environment reveals its truth, every round is traced with the
    normalized error of the running estimate.
    """
    if env.n != cfg.n or env.k != cfg.k:
        raise ConfigError(f"environment has n={env.n}, k={env.k}; config has n={cfg.n}, k={cfg.k}")
    rng = np.random.default_rng(cfg.seed)
    attempts = 1
    if graph is None:
        graph, attempts = draw_query_graph(cfg, rng)
    if not graph.edges:
        raise InvalidInputError("query graph has no edges; raise edge_prob or n")
    colors = edge_coloring(graph)

    if cfg.rounds_per_edge == "auto":
        Delta = cfg.delta_guess
        if Delta is None:
            if not env.reveal_truth:
                raise ConfigError("rounds_per_edge='auto' needs delta_guess when truth is hidden")
            Delta = env.score_gap()
        r = rounds_per_edge_auto(graph.diameter, Delta, cfg)
    else:
        r = int(cfg.rounds_per_edge)
    schedule = build_schedule(graph, cfg, r, colors)

    truth = env.truth if env.reveal_truth else None
    left: dict[Edge, list[float]] = {e: [] for e in graph.edges}
    right: dict[Edge, list[float]] = {e: [] for e in graph.edges}
    diffs: dict[Edge, float] = {}
    trace: list[TraceRow] = []
    s_hat = np.zeros(cfg.n)
    unreachable: list[int] = list(range(1, cfg.n))
    start_queries, start_rounds = env.queries, env.rounds

    for t, rnd in enumerate(schedule.rounds, start=1):
        responses = env.play_round([q.group for q in rnd])
        completed = False
        for q, h in zip(rnd, responses):
            (left if q.arm == "left" else right)[q.edge].append(h)
            if q.arm == "right":
                e = q.edge
                diffs[e] = estimate_edge_diff(left[e], right[e], cfg.k)
                completed = True
        if completed:
            s_hat, unreachable = propagate_scores(graph, diffs)
        err = ok = None
        if truth is not None:
            err = env.ground_truth_error(s_hat)
            ok = ordering_consistent(argsort_desc(s_hat), truth)
        trace.append(TraceRow(run_id, t, env.queries - start_queries, err, ok))

    return LearnResult(
        sigma_hat=argsort_desc(s_hat),
        s_hat=s_hat,
        rounds_used=env.rounds - start_rounds,
        queries_used=env.queries - start_queries,
        trace=trace,
        graph=graph,
        colors=colors,
        rounds_per_edge=r,
        unreachable=unreachable,
        graph_attempts=attempts,
    )
