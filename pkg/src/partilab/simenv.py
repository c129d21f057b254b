"""Simulated group-feedback environment with hidden ground-truth scores."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .core import as_scores
from .errors import BudgetExhaustedError, ConfigError, InvalidInputError, NotAvailableError


@dataclass(frozen=True)
class NoiseModel:
    """Bounded zero-mean additive noise on each happiness response."""

    kind: str = "none"
    bound: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "uniform"):
            raise ConfigError(f"unsupported noise kind {self.kind!r}; use 'none' or 'uniform'")
        if not np.isfinite(self.bound) or self.bound < 0:
            raise ConfigError(f"noise bound must be finite and >= 0, got {self.bound}")
        if self.kind == "none":
            object.__setattr__(self, "bound", 0.0)

    def draw(self, rng: np.random.Generator) -> float:
        if self.kind == "none" or self.bound == 0.0:
            return 0.0
        return float(rng.uniform(-self.bound, self.bound))


def normalized_error(s_hat, s) -> float:
    """Relative L2 error with both vectors shifted so that item 0 scores 0.

    When the true scores are all equal the denominator vanishes and the
    absolute error is returned instead.
    """
    s = np.asarray(s, dtype=float)
    s_hat = np.asarray(s_hat, dtype=float)
    target = s - s[0]
    err = float(np.linalg.norm((s_hat - s_hat[0]) - target))
    scale = float(np.linalg.norm(target))
    return err / scale if scale > 0 else err


class FeedbackEnv:
    """Answers group queries with ``H(S) + eta`` where ``eta`` is bounded noise.

    The environment itself only meters queries and rounds; a round is one
    call to :meth:`play_round` carrying at most ``m`` groups.
    """

    def __init__(
        self,
        scores,
        k: int,
        noise: NoiseModel | None = None,
        *,
        rng: np.random.Generator | int | None = None,
        max_queries: int | None = None,
        max_rounds: int | None = None,
        reveal_truth: bool = True,
    ):
        self._scores = as_scores(scores)
        self.n = self._scores.size
        if int(k) != k or not 1 <= k <= self.n:
            raise ConfigError(f"group size k={k} must be in 1..{self.n}")
        self.k = int(k)
        self.m = max(1, self.n // self.k)
        self.noise = noise or NoiseModel()
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self.max_queries = max_queries
        self.max_rounds = max_rounds
        self.reveal_truth = reveal_truth
        self.queries = 0
        self.rounds = 0

    @property
    def truth(self) -> np.ndarray:
        if not self.reveal_truth:
            raise NotAvailableError("ground-truth scores are hidden in this environment")
        return self._scores

    def true_happiness(self, S: Iterable[int]) -> float:
        items = self._check(S)
        return float(self._scores[items].sum()) ** 2 / self.k**2

    def _check(self, S: Iterable[int]) -> list[int]:
        items = [int(i) for i in S]
        if len(items) != self.k or len(set(items)) != self.k:
            raise InvalidInputError(f"query needs exactly {self.k} distinct items, got {items}")
        for i in items:
            if not 0 <= i < self.n:
                raise InvalidInputError(f"item {i} out of range for n={self.n}")
        return items

    def query_group(self, S: Iterable[int]) -> float:
        """One noisy happiness response for group ``S``."""
        items = self._check(S)
        if self.max_queries is not None and self.queries >= self.max_queries:
            raise BudgetExhaustedError(f"query budget of {self.max_queries} exhausted")
        self.queries += 1
        h = float(self._scores[items].sum()) ** 2 / self.k**2
        return h + self.noise.draw(self.rng)

    def play_round(self, groups: Sequence[Iterable[int]]) -> list[float]:
        """Query up to ``m`` groups as one round."""
        groups = list(groups)
        if not 1 <= len(groups) <= self.m:
            raise InvalidInputError(f"a round carries 1..{self.m} groups, got {len(groups)}")
        if self.max_rounds is not None and self.rounds >= self.max_rounds:
            raise BudgetExhaustedError(f"round budget of {self.max_rounds} exhausted")
        for g in groups:
            self._check(g)
        if self.max_queries is not None and self.queries + len(groups) > self.max_queries:
            raise BudgetExhaustedError(f"query budget of {self.max_queries} exhausted")
        self.rounds += 1
        return [self.query_group(g) for g in groups]

    def ground_truth_error(self, s_hat) -> float:
        return normalized_error(s_hat, self.truth)

    def score_gap(self) -> float:
        """``2 k s_min d_min - d_min**2`` with ``d_min`` the smallest score gap."""
        s = self.truth
        if s.size < 2:
            raise InvalidInputError("score gap needs at least two items")
        d_min = float(np.min(np.diff(np.sort(s))))
        return 2 * self.k * float(s.min()) * d_min - d_min**2
