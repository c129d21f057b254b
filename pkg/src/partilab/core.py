"""Domain vocabulary: compatibility matrices, score vectors, partitions, objectives.

Items are 0-indexed everywhere inside the package. File formats and the CLI
use 1-indexed items; conversion happens only at those boundaries.

A compatibility matrix is a plain ``float64`` ndarray that passed
:func:`as_matrix`; a score vector is one that passed :func:`as_scores`.
"""

from __future__ import annotations

import enum
import itertools
import warnings
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

SYMMETRY_TOL = 1e-9
OPT_TOL = 1e-9


class Objective(str, enum.Enum):
    """The four group-formation objectives."""

    AOA = "aoa"  # mean over groups of happiness
    MOM = "mom"  # min over groups of the worst pair
    AOM = "aom"  # mean over groups of the worst pair
    MOA = "moa"  # min over groups of happiness

    @classmethod
    def parse(cls, value: "str | Objective") -> "Objective":
        if isinstance(value, Objective):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidInputError(
                f"unknown objective {value!r}; expected one of aoa, mom, aom, moa"
            ) from None

    @property
    def label(self) -> str:
        return {"aoa": "AoA", "mom": "MoM", "aom": "AoM", "moa": "MoA"}[self.value]


def as_matrix(W, *, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Validate a compatibility matrix and return a read-only float64 copy."""
    arr = np.array(W, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise InvalidInputError(f"compatibility matrix must be non-empty square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("compatibility matrix has non-finite entries")
    if np.any(arr < 0):
        raise InvalidInputError("compatibility matrix has negative entries")
    if not np.allclose(arr, arr.T, rtol=0.0, atol=tol):
        raise InvalidInputError("compatibility matrix is not symmetric")
    arr.flags.writeable = False
    return arr


def as_scores(s) -> np.ndarray:
    """Validate a score vector and return a read-only float64 copy."""
    arr = np.array(s, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInputError(f"score vector must be a non-empty 1-d sequence, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("score vector has non-finite entries")
    if np.any(arr < 0):
        raise InvalidInputError("scores must be nonnegative")
    arr.flags.writeable = False
    return arr


def score_matrix(s) -> np.ndarray:
    """Rank-one compatibility matrix ``W_ij = s_i * s_j`` (diagonal ``s_i**2``)."""
    s = as_scores(s)
    W = np.outer(s, s)
    W.flags.writeable = False
    return W


def argsort_desc(s) -> np.ndarray:
    """Items ordered by non-increasing score; ties go to the lower index."""
    s = np.asarray(s, dtype=float)
    return np.argsort(-s, kind="stable")


def _check_group(S, n: int, min_size: int = 1) -> list[int]:
    items = [int(i) for i in S]
    if len(items) < min_size:
        raise InvalidInputError(f"group needs at least {min_size} item(s), got {len(items)}")
    if len(set(items)) != len(items):
        raise InvalidInputError(f"group {items} repeats an item")
    for i in items:
        if not 0 <= i < n:
            raise InvalidInputError(f"item index {i} out of range for n={n}")
    return items


def happiness(S: Iterable[int], W) -> float:
    """Mean compatibility over all ordered pairs of ``S``, diagonal included."""
    W = np.asarray(W, dtype=float)
    items = _check_group(S, W.shape[0])
    return float(W[np.ix_(items, items)].sum()) / len(items) ** 2


def min_pair(S: Iterable[int], W) -> float:
    """Smallest compatibility over unordered pairs of distinct members of ``S``."""
    W = np.asarray(W, dtype=float)
    items = _check_group(S, W.shape[0], min_size=2)
    return float(min(W[i, j] for i, j in itertools.combinations(items, 2)))


@dataclass(frozen=True, eq=False)
class Partition:
    """An assignment of items into groups.

    ``groups`` keeps the order a solver produced; equality ignores both group
    order and order within groups. Items with index ``>= n_real`` are dummy
    padding added when the group size does not divide the item count.
    """

    groups: tuple[tuple[int, ...], ...]
    n_real: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(tuple(int(i) for i in g) for g in self.groups))

    @property
    def m(self) -> int:
        return len(self.groups)

    @property
    def k(self) -> int:
        return len(self.groups[0]) if self.groups else 0

    @property
    def n(self) -> int:
        return sum(len(g) for g in self.groups)

    @property
    def has_dummies(self) -> bool:
        return self.n_real is not None and self.n_real < self.n

    def canonical(self) -> tuple[tuple[int, ...], ...]:
        """Groups sorted internally and ordered by their first element."""
        return tuple(sorted(tuple(sorted(g)) for g in self.groups))

    def without_dummies(self) -> tuple[tuple[int, ...], ...]:
        """Canonical groups with dummy items removed (sizes may differ)."""
        if self.n_real is None:
            return self.canonical()
        trimmed = (tuple(i for i in g if i < self.n_real) for g in self.canonical())
        return tuple(g for g in trimmed if g)

    def one_based(self) -> list[list[int]]:
        return [[i + 1 for i in g] for g in self.canonical()]

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())

    def __repr__(self):
        return f"Partition({self.one_based()})"


def partition_from_one_based(groups: Iterable[Iterable[int]]) -> Partition:
    return Partition(tuple(tuple(i - 1 for i in g) for g in groups))


def validate_partition(P: Partition | Sequence[Sequence[int]], n: int, k: int) -> list[str]:
    """Return the violated partition invariants; an empty list means valid.

    Each message starts with the invariant it names: ``size``, ``overlap``
    or ``coverage``.
    """
    groups = P.groups if isinstance(P, Partition) else [tuple(g) for g in P]
    errors: list[str] = []
    for idx, g in enumerate(groups):
        if len(g) != k:
            errors.append(f"size: group {idx} has {len(g)} items, expected {k}")
    seen: dict[int, int] = {}
    dup: set[int] = set()
    for idx, g in enumerate(groups):
        for i in g:
            if i in seen and i not in dup:
                dup.add(i)
                errors.append(f"overlap: item {i} appears in groups {seen[i]} and {idx}")
            seen.setdefault(i, idx)
    items = set(seen)
    missing = sorted(set(range(n)) - items)
    extra = sorted(items - set(range(n)))
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing {missing}")
        if extra:
            parts.append(f"out of range {extra}")
        errors.append("coverage: " + ", ".join(parts))
    return errors


def check_partition(P: Partition, n: int, k: int | None = None) -> None:
    """Raise :class:`InvalidInputError` unless ``P`` is a valid k-partition of ``n`` items."""
    if not P.groups:
        raise InvalidInputError("partition has no groups")
    errors = validate_partition(P, n, P.k if k is None else k)
    if errors:
        raise InvalidInputError("invalid partition: " + "; ".join(errors))


def group_values(P: Partition, W) -> tuple[list[float], list[float] | None]:
    """Per-group happiness and per-group worst pair (``None`` when k == 1)."""
    W = np.asarray(W, dtype=float)
    H = [happiness(g, W) for g in P.groups]
    M = [min_pair(g, W) for g in P.groups] if P.k >= 2 else None
    return H, M


def evaluate_objective(P: Partition, W, kind: Objective | str) -> float:
    """Objective value of partition ``P`` under compatibility matrix ``W``."""
    kind = Objective.parse(kind)
    W = np.asarray(W, dtype=float)
    check_partition(P, W.shape[0])
    if kind in (Objective.MOM, Objective.AOM) and P.k < 2:
        raise InvalidInputError(f"{kind.label} needs groups of at least two items")
    H, M = group_values(P, W)
    if kind is Objective.AOA:
        return float(np.mean(H))
    if kind is Objective.MOA:
        return float(min(H))
    if kind is Objective.AOM:
        return float(np.mean(M))
    return float(min(M))


def objective_from_group_values(kind: Objective, H: Sequence[float], M: Sequence[float] | None) -> float:
    kind = Objective.parse(kind)
    if kind is Objective.AOA:
        return float(sum(H) / len(H))
    if kind is Objective.MOA:
        return float(min(H))
    if M is None:
        raise InvalidInputError(f"{kind.label} needs groups of at least two items")
    if kind is Objective.AOM:
        return float(sum(M) / len(M))
    return float(min(M))


def padding_needed(n: int, k: int) -> int:
    if k < 1:
        raise InvalidInputError(f"group size must be positive, got {k}")
    return (-n) % k


def pad_scores(s, k: int) -> tuple[np.ndarray, int]:
    """Append zero-score dummies so that ``k`` divides the item count."""
    s = as_scores(s)
    extra = padding_needed(s.size, k)
    if extra == 0:
        return s, 0
    out = np.concatenate([s, np.zeros(extra)])
    out.flags.writeable = False
    return out, extra


def pad_matrix(W, k: int) -> tuple[np.ndarray, int]:
    """Append all-zero dummy rows/columns so that ``k`` divides the item count."""
    W = as_matrix(W)
    n = W.shape[0]
    extra = padding_needed(n, k)
    if extra == 0:
        return W, 0
    warnings.warn(
        f"group size {k} does not divide n={n}; adding {extra} zero-compatibility dummy item(s)",
        stacklevel=2,
    )
    out = np.zeros((n + extra, n + extra))
    out[:n, :n] = W
    out.flags.writeable = False
    return out, extra
