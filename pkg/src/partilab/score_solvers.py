"""Solvers for score-based compatibilities ``W_ij = s_i * s_j``.

Contiguous blocks of the sorted order (homophilous grouping) maximize AoA
and AoM. Pairing top blocks with bottom items (heterophilous grouping)
maximizes MoM. MoA is NP-hard even here; :func:`greedy_moa` gets within a
factor of two.

When ``k`` does not divide ``len(s)``, zero-score dummies are appended and
the returned partition records the real item count in ``n_real``.
"""

from __future__ import annotations

import numpy as np

from .core import Partition, argsort_desc, pad_scores
from .errors import InvalidInputError


def _prepare(s, k: int) -> tuple[np.ndarray, int, np.ndarray]:
    if int(k) != k or k < 1:
        raise InvalidInputError(f"group size must be a positive integer, got {k!r}")
    n_real = len(np.asarray(s))
    padded, _ = pad_scores(s, k)
    return padded, n_real, argsort_desc(padded)


def homophilous_partition(s, k: int) -> Partition:
    """Group consecutive runs of ``k`` items in descending-score order."""
    padded, n_real, sigma = _prepare(s, k)
    m = padded.size // k
    groups = tuple(tuple(sigma[i * k:(i + 1) * k]) for i in range(m))
    return Partition(groups, n_real=n_real)


def heterophilous_partition(s, k: int) -> Partition:
    """Group ``i`` takes the ``i``-th block of ``k-1`` top items plus the
    ``i``-th lowest-scored item."""
    padded, n_real, sigma = _prepare(s, k)
    n = padded.size
    m = n // k
    groups = tuple(
        tuple(sigma[i * (k - 1):(i + 1) * (k - 1)]) + (sigma[n - 1 - i],)
        for i in range(m)
    )
    return Partition(groups, n_real=n_real)


def greedy_moa(s, k: int, *, trace: list | None = None) -> Partition:
    """Assign items in descending score order to the lightest non-full group.

    Ties between groups go to the lowest group index. If ``trace`` is a list,
    one JSON-ready record per assignment is appended to it, holding the group
    totals and sizes *before* the assignment.
    """
    padded, n_real, sigma = _prepare(s, k)
    m = padded.size // k
    totals = [0.0] * m
    members: list[list[int]] = [[] for _ in range(m)]
    for step, item in enumerate(sigma):
        open_groups = [g for g in range(m) if len(members[g]) < k]
        chosen = min(open_groups, key=lambda g: (totals[g], g))
        if trace is not None:
            trace.append({
                "step": step,
                "item": int(item),
                "group": chosen,
                "totals": list(totals),
                "sizes": [len(g) for g in members],
            })
        members[chosen].append(int(item))
        totals[chosen] += float(padded[item])
    return Partition(tuple(tuple(g) for g in members), n_real=n_real)
