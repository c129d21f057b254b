"""Seeded repetitions of the learner and their CSV outputs."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .io import format_real
from .learner import LearnConfig, LearnResult, learn_order
from .simenv import FeedbackEnv, NoiseModel

TRACE_COLUMNS = ["run_id", "round", "cumulative_queries", "normalized_error", "ordering_correct"]


def synthetic_scores(n: int, rng: np.random.Generator, low: int = 1, high: int = 10) -> np.ndarray:
    """Integer scores drawn uniformly from ``{low, ..., high}``."""
    return rng.integers(low, high + 1, size=n).astype(float)


def distinct_scores(n: int, rng: np.random.Generator, low: int = 1, high: int = 10) -> np.ndarray:
    """``n`` distinct integer scores from ``{low, ..., high}``."""
    return rng.choice(np.arange(low, high + 1), size=n, replace=False).astype(float)


@dataclass(frozen=True)
class RunSpec:
    run_id: int
    cfg: LearnConfig
    noise: NoiseModel
    scores: tuple[float, ...] | None
    score_kind: str  # "uniform" or "distinct"; ignored when scores are fixed
    score_low: int
    score_high: int
    entropy: int
    true_gap: bool  # auto budget uses the environment's true score gap


def run_seeds(seed: int, runs: int) -> list[int]:
    """Independent per-run entropy derived from one base seed."""
    return [int(c.generate_state(1, np.uint64)[0]) for c in np.random.SeedSequence(seed).spawn(runs)]


def run_one(spec: RunSpec) -> LearnResult:
    score_seq, noise_seq, graph_seq = np.random.SeedSequence(spec.entropy).spawn(3)
    if spec.scores is not None:
        s = np.array(spec.scores, dtype=float)
    elif spec.score_kind == "distinct":
        s = distinct_scores(spec.cfg.n, np.random.default_rng(score_seq), spec.score_low, spec.score_high)
    else:
        s = synthetic_scores(spec.cfg.n, np.random.default_rng(score_seq), spec.score_low, spec.score_high)
    env = FeedbackEnv(s, spec.cfg.k, spec.noise, rng=np.random.default_rng(noise_seq))
    cfg = replace(spec.cfg, seed=int(graph_seq.generate_state(1, np.uint64)[0]))
    if spec.true_gap and cfg.rounds_per_edge == "auto" and cfg.delta_guess is None:
        cfg = replace(cfg, delta_guess=env.score_gap())
    return learn_order(cfg, env, run_id=spec.run_id)


def run_repetitions(
    cfg: LearnConfig,
    noise: NoiseModel,
    *,
    runs: int,
    seed: int,
    scores=None,
    score_kind: str = "uniform",
    score_low: int = 1,
    score_high: int = 10,
    true_gap: bool = True,
    jobs: int = 1,
) -> list[LearnResult]:
    """Run ``runs`` independent seeded repetitions; results ordered by run id."""
    fixed = None if scores is None else tuple(float(x) for x in scores)
    specs = [
        RunSpec(i, cfg, noise, fixed, score_kind, score_low, score_high, ent, true_gap)
        for i, ent in enumerate(run_seeds(seed, runs))
    ]
    if jobs > 1 and runs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run_one, specs))
    return [run_one(s) for s in specs]


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return format_real(x)
    return str(x)


def write_trace_csv(path, results: list[LearnResult]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for res in results:
            for row in res.trace:
                w.writerow([_cell(row.run_id), _cell(row.round), _cell(row.cumulative_queries),
                            _cell(row.normalized_error), _cell(row.ordering_correct)])


def mean_curve(results: list[LearnResult]) -> list[tuple[int, float, float]]:
    """Per-round mean and population std of normalized error across runs.

    Runs that finished early hold their final value for later rounds.
    """
    curves = []
    for res in results:
        errs = [r.normalized_error for r in res.trace]
        if not errs or any(e is None for e in errs):
            return []
        curves.append(errs)
    horizon = max(len(c) for c in curves)
    padded = np.array([c + [c[-1]] * (horizon - len(c)) for c in curves])
    means = padded.mean(axis=0)
    stds = padded.std(axis=0)
    return [(t + 1, float(means[t]), float(stds[t])) for t in range(horizon)]


def write_mean_curve_csv(path, results: list[LearnResult]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["round", "mean_normalized_error", "std"])
        for t, mu, sd in mean_curve(results):
            w.writerow([t, format_real(mu), format_real(sd)])


SUMMARY_COLUMNS = ["run_id", "rounds_per_edge", "rounds_used", "queries_used", "edges",
                   "diameter", "graph_attempts", "unreachable", "final_error", "ordering_correct"]


def write_summary_csv(path, results: list[LearnResult]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for i, res in enumerate(results):
            run_id = res.trace[0].run_id if res.trace else i
            w.writerow([run_id, res.rounds_per_edge, res.rounds_used, res.queries_used,
                        len(res.graph.edges), res.graph.diameter, res.graph_attempts,
                        " ".join(str(v + 1) for v in res.unreachable),
                        _cell(res.final_error), _cell(res.ordering_correct)])


def summarize(results: list[LearnResult]) -> dict:
    errs = [r.final_error for r in results if r.final_error is not None]
    oks = [r.ordering_correct for r in results if r.ordering_correct is not None]
    return {
        "runs": len(results),
        "mean_final_error": float(np.mean(errs)) if errs else math.nan,
        "ordering_correct": int(sum(oks)),
        "mean_rounds": float(np.mean([r.rounds_used for r in results])),
    }
