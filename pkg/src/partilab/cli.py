"""Command-line entry point: ``partilab {solve,oracle,learn,ingest,replay}``.

Exit codes: 0 success, 2 validation error, 3 budget or enumeration-cap
error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .core import Objective, Partition, evaluate_objective, pad_scores, score_matrix
from .errors import (
    BudgetExhaustedError,
    InstanceTooLargeError,
    InvalidInputError,
    NotAvailableError,
    PartilabError,
    SamplingError,
)
from .experiment import (
    run_repetitions,
    summarize,
    write_mean_curve_csv,
    write_summary_csv,
    write_trace_csv,
)
from .general_solvers import (
    DEFAULT_CAP,
    brute_force_optimal,
    is_transitive,
    solve_k2_avg,
    solve_k2_min,
    transitive_mom,
)
from .ingest import jaccard_scores, load_edge_list, load_features, sample_subgraph
from .io import format_partition, format_real, read_matrix_csv, read_scores_csv, write_scores_csv
from .learner import LearnConfig
from .manifest import RunManifest, file_digest, now
from .score_solvers import greedy_moa, heterophilous_partition, homophilous_partition
from .simenv import NoiseModel

log = logging.getLogger("partilab")

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_IO = 0, 2, 3, 4
SEED_ENV = "PARTILAB_SEED"
METHODS = ["auto", "homophilous", "heterophilous", "greedy", "k2", "transitive", "brute"]
SCORE_METHODS = {"homophilous", "heterophilous", "greedy"}


class CommandError(InvalidInputError):
    pass


def _resolve_seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise CommandError(f"{SEED_ENV}={env!r} is not an integer") from None
    return 0


def _read_kv_config(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CommandError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (x.strip() for x in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _load_instance(args) -> tuple[np.ndarray, np.ndarray | None, dict[str, str]]:
    """Return (matrix, scores or None, input digests)."""
    if bool(args.input) == bool(args.scores):
        raise CommandError("give exactly one of --input (matrix CSV) or --scores (score CSV)")
    if args.scores:
        s = read_scores_csv(args.scores)
        return score_matrix(s), s, {str(args.scores): file_digest(args.scores)}
    W = read_matrix_csv(args.input)
    return W, None, {str(args.input): file_digest(args.input)}


def _choose_method(method: str, kind: Objective, k: int, scores, W) -> str:
    if method != "auto":
        if method in SCORE_METHODS and scores is None:
            raise CommandError(f"method {method!r} needs a score file (--scores)")
        if method == "k2" and k != 2:
            raise CommandError("method 'k2' needs --k 2")
        if method == "transitive" and kind is not Objective.MOM:
            raise CommandError("method 'transitive' solves MoM only")
        return method
    if scores is not None:
        if kind in (Objective.AOA, Objective.AOM):
            return "homophilous"
        if kind is Objective.MOM:
            return "heterophilous"
        # greedy is only a 1/2-approximation; pairs can be solved exactly
        return "k2" if k == 2 else "greedy"
    if k == 2:
        return "k2"
    if kind is Objective.MOM and is_transitive(W):
        return "transitive"
    return "brute"


def solve_instance(W, scores, k: int, kind: Objective, method: str, cap: int = DEFAULT_CAP,
                   trace: list | None = None) -> tuple[str, Partition, float, np.ndarray]:
    """Dispatch to a solver; returns (method, partition, value, matrix used).

    Score inputs are padded with zero-score dummies when ``k`` does not divide
    ``n``; the returned matrix is the padded one the value refers to.
    """
    if scores is not None:
        padded, _ = pad_scores(scores, k)
        W = score_matrix(padded)
    method = _choose_method(method, kind, k, scores, W)
    if method == "homophilous":
        P = homophilous_partition(scores, k)
    elif method == "heterophilous":
        P = heterophilous_partition(scores, k)
    elif method == "greedy":
        P = greedy_moa(scores, k, trace=trace)
    elif method == "k2":
        solver = solve_k2_avg if kind in (Objective.AOA, Objective.AOM) else solve_k2_min
        res = solver(W, kind) if W.shape[0] % 2 == 0 else None
        if res is None:
            raise CommandError(f"k=2 needs an even number of items, got {W.shape[0]}")
        P = res.partition
    elif method == "transitive":
        res = transitive_mom(W, k)
        return method, res.partition, res.value, W
    else:
        res = brute_force_optimal(W, k, kind, cap=cap)
        if res.partition.has_dummies:
            W = np.pad(W, (0, res.partition.n - W.shape[0]))
        P = res.partition
    if scores is not None and P.n_real is None:
        P = Partition(P.groups, n_real=len(scores))
    return method, P, evaluate_objective(P, W, kind), W


def _write_partition_files(out: Path, P: Partition) -> list[str]:
    names = ["partition.txt"]
    (out / "partition.txt").write_text(format_partition(P), encoding="utf-8")
    if P.has_dummies:
        real = "".join(",".join(str(i + 1) for i in g) + "\n" for g in P.without_dummies())
        (out / "partition_real.txt").write_text(real, encoding="utf-8")
        names.append("partition_real.txt")
    return names


def _result_json(out: Path, payload: dict) -> str:
    (out / "result.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return "result.json"


def cmd_solve(args) -> tuple[list[str], dict, list[int], dict]:
    W, scores, inputs = _load_instance(args)
    kind = Objective.parse(args.objective)
    out = Path(args.out_dir)
    trace: list | None = [] if args.trace else None
    method, P, value, _ = solve_instance(W, scores, args.k, kind, args.method, args.cap, trace)
    names = _write_partition_files(out, P)
    names.append(_result_json(out, {
        "objective": kind.label,
        "method": method,
        "k": args.k,
        "value": format_real(value),
        "groups": P.one_based(),
        "has_dummies": P.has_dummies,
    }))
    if trace is not None:
        (out / "trace.json").write_text(json.dumps(trace, indent=1) + "\n", encoding="utf-8")
        names.append("trace.json")
    print(f"{kind.label} method={method} value={format_real(value)}")
    for g in P.one_based():
        print(",".join(map(str, g)))
    config = {"k": args.k, "objective": kind.value, "method": args.method, "cap": args.cap}
    return names, config, [], inputs


def cmd_oracle(args) -> tuple[list[str], dict, list[int], dict]:
    W, scores, inputs = _load_instance(args)
    kind = Objective.parse(args.objective)
    if scores is not None:
        W = score_matrix(pad_scores(scores, args.k)[0])
    res = brute_force_optimal(W, args.k, kind, cap=args.cap)
    out = Path(args.out_dir)
    names = _write_partition_files(out, res.partition)
    names.append(_result_json(out, {
        "objective": kind.label,
        "method": "brute",
        "k": args.k,
        "value": format_real(res.value),
        "enumerated": res.info["enumerated"],
        "groups": res.partition.one_based(),
    }))
    print(f"{kind.label} optimum={format_real(res.value)} enumerated={res.info['enumerated']}")
    for g in res.partition.one_based():
        print(",".join(map(str, g)))
    return names, {"k": args.k, "objective": kind.value, "cap": args.cap}, [], inputs


def cmd_learn(args) -> tuple[list[str], dict, list[int], dict]:
    seed = _resolve_seed(args.seed)
    inputs = {}
    scores = None
    if args.config:
        inputs[str(args.config)] = file_digest(args.config)
    if args.scores:
        scores = read_scores_csv(args.scores)
        inputs[str(args.scores)] = file_digest(args.scores)
        if args.n is not None and args.n != scores.size:
            raise CommandError(f"--n {args.n} disagrees with {scores.size} scores in {args.scores}")
        n = scores.size
    else:
        n = args.n if args.n is not None else 16
    rpe = args.rounds_per_edge
    rounds_per_edge = "auto" if str(rpe) == "auto" else int(rpe)
    cfg = LearnConfig(
        n=n, k=args.k, m=args.m, delta=args.delta, rounds_per_edge=rounds_per_edge,
        delta_guess=args.delta_guess, noise_bound=args.noise_bound, seed=seed,
        constant=args.constant, edge_prob=args.edge_prob, connected=not args.allow_disconnected,
    )
    noise = NoiseModel(args.noise, args.noise_bound)
    results = run_repetitions(cfg, noise, runs=args.runs, seed=seed, scores=scores,
                              score_kind=args.score_dist, true_gap=True, jobs=args.jobs)
    out = Path(args.out_dir)
    write_trace_csv(out / "traces.csv", results)
    write_mean_curve_csv(out / "mean_curve.csv", results)
    write_summary_csv(out / "summary.csv", results)
    summary = summarize(results)
    print(f"runs={summary['runs']} ordering_correct={summary['ordering_correct']}/{summary['runs']} "
          f"mean_final_error={summary['mean_final_error']:.6g} mean_rounds={summary['mean_rounds']:.1f}")
    config = {
        "n": cfg.n, "k": cfg.k, "m": cfg.m, "delta": cfg.delta, "rounds_per_edge": cfg.rounds_per_edge,
        "delta_guess": cfg.delta_guess, "noise": noise.kind, "noise_bound": noise.bound,
        "runs": args.runs, "constant": cfg.constant, "edge_prob": cfg.edge_prob,
        "connected": cfg.connected, "score_dist": args.score_dist,
    }
    return ["traces.csv", "mean_curve.csv", "summary.csv"], config, [seed], inputs


def cmd_ingest(args) -> tuple[list[str], dict, list[int], dict]:
    seed = _resolve_seed(args.seed)
    graph = load_edge_list(args.edges)
    features = load_features(args.features)
    nodes = sample_subgraph(graph, args.size, np.random.default_rng(seed))
    s = jaccard_scores(features, nodes)
    out = Path(args.out_dir)
    write_scores_csv(out / "scores.csv", s)
    with open(out / "nodes.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("item,node\n")
        for i, v in enumerate(nodes, start=1):
            fh.write(f"{i},{v}\n")
    print(f"sampled {len(nodes)} of {len(graph.nodes)} nodes; mean score {float(np.mean(s)):.6g}")
    inputs = {str(args.edges): file_digest(args.edges), str(args.features): file_digest(args.features)}
    return ["scores.csv", "nodes.csv"], {"size": args.size}, [seed], inputs


def _strip_out_dir(argv: list[str]) -> list[str]:
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok == "--out-dir":
            skip = True
            continue
        if tok.startswith("--out-dir="):
            continue
        out.append(tok)
    return out


def cmd_replay(args) -> int:
    manifest = RunManifest.read(args.manifest)
    for path, digest in manifest.inputs.items():
        if not Path(path).exists():
            raise FileNotFoundError(f"input {path} recorded in the manifest is missing")
        if file_digest(path) != digest:
            raise CommandError(f"input {path} changed since the recorded run")
    code = main(manifest.argv + ["--out-dir", args.out_dir])
    if code != EXIT_OK:
        return code
    mismatched = [name for name, digest in manifest.outputs.items()
                  if file_digest(Path(args.out_dir) / name) != digest]
    if mismatched:
        print("replay differs in: " + ", ".join(mismatched), file=sys.stderr)
        return EXIT_INVALID
    print(f"replay reproduced {len(manifest.outputs)} output file(s) byte-identically")
    return EXIT_OK


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="dense compatibility matrix CSV")
    p.add_argument("--scores", help='score CSV with header "item,score"')
    p.add_argument("--k", type=int, required=True, help="group size")
    p.add_argument("--objective", required=True, choices=[o.value for o in Objective])
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="max partitions to enumerate")
    p.add_argument("--out-dir", default=".", help="directory for outputs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="partilab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"partilab {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a grouping instance")
    _add_instance_args(p)
    p.add_argument("--method", default="auto", choices=METHODS)
    p.add_argument("--trace", action="store_true", help="write the greedy assignment trace as JSON")

    p = sub.add_parser("oracle", help="exact optimum by exhaustive enumeration")
    _add_instance_args(p)

    p = parser.learn_parser = sub.add_parser("learn", help="run seeded repetitions of the ordering learner")
    p.add_argument("--config", help="flat key=value file; command-line flags override it")
    p.add_argument("--scores", help="fixed true scores (default: synthetic per run)")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--rounds-per-edge", default="auto", help="integer or 'auto'")
    p.add_argument("--delta-guess", type=float, default=None,
                   help="score gap for the auto budget (default: true gap in simulation)")
    p.add_argument("--noise", choices=["none", "uniform"], default="uniform")
    p.add_argument("--noise-bound", type=float, default=1.0)
    p.add_argument("--constant", type=float, default=8.0, help="leading constant of the auto budget")
    p.add_argument("--edge-prob", type=float, default=None, help="override ln(n)/n")
    p.add_argument("--allow-disconnected", action="store_true",
                   help="keep the first random graph even if disconnected")
    p.add_argument("--score-dist", choices=["uniform", "distinct"], default="uniform",
                   help="synthetic scores: iid U{1..10} or distinct draws from {1..10}")
    p.add_argument("--runs", type=int, default=30)
    p.add_argument("--seed", type=int, default=None, help=f"base seed (fallback: ${SEED_ENV}, then 0)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes across runs")
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("ingest", help="sample a subgraph and derive Jaccard scores")
    p.add_argument("--edges", required=True)
    p.add_argument("--features", required=True, help="JSON object {node: [tokens]}")
    p.add_argument("--size", type=int, default=16)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("replay", help="re-run a manifest and compare outputs")
    p.add_argument("manifest")
    p.add_argument("--out-dir", required=True)
    return parser


COMMANDS = {"solve": cmd_solve, "oracle": cmd_oracle, "learn": cmd_learn, "ingest": cmd_ingest}


def _parse(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "learn" and args.config:
        learn = parser.learn_parser
        known = {a.dest for a in learn._actions}
        values = _read_kv_config(args.config)
        unknown = sorted(set(values) - known)
        if unknown:
            raise CommandError(f"unknown config keys: {', '.join(unknown)}")
        learn.set_defaults(**values)
        args = parser.parse_args(argv)
    return args


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parse(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        if args.command == "replay":
            return cmd_replay(args)
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        started = now()
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = lambda msg, *a, **k: log.warning("%s", msg)
            names, config, seeds, inputs = COMMANDS[args.command](args)
        replay_argv = _strip_out_dir(argv)
        if seeds and "--seed" not in replay_argv and not any(t.startswith("--seed=") for t in replay_argv):
            replay_argv += ["--seed", str(seeds[0])]
        manifest = RunManifest(args.command, replay_argv, config, seeds, inputs, started=started)
        manifest.record_outputs(out, names)
        manifest.finished = now()
        manifest.write(out / "manifest.json")
        return EXIT_OK
    except (InstanceTooLargeError, BudgetExhaustedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InvalidInputError, SamplingError, NotAvailableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PartilabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
