"""Readers and writers for the matrix, score and partition file formats.

All files are UTF-8 text with 1-indexed items. Reals are written with 17
significant digits so that a save/load cycle reproduces every double.
"""

from __future__ import annotations

import csv
import os
from pathlib import Path

import numpy as np

from .core import Partition, as_matrix, as_scores
from .errors import ParseError

PathLike = str | os.PathLike


def format_real(x: float) -> str:
    return format(float(x), ".17g")


def _parse_real(text: str, path, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"not a number: {text.strip()!r}", str(path), line) from None


def read_matrix_csv(path: PathLike) -> np.ndarray:
    rows: list[list[float]] = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            rows.append([_parse_real(c, path, lineno) for c in row])
    if not rows:
        raise ParseError("empty matrix file", str(path))
    n = len(rows)
    for lineno, row in enumerate(rows, start=1):
        if len(row) != n:
            raise ParseError(f"expected {n} columns, found {len(row)}", str(path), lineno)
    try:
        return as_matrix(rows)
    except ValueError as exc:
        raise ParseError(str(exc), str(path)) from None


def write_matrix_csv(path: PathLike, W) -> None:
    W = np.asarray(W, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for row in W:
            fh.write(",".join(format_real(x) for x in row) + "\n")


def read_scores_csv(path: PathLike) -> np.ndarray:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["item", "score"]:
            raise ParseError('expected header "item,score"', str(path), 1)
        values: dict[int, float] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 fields, found {len(row)}", str(path), lineno)
            try:
                item = int(row[0])
            except ValueError:
                raise ParseError(f"bad item id {row[0]!r}", str(path), lineno) from None
            if item in values:
                raise ParseError(f"item {item} listed twice", str(path), lineno)
            values[item] = _parse_real(row[1], path, lineno)
    n = len(values)
    if n == 0:
        raise ParseError("no scores found", str(path))
    if sorted(values) != list(range(1, n + 1)):
        raise ParseError(f"items must be exactly 1..{n}", str(path))
    try:
        return as_scores([values[i] for i in range(1, n + 1)])
    except ValueError as exc:
        raise ParseError(str(exc), str(path)) from None


def write_scores_csv(path: PathLike, s) -> None:
    s = np.asarray(s, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("item,score\n")
        for i, x in enumerate(s, start=1):
            fh.write(f"{i},{format_real(x)}\n")


def write_partition(path: PathLike, P: Partition) -> None:
    Path(path).write_text(format_partition(P), encoding="utf-8")


def format_partition(P: Partition) -> str:
    return "".join(",".join(str(i) for i in g) + "\n" for g in P.one_based())


def read_partition(path: PathLike) -> Partition:
    groups = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                groups.append(tuple(int(x) - 1 for x in line.split(",")))
            except ValueError:
                raise ParseError(f"bad group line {line.strip()!r}", str(path), lineno) from None
    return Partition(tuple(groups))
