"""Synthetic datasets, CSV persistence and experiment files.

Generation uses PCG64 seeded through ``SeedSequence``; every dimension draws
from its own spawned stream and a further stream carries shared per-point
quantities, so output depends only on (kind, n, d, seed).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .core import Dataset
from .evaluation import FunctionSample

KINDS = ("independent", "correlated", "anticorrelated", "circle2d")


class DataFormatError(ValueError):
    """Malformed CSV or experiment file; the message names the row."""


@dataclass(frozen=True)
class GenSpec:
    kind: str
    n: int
    d: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.n < 1 or self.d < 1:
            raise ValueError("need n >= 1 and d >= 1")
        if self.kind == "circle2d" and self.d != 2:
            raise ValueError("circle2d requires d == 2")

    def to_dict(self) -> dict:
        return asdict(self)


def _streams(spec: GenSpec) -> tuple[np.random.Generator, list[np.random.Generator]]:
    children = np.random.SeedSequence(spec.seed).spawn(spec.d + 1)
    gens = [np.random.Generator(np.random.PCG64(c)) for c in children]
    return gens[0], gens[1:]


def generate(spec: GenSpec) -> Dataset:
    """Draw a dataset in [0, 1]^d.

    * independent: i.i.d. uniform coordinates.
    * correlated: a per-point level around 0.5, plus small per-dimension noise.
    * anticorrelated: points near the plane sum(x) = d/2, spread uniformly
      within it, so a high value in one dimension means low values elsewhere.
    * circle2d: (cos t, sin t) with t uniform in [0, pi/2].

    Correlated and anticorrelated values are clamped to [0, 1].
    """
    shared, dims = _streams(spec)
    n, d = spec.n, spec.d
    if spec.kind == "independent":
        X = np.column_stack([g.random(n) for g in dims])
    elif spec.kind == "correlated":
        level = shared.normal(0.5, 0.25, n)
        X = np.column_stack([level + g.normal(0.0, 0.05, n) for g in dims])
    elif spec.kind == "anticorrelated":
        level = shared.normal(0.5, 0.05, n)
        U = np.column_stack([g.uniform(-0.5, 0.5, n) for g in dims])
        # subtracting the row mean keeps every point on its plane
        X = level[:, None] + U - U.mean(axis=1, keepdims=True)
    else:
        t = shared.uniform(0.0, math.pi / 2, n)
        X = np.column_stack([np.cos(t), np.sin(t)])
    return Dataset(np.clip(X, 0.0, 1.0))


# -- CSV ---------------------------------------------------------------------

def _parse_float(cell: str) -> float | None:
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def _read_rows(path) -> list[list[str]]:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such file: {p}")
    with p.open(newline="") as fh:
        return [[c.strip() for c in row] for row in csv.reader(fh) if row and any(c.strip() for c in row)]


def load_dataset(path, check_range: bool = True) -> Dataset:
    """Read one point per row; a first row with a non-numeric cell is a header.

    Row numbers in error messages are 1-based file lines (header included).
    """
    rows = _read_rows(path)
    if not rows:
        raise DataFormatError(f"{path}: empty file")
    start = 1 if any(_parse_float(c) is None for c in rows[0]) else 0
    body = rows[start:]
    if not body:
        raise DataFormatError(f"{path}: no data rows after the header")
    d = len(body[0])
    data = np.empty((len(body), d))
    for r, row in enumerate(body):
        line = r + start + 1
        if len(row) != d:
            raise DataFormatError(f"{path}: row {line} has {len(row)} fields, expected {d}")
        for c, cell in enumerate(row):
            v = _parse_float(cell)
            if v is None:
                raise DataFormatError(f"{path}: row {line}, column {c + 1}: non-numeric value {cell!r}")
            if check_range and not 0.0 <= v <= 1.0:
                raise DataFormatError(f"{path}: row {line}, column {c + 1}: value {v} outside [0, 1]")
            data[r, c] = v
    return Dataset(data, check_range=check_range)


def save_dataset(dataset, path, header: list[str] | None = None) -> None:
    pts = dataset.points if isinstance(dataset, Dataset) else np.asarray(dataset, dtype=float)
    with Path(path).open("w", newline="") as fh:
        if header:
            fh.write(",".join(header) + "\n")
        for row in pts:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def load_sample(path, d: int | None = None) -> FunctionSample:
    """Linear utilities, one weight vector per row.

    A header containing ``prob`` marks that column as the probability weight;
    without it the utilities are equally likely.
    """
    rows = _read_rows(path)
    if not rows:
        raise DataFormatError(f"{path}: empty sample file")
    header = None
    if any(_parse_float(c) is None for c in rows[0]):
        header = [c.lower() for c in rows[0]]
        rows = rows[1:]
    prob_col = header.index("prob") if header and "prob" in header else None
    vals = []
    for r, row in enumerate(rows):
        line = r + (2 if header else 1)
        parsed = [_parse_float(c) for c in row]
        if any(v is None for v in parsed):
            raise DataFormatError(f"{path}: row {line}: non-numeric value")
        if vals and len(parsed) != len(vals[0]):
            raise DataFormatError(f"{path}: row {line} has {len(parsed)} fields, expected {len(vals[0])}")
        vals.append(parsed)
    if not vals:
        raise DataFormatError(f"{path}: no utilities")
    A = np.asarray(vals, dtype=float)
    if prob_col is not None:
        probs = A[:, prob_col]
        W = np.delete(A, prob_col, axis=1)
    else:
        probs, W = None, A
    if d is not None and W.shape[1] != d:
        raise DataFormatError(f"{path}: utilities have {W.shape[1]} weights, dataset has {d} dimensions")
    return FunctionSample.linear(W, probs)


def save_sample(sample: FunctionSample, path) -> None:
    if not sample.is_linear:
        raise ValueError("only linear samples can be saved")
    d = sample.weights.shape[1]
    with Path(path).open("w", newline="") as fh:
        fh.write(",".join([f"w{i}" for i in range(d)] + ["prob"]) + "\n")
        for w, p in zip(sample.weights, sample.probs):
            fh.write(",".join(f"{v:.17g}" for v in (*w, p)) + "\n")


def load_experiment(path) -> dict:
    """Parse an experiment JSON file; see ``bench.run_experiment`` for the layout."""
    try:
        exp = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise DataFormatError(f"{path}: invalid JSON ({e})") from None
    if not isinstance(exp, dict):
        raise DataFormatError(f"{path}: top level must be an object")
    exp["datasets"] = [GenSpec(**g) for g in exp.get("datasets", [])]
    return exp
