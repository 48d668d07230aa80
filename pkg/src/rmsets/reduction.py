"""Additive and multiplicative dataset reduction by downward rounding.

Both schemes round every coordinate down onto a coarse lattice, merge the
resulting duplicates and remember which original rows produced each reduced
point.  Because rounding is downward, every original point dominates its
image, so any selection in the reduced data maps back to one that is at least
as happy.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from .core import Dataset, Selection

Mode = Literal["additive", "multiplicative"]


@dataclass(frozen=True)
class ReductionConfig:
    mode: Mode
    epsilon: float

    def __post_init__(self):
        if self.mode not in ("additive", "multiplicative"):
            raise ValueError(f"unknown reduction mode {self.mode!r}")
        _check_epsilon(self.epsilon)


@dataclass(frozen=True, eq=False)
class ReducedDataset:
    reduced: Dataset
    back_map: dict[int, list[int]]
    origin_choice: dict[int, int]
    config: ReductionConfig | None = None

    def image_of(self) -> np.ndarray:
        """Reduced row of every original row."""
        n = sum(len(v) for v in self.back_map.values())
        out = np.empty(n, dtype=np.int64)
        for rid, orig in self.back_map.items():
            out[orig] = rid
        return out

    def save(self, csv_path, map_path) -> None:
        from .datagen import save_dataset

        save_dataset(self.reduced, csv_path)
        payload = {
            "schema": 1,
            "mode": self.config.mode if self.config else None,
            "epsilon": self.config.epsilon if self.config else None,
            "back_map": {str(k): v for k, v in self.back_map.items()},
            "origin_choice": {str(k): v for k, v in self.origin_choice.items()},
        }
        Path(map_path).write_text(json.dumps(payload, indent=1))

    @classmethod
    def load(cls, csv_path, map_path) -> "ReducedDataset":
        from .datagen import load_dataset

        reduced = load_dataset(csv_path)
        payload = json.loads(Path(map_path).read_text())
        back_map = {int(k): [int(i) for i in v] for k, v in payload["back_map"].items()}
        choice = {int(k): int(v) for k, v in payload["origin_choice"].items()}
        cfg = None
        if payload.get("mode"):
            cfg = ReductionConfig(payload["mode"], float(payload["epsilon"]))
        return cls(reduced, back_map, choice, cfg)


def _check_epsilon(epsilon: float) -> None:
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")


def additive_levels(x: np.ndarray, per_unit: float) -> np.ndarray:
    """Largest m with m / per_unit <= x, entrywise.

    Grid values are formed as m / per_unit rather than m * step because the
    division is correctly rounded: 6 / 10 == 0.6 while 6 * 0.1 > 0.6.
    """
    m = np.floor(x * per_unit).astype(np.int64)
    # one-step correction against x * per_unit landing just across an integer
    m = np.where((m + 1) / per_unit <= x, m + 1, m)
    m = np.where(m / per_unit > x, m - 1, m)
    return np.maximum(m, 0)


def multiplicative_levels(x: np.ndarray, base: float, floor_value: float) -> np.ndarray:
    """Exponent e of the greatest power ``base**e <= x``, or -1 for zeroed entries."""
    x = np.asarray(x, dtype=float)
    e = np.zeros(x.shape, dtype=np.int64)
    pos = x > 0
    with np.errstate(divide="ignore"):
        guess = np.ceil(np.log(np.where(pos, x, 1.0)) / math.log(base)).astype(np.int64)
    e[pos] = np.maximum(guess[pos], 0)
    e = np.where(pos & (base ** e > x), e + 1, e)
    e = np.where(pos & (e > 0) & (base ** (e - 1) <= x), e - 1, e)
    return np.where(pos & (base ** e >= floor_value), e, -1)


def _merge(levels: np.ndarray, values: np.ndarray, dataset: Dataset, cfg: ReductionConfig) -> ReducedDataset:
    # reduced ids in order of first appearance among original rows
    _, first, inverse = np.unique(levels, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    rid_of_row = rank[inverse]
    reduced_pts = values[first[order]]
    back_map: dict[int, list[int]] = {i: [] for i in range(len(order))}
    for row, rid in enumerate(rid_of_row.tolist()):
        back_map[rid].append(row)
    sums = dataset.points.sum(axis=1)
    choice = {}
    for rid, rows in back_map.items():
        s = sums[rows]
        choice[rid] = rows[int(np.argmax(s))]  # argmax keeps the first, i.e. lowest row, on ties
    reduced = Dataset(np.clip(reduced_pts, 0.0, 1.0), ids=np.arange(len(order)))
    return ReducedDataset(reduced, back_map, choice, cfg)


def reduce_additive(dataset: Dataset, epsilon: float) -> ReducedDataset:
    """Round every coordinate down to a multiple of epsilon / d."""
    cfg = ReductionConfig("additive", epsilon)
    per_unit = dataset.dim / epsilon
    levels = additive_levels(dataset.points, per_unit)
    return _merge(levels, levels / per_unit, dataset, cfg)


def reduce_multiplicative(dataset: Dataset, epsilon: float) -> ReducedDataset:
    """Round every coordinate down to a power of (1 - epsilon/2); zero below epsilon/(2d)."""
    cfg = ReductionConfig("multiplicative", epsilon)
    base = 1.0 - epsilon / 2.0
    levels = multiplicative_levels(dataset.points, base, epsilon / (2.0 * dataset.dim))
    values = np.where(levels >= 0, base ** np.maximum(levels, 0), 0.0)
    return _merge(levels, values, dataset, cfg)


def reduce(dataset: Dataset, mode: Mode, epsilon: float) -> ReducedDataset:
    if mode == "additive":
        return reduce_additive(dataset, epsilon)
    if mode == "multiplicative":
        return reduce_multiplicative(dataset, epsilon)
    raise ValueError(f"unknown reduction mode {mode!r}")


def additive_size_bound(d: int, epsilon: float) -> float:
    return (d / epsilon + 1.0) ** d


def multiplicative_size_bound(d: int, epsilon: float) -> float:
    return (math.log(epsilon / (2.0 * d), 1.0 - epsilon / 2.0) + 2.0) ** d


def size_bound(mode: Mode, d: int, epsilon: float) -> float:
    return additive_size_bound(d, epsilon) if mode == "additive" else multiplicative_size_bound(d, epsilon)


def map_back(reduced_sel, rd: ReducedDataset) -> Selection:
    """Replace each reduced row by its originating row with the largest coordinate sum.

    Duplicate originals (two reduced rows can never share one) are impossible,
    so the result has the same size as the input selection.
    """
    idx = reduced_sel.indices if isinstance(reduced_sel, Selection) else tuple(reduced_sel)
    for i in idx:
        if i not in rd.back_map:
            raise IndexError(f"reduced row {i} does not exist")
    return Selection(tuple(rd.origin_choice[int(i)] for i in idx))
