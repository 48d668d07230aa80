"""Data model, scoring, ranking, skyline and the 2D upper-right convex hull."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

TOL = 1e-9


class DegenerateDimensionError(ValueError):
    pass


@dataclass(frozen=True)
class Point:
    coords: tuple[float, ...]
    id: int

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype or float)


@dataclass(frozen=True, eq=False)
class Dataset:
    """An ``n x d`` block of scores plus the source index of every row.

    ``points`` is made read-only on construction; ``ids`` default to row
    positions.  Selections always refer to row positions, ``ids`` only carry
    provenance (e.g. back to an unreduced dataset).
    """

    points: np.ndarray
    ids: np.ndarray = None  # type: ignore[assignment]
    check_range: bool = field(default=True, repr=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1) if pts.size else pts.reshape(0, 1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"dataset needs n >= 1 points of dimension d >= 1, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("dataset contains non-finite coordinates")
        if self.check_range and (pts.min() < 0.0 or pts.max() > 1.0):
            raise ValueError("coordinates must lie in [0, 1]")
        pts.setflags(write=False)
        ids = np.arange(len(pts)) if self.ids is None else np.array(self.ids, dtype=np.int64)
        if ids.shape != (len(pts),):
            raise ValueError("ids must have one entry per point")
        ids.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "ids", ids)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> Point:
        return Point(tuple(float(v) for v in self.points[i]), int(i))

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.points[idx], self.ids[idx], check_range=self.check_range)


@dataclass(frozen=True)
class UtilityVector:
    weights: tuple[float, ...]
    normalized: bool = False

    def __post_init__(self):
        w = tuple(float(v) for v in np.ravel(self.weights))
        if any(not np.isfinite(v) or v < 0 for v in w):
            raise ValueError("utility weights must be finite and nonnegative")
        if self.normalized and abs(sum(w) - 1.0) > TOL:
            raise ValueError("normalized utility weights must sum to 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def l1(cls, weights: Iterable[float]) -> "UtilityVector":
        w = np.asarray(list(weights), dtype=float)
        s = w.sum()
        if s <= 0:
            raise ValueError("cannot L1-normalize a zero weight vector")
        return cls(tuple(w / s), normalized=True)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.weights, dtype=dtype or float)


@dataclass(frozen=True)
class Selection:
    indices: tuple[int, ...]
    metrics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(set(idx)) != len(idx):
            raise ValueError(f"selection indices must be distinct: {idx}")
        object.__setattr__(self, "indices", idx)

    @property
    def r(self) -> int:
        return len(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def validate(self, dataset: Dataset) -> None:
        if any(i < 0 or i >= dataset.n for i in self.indices):
            raise IndexError(f"selection {self.indices} not valid for a dataset of {dataset.n} points")


def as_points(data) -> np.ndarray:
    if isinstance(data, Dataset):
        return data.points
    return np.atleast_2d(np.asarray(data, dtype=float))


def normalize_dataset(dataset: Dataset) -> Dataset:
    """Divide each dimension by its maximum so that every column peaks at 1."""
    pts = dataset.points
    if pts.min() < 0:
        raise ValueError("normalization requires nonnegative coordinates")
    col_max = pts.max(axis=0)
    bad = np.flatnonzero(col_max <= 0)
    if bad.size:
        raise DegenerateDimensionError(f"dimension(s) {bad.tolist()} have maximum 0")
    out = pts / col_max
    # exact 1 at the argmax, division can land a hair off
    out[pts.argmax(axis=0), np.arange(pts.shape[1])] = 1.0
    return Dataset(np.minimum(out, 1.0), dataset.ids)


def score(p, w) -> float:
    p = np.asarray(p, dtype=float).ravel()
    w = np.asarray(w, dtype=float).ravel()
    if p.shape != w.shape:
        raise ValueError(f"dimension mismatch: point has {p.size}, utility has {w.size}")
    return float(p @ w)


def scores(dataset, w) -> np.ndarray:
    pts = as_points(dataset)
    w = np.asarray(w, dtype=float).ravel()
    if pts.shape[1] != w.size:
        raise ValueError(f"dimension mismatch: points have {pts.shape[1]}, utility has {w.size}")
    return pts @ w


def kth_best_score(dataset: Dataset, w, k: int) -> tuple[float, int]:
    """Return the k-th largest score and the row achieving it (ties to the lower row)."""
    if not 1 <= k <= dataset.n:
        raise ValueError(f"k must be in [1, {dataset.n}], got {k}")
    s = scores(dataset, w)
    # stable sort on -score keeps lower ids first among equal scores
    order = np.argsort(-s, kind="stable")
    i = int(order[k - 1])
    return float(s[i]), i


def kth_best_scores(points: np.ndarray, W: np.ndarray, k: int) -> np.ndarray:
    """k-th largest score of ``points`` under every row of ``W``."""
    S = np.asarray(W, dtype=float) @ np.asarray(points, dtype=float).T
    if k == 1:
        return S.max(axis=1)
    n = S.shape[1]
    return np.partition(S, n - k, axis=1)[:, n - k]


def dominates(p, q) -> bool:
    p = np.asarray(p)
    q = np.asarray(q)
    return bool(np.all(p >= q) and np.any(p > q))


def skyline_indices(points: np.ndarray) -> np.ndarray:
    """Rows not dominated by any other row; exact duplicates keep the lowest row.

    Sort-filter-skyline: after sorting by descending coordinate sum a point can
    only be dominated by points before it, so one pass against the growing
    skyline suffices.
    """
    pts = np.asarray(points, dtype=float)
    n, d = pts.shape
    if d == 2:
        return np.sort(_skyline_2d(pts))
    order = np.lexsort((np.arange(n), -pts.sum(axis=1)))
    sky: list[int] = []
    block = np.empty((64, d))
    m = 0
    for i in order:
        p = pts[i]
        if m and np.any(np.all(block[:m] >= p, axis=1)):
            continue
        if m == len(block):
            block = np.concatenate([block, np.empty_like(block)])
        block[m] = p
        m += 1
        sky.append(int(i))
    return np.sort(np.asarray(sky, dtype=np.int64))


def skyline(dataset: Dataset) -> Selection:
    return Selection(tuple(skyline_indices(dataset.points).tolist()))


def _skyline_2d(pts: np.ndarray) -> np.ndarray:
    # sort by x desc, y desc, row asc; keep a point iff its y beats every y seen so far
    n = len(pts)
    order = np.lexsort((np.arange(n), -pts[:, 1], -pts[:, 0]))
    ys = pts[order, 1]
    prev_best = np.concatenate(([-np.inf], np.maximum.accumulate(ys)[:-1]))
    return order[ys > prev_best]


def upper_hull_indices(points: np.ndarray) -> np.ndarray:
    """Rows on the upper-right hull of 2D points, sorted by increasing x.

    These are exactly the points that are the unique maximum of
    ``alpha*x + (1-alpha)*y`` for some alpha in [0, 1]; collinear and
    duplicate points are dropped so the chain is strictly convex.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("convex hull is only defined for 2-dimensional data")
    sky = _skyline_2d(pts)
    sky = sky[np.argsort(pts[sky, 0], kind="stable")]
    hull: list[int] = []
    for i in sky:
        px, py = pts[i]
        while len(hull) >= 2:
            ax, ay = pts[hull[-2]]
            bx, by = pts[hull[-1]]
            # pop b unless a -> b -> p turns clockwise
            if (bx - ax) * (py - ay) - (by - ay) * (px - ax) >= 0:
                hull.pop()
            else:
                break
        hull.append(int(i))
    return np.asarray(hull, dtype=np.int64)


def convex_hull_2d(dataset: Dataset) -> list[Point]:
    if dataset.dim != 2:
        raise ValueError(f"convex hull needs dim == 2, got {dataset.dim}")
    return [dataset[i] for i in upper_hull_indices(dataset.points)]
