"""Regret and happiness metrics.

* ``max_regret_lp`` - exact maximum 1-regret ratio over all linear utilities,
  one small LP per candidate point.
* ``khapp_grid`` - minimum k-happiness ratio restricted to a set of utilities.
* ``ahr_sample`` / ``arr_sample`` - weighted average happiness / regret over a
  sample of (possibly nonlinear) utility functions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog

from .core import Dataset, Selection, UtilityVector, as_points, kth_best_scores, skyline_indices

LP_TOL = 1e-7
TIE_TOL = 1e-9
CHUNK = 1 << 15


class InvalidFunctionError(ValueError):
    """A sampled utility has no positive value on the dataset."""


@dataclass(frozen=True)
class RegretReport:
    value: float
    witness: UtilityVector
    witness_point: int

    @property
    def happiness(self) -> float:
        return 1.0 - self.value


@dataclass(frozen=True, eq=False)
class FunctionSample:
    """N utility functions with probability weights.

    Linear utilities are stored as an ``N x d`` weight matrix so they can be
    evaluated in bulk; arbitrary callables (point coords -> nonnegative float)
    go through ``funcs``.
    """

    probs: np.ndarray
    weights: np.ndarray | None = None
    funcs: tuple[Callable[[np.ndarray], float], ...] | None = None

    def __post_init__(self):
        if (self.weights is None) == (self.funcs is None):
            raise ValueError("give exactly one of weights or funcs")
        p = np.array(self.probs, dtype=float)
        n = len(self.weights) if self.weights is not None else len(self.funcs)
        if p.shape != (n,) or n == 0:
            raise ValueError("need one probability per function and at least one function")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        if self.weights is not None:
            W = np.array(self.weights, dtype=float)
            if W.ndim != 2 or np.any(W < 0) or not np.all(np.isfinite(W)):
                raise ValueError("linear utility weights must be a finite nonnegative N x d matrix")
            W.setflags(write=False)
            object.__setattr__(self, "weights", W)
        else:
            object.__setattr__(self, "funcs", tuple(self.funcs))

    @classmethod
    def linear(cls, weights, probs=None) -> "FunctionSample":
        W = np.atleast_2d(np.asarray(weights, dtype=float))
        if probs is None:
            probs = np.full(len(W), 1.0 / len(W))
        return cls(probs=probs, weights=W)

    @classmethod
    def from_callables(cls, funcs: Sequence[Callable], probs=None) -> "FunctionSample":
        if probs is None:
            probs = np.full(len(funcs), 1.0 / len(funcs))
        return cls(probs=probs, funcs=tuple(funcs))

    @property
    def N(self) -> int:
        return len(self.probs)

    @property
    def is_linear(self) -> bool:
        return self.weights is not None

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Values of every function on every point, shape ``N x n``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.weights is not None:
            if pts.shape[1] != self.weights.shape[1]:
                raise ValueError("utility dimension does not match the points")
            return self.weights @ pts.T
        out = np.array([[f(p) for p in pts] for f in self.funcs], dtype=float)
        if not np.all(np.isfinite(out)) or np.any(out < 0):
            raise InvalidFunctionError("utility functions must return finite nonnegative values")
        return out

    def dataset_max(self, points: np.ndarray) -> np.ndarray:
        """Per-function maximum over ``points``, evaluated chunk by chunk."""
        pts = np.asarray(points, dtype=float)
        best = np.full(self.N, -np.inf)
        for s in range(0, len(pts), CHUNK):
            np.maximum(best, self.evaluate(pts[s:s + CHUNK]).max(axis=1), out=best)
        return best


def _selection_indices(sel) -> list[int]:
    idx = list(sel.indices if isinstance(sel, Selection) else sel)
    if not idx:
        raise ValueError("selection must be non-empty")
    return idx


def point_regret_lp(p: np.ndarray, Q: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest regret point ``p`` can cause for a set ``Q``.

    maximize x  s.t.  w.(p - q) >= x for all q in Q,  w.p = 1,  w >= 0.
    Returns (x, w) with w rescaled to unit L1 norm.
    """
    d = p.size
    if not np.any(p > 0):
        return -np.inf, np.full(d, 1.0 / d)
    c = np.zeros(d + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-(p[None, :] - Q), np.ones((len(Q), 1))])
    b_ub = np.zeros(len(Q))
    A_eq = np.append(p, 0.0)[None, :]
    bounds = [(0, None)] * d + [(None, 1.0)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"regret LP failed: {res.message}")
    w = np.clip(res.x[:d], 0.0, None)
    return float(res.x[-1]), w / w.sum()


def regret_at(points: np.ndarray, sel_points: np.ndarray, w: np.ndarray) -> float:
    best_d = float((points @ w).max())
    if best_d <= 0:
        return 0.0
    return max(0.0, 1.0 - float((sel_points @ w).max()) / best_d)


def max_regret_lp(dataset: Dataset, sel, candidates=None) -> RegretReport:
    """Exact maximum regret ratio (k = 1) of ``sel`` over all linear utilities.

    Only skyline points can realise the maximum, so by default the LP is run
    for skyline points outside the selection. Ties go to the lower row.
    """
    idx = _selection_indices(sel)
    pts = dataset.points
    Q = pts[idx]
    if candidates is None:
        candidates = skyline_indices(pts)
    chosen = set(idx)
    results = {}
    for j in sorted(int(j) for j in candidates):
        if j not in chosen:
            results[j] = point_regret_lp(pts[j], Q)
    j = pick_worst(results)
    if j is None:
        return RegretReport(0.0, UtilityVector.l1(np.ones(dataset.dim)), idx[0])
    x, w = results[j]
    return RegretReport(min(x, 1.0), UtilityVector.l1(w), j)


def pick_worst(results: dict[int, tuple[float, np.ndarray]]) -> int | None:
    """Lowest row whose LP regret is within TIE_TOL of the maximum, if that is positive."""
    if not results:
        return None
    top = max(x for x, _ in results.values())
    if top <= TIE_TOL:
        return None
    return min(j for j, (x, _) in results.items() if x >= top - TIE_TOL)


def simplex_grid(d: int, resolution: int) -> np.ndarray:
    """All weight vectors with entries in {0, 1/res, ..., 1} summing to 1.

    Deterministic lattice with C(res + d - 1, d - 1) rows, ordered
    lexicographically by the stars-and-bars bar positions.
    """
    if d < 1 or resolution < 1:
        raise ValueError("need d >= 1 and resolution >= 1")
    rows = []
    for bars in itertools.combinations(range(resolution + d - 1), d - 1):
        edges = (-1,) + bars + (resolution + d - 1,)
        rows.append([edges[i + 1] - edges[i] - 1 for i in range(d)])
    return np.asarray(rows, dtype=float) / resolution


def khapp_per_utility(points: np.ndarray, sel_points: np.ndarray, W: np.ndarray, k: int) -> np.ndarray:
    """min{1, best score in sel / k-th best score in D} for every row of W.

    A zero k-th best score makes the constraint vacuous, so the ratio is 1.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    top = kth_best_scores(points, W, k)
    num = (W @ np.asarray(sel_points, dtype=float).T).max(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(top > 0, num / np.where(top > 0, top, 1.0), 1.0)
    return np.minimum(ratio, 1.0)


def _as_weight_matrix(sample, d: int) -> np.ndarray:
    if isinstance(sample, FunctionSample):
        if not sample.is_linear:
            raise ValueError("khapp_grid needs linear utilities")
        return sample.weights
    rows = [np.asarray(w, dtype=float).ravel() for w in sample] if not isinstance(sample, np.ndarray) else sample
    W = np.atleast_2d(np.asarray(rows, dtype=float))
    if W.size == 0:
        raise ValueError("utility sample must be non-empty")
    if W.shape[1] != d:
        raise ValueError("utility dimension does not match the dataset")
    return W


def khapp_grid(dataset: Dataset, sel, k: int, sample) -> float:
    """Minimum k-happiness ratio of ``sel`` over the sampled utilities."""
    if not 1 <= k <= dataset.n:
        raise ValueError(f"k must be in [1, {dataset.n}]")
    idx = _selection_indices(sel)
    W = _as_weight_matrix(sample, dataset.dim)
    return float(khapp_per_utility(dataset.points, dataset.points[idx], W, k).min())


def ahr_sample(dataset, sel, sample: FunctionSample) -> float:
    """Weighted average happiness ratio of ``sel`` over a function sample."""
    idx = _selection_indices(sel)
    pts = as_points(dataset)
    top = sample.dataset_max(pts)
    if np.any(top <= 0):
        bad = np.flatnonzero(top <= 0).tolist()
        raise InvalidFunctionError(f"sampled function(s) {bad} have no positive value on the dataset")
    num = sample.evaluate(pts[idx]).max(axis=1)
    happ = np.minimum(num / top, 1.0)
    return float(math.fsum(sample.probs * happ))


def arr_sample(dataset, sel, sample: FunctionSample) -> float:
    return 1.0 - ahr_sample(dataset, sel, sample)
