"""k-RMS solvers: the LP-driven greedy and the exhaustive search over a reduced dataset."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import Dataset, Selection, kth_best_scores, skyline_indices
from .evaluation import (
    TIE_TOL,
    khapp_per_utility,
    pick_worst,
    point_regret_lp,
    simplex_grid,
)
from .reduction import ReducedDataset, map_back, reduce

DEFAULT_BUDGET = 10**7


class BudgetExceededError(RuntimeError):
    pass


@dataclass(frozen=True)
class PtasConfig:
    epsilon: float
    mode: Literal["additive", "multiplicative"] = "additive"
    k: int = 1
    evaluator: Literal["lp", "grid"] = "lp"
    resolution: int | None = None

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.mode not in ("additive", "multiplicative"):
            raise ValueError(f"unknown reduction mode {self.mode!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.evaluator == "lp":
            if self.k != 1:
                raise ValueError("the LP evaluator only handles k = 1; use the grid evaluator")
        elif self.evaluator == "grid":
            if self.resolution is None or self.resolution < 10:
                raise ValueError("grid evaluator needs resolution >= 10")
        else:
            raise ValueError(f"unknown evaluator {self.evaluator!r}")


class _LazyRegret:
    """Max-regret search over a shrinking candidate pool.

    A candidate's regret can only fall as the selection grows, so its last LP
    value is an upper bound; candidates are re-solved in bound order until no
    remaining bound can reach the current maximum.  Candidates whose regret
    reaches zero are dropped for good.
    """

    def __init__(self, points: np.ndarray, candidates):
        self.points = points
        self.bound = {int(j): math.inf for j in candidates}
        self.lp_calls = 0

    def discard(self, j: int) -> None:
        self.bound.pop(j, None)

    def worst(self, Q: np.ndarray):
        results = {}
        best = -math.inf
        for j in sorted(self.bound, key=lambda j: (-self.bound[j], j)):
            if self.bound[j] < best - TIE_TOL:
                break
            x, w = point_regret_lp(self.points[j], Q)
            self.lp_calls += 1
            self.bound[j] = x
            results[j] = (x, w)
            best = max(best, x)
        for j, (x, _) in results.items():
            if x <= TIE_TOL:
                del self.bound[j]
        j = pick_worst(results)
        if j is None:
            return None, 0.0, None
        return j, results[j][0], results[j][1]


def greedy_1rms(dataset: Dataset, r: int) -> Selection:
    """Greedy 1-RMS: start from the best first coordinate, then repeatedly add
    the point realising the current maximum regret ratio."""
    if r < 1:
        raise ValueError("r must be >= 1")
    pts = dataset.points
    sky = skyline_indices(pts)
    first = int(sky[np.argmax(pts[sky, 0])])
    chosen = [first]
    pool = _LazyRegret(pts, sky)
    pool.discard(first)
    trace = []
    regret, witness = None, None
    while True:
        j, x, w = pool.worst(pts[chosen])
        regret, witness = max(x, 0.0), w
        if j is None or len(chosen) >= min(r, len(sky)):
            break
        trace.append({"added": j, "regret_before": x})
        chosen.append(j)
        pool.discard(j)
    if witness is None:
        witness = np.full(dataset.dim, 1.0 / dataset.dim)
    return Selection(
        tuple(chosen),
        {
            "regret": regret,
            "happiness": 1.0 - regret,
            "witness_w": [float(v) for v in witness],
            "lp_calls": pool.lp_calls,
            "trace": trace,
        },
    )


def reduced_greedy(dataset: Dataset, r: int, mode: str, epsilon: float) -> tuple[Selection, ReducedDataset]:
    """Greedy 1-RMS on a reduced dataset, mapped back to original rows."""
    rd = reduce(dataset, mode, epsilon)
    sel = greedy_1rms(rd.reduced, r)
    out = map_back(sel, rd)
    return Selection(out.indices, dict(sel.metrics, reduced_size=rd.reduced.n)), rd


class _GridEvaluator:
    def __init__(self, dataset: Dataset, k: int, resolution: int):
        self.W = simplex_grid(dataset.dim, resolution)
        self.top = kth_best_scores(dataset.points, self.W, k)
        self.valid = self.top > 0
        self.points = dataset.points
        self.k = k

    def combos(self, cand_points: np.ndarray, combos: np.ndarray) -> np.ndarray:
        """Min happiness over the grid for a batch of index combinations (B x r)."""
        S = self.W @ cand_points.T  # G x m
        num = S[:, combos].max(axis=2)  # G x B
        top = np.where(self.valid, self.top, 1.0)[:, None]
        ratio = np.where(self.valid[:, None], np.minimum(num / top, 1.0), 1.0)
        return ratio.min(axis=0)

    def happiness(self, sel_points: np.ndarray):
        per = khapp_per_utility(self.points, sel_points, self.W, self.k)
        i = int(np.argmin(per))
        return float(per[i]), self.W[i]


class _LPEvaluator:
    def __init__(self, dataset: Dataset):
        self.dataset = dataset
        self.sky = skyline_indices(dataset.points)

    def combos(self, cand_points: np.ndarray, combos: np.ndarray) -> np.ndarray:
        out = np.empty(len(combos))
        for b, c in enumerate(combos):
            out[b] = self._happiness(cand_points[c])[0]
        return out

    def _happiness(self, Q: np.ndarray):
        worst, w_best = 0.0, None
        for j in self.sky:
            x, w = point_regret_lp(self.dataset.points[j], Q)
            if x > worst + TIE_TOL:
                worst, w_best = x, w
        if w_best is None:
            w_best = np.full(self.dataset.dim, 1.0 / self.dataset.dim)
        return 1.0 - min(worst, 1.0), w_best

    def happiness(self, sel_points: np.ndarray):
        return self._happiness(sel_points)


def ptas_search(dataset: Dataset, r: int, cfg: PtasConfig, budget: int = DEFAULT_BUDGET) -> Selection:
    """Reduce, try every r-combination of reduced points, map the best one back.

    Combinations are scored against the original dataset's k-th best scores,
    so the winner's mapped-back set is at least as happy as the score seen
    here.  With the grid evaluator every guarantee is relative to that grid.
    """
    if not 1 <= r <= dataset.n:
        raise ValueError(f"r must be in [1, {dataset.n}]")
    if cfg.k > dataset.n:
        raise ValueError("k exceeds the dataset size")
    t0 = time.perf_counter()
    rd = reduce(dataset, cfg.mode, cfg.epsilon)
    m = rd.reduced.n
    size = min(r, m)
    n_combos = math.comb(m, size)
    if n_combos > budget:
        raise BudgetExceededError(
            f"{n_combos} combinations of {size} among {m} reduced points exceeds the budget of {budget}; "
            "use a larger epsilon or raise the budget"
        )
    if cfg.evaluator == "lp":
        ev = _LPEvaluator(dataset)
    else:
        ev = _GridEvaluator(dataset, cfg.k, cfg.resolution)
    cand = rd.reduced.points
    best_val, best_combo = -math.inf, None
    it = itertools.combinations(range(m), size)
    while True:
        batch = np.array(list(itertools.islice(it, 4096)), dtype=np.int64)
        if batch.size == 0:
            break
        vals = ev.combos(cand, batch.reshape(len(batch), size))
        b = int(np.argmax(vals))  # first maximum in lexicographic order
        if vals[b] > best_val:
            best_val, best_combo = float(vals[b]), tuple(int(v) for v in batch[b])
    chosen = list(map_back(Selection(best_combo), rd).indices)
    if len(chosen) < r:
        rest = [i for i in np.lexsort((np.arange(dataset.n), -dataset.points.sum(axis=1))) if i not in set(chosen)]
        chosen += [int(i) for i in rest[: r - len(chosen)]]
    happ, w = ev.happiness(dataset.points[chosen])
    return Selection(
        tuple(chosen),
        {
            "happiness": happ,
            "regret": 1.0 - happ,
            "witness_w": [float(v) for v in w],
            "reduced_happiness": best_val,
            "reduced_size": m,
            "combinations": n_combos,
            "evaluator": cfg.evaluator if cfg.evaluator == "lp" else f"grid(resolution={cfg.resolution})",
            "wall_time_ms": 1000.0 * (time.perf_counter() - t0),
        },
    )
