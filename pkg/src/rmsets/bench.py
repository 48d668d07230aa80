"""Solver dispatch with independent re-evaluation, and the benchmark runner.

An experiment file looks like::

    {
      "schema": 1,
      "datasets": [{"kind": "independent", "n": 10000, "d": 5, "seed": 1}],
      "solvers": [
        {"problem": "krms-greedy", "r": 50},
        {"problem": "krms-greedy", "r": 50, "reduction": {"mode": "multiplicative", "epsilon": 0.3}}
      ],
      "repetitions": 1,
      "normalize": false
    }

Every (dataset, solver, repetition) triple becomes one record.  Timing covers
reduction plus solving and excludes generation and evaluation, which are
timed separately.
"""

from __future__ import annotations

import csv
import json
import platform
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .arms2d import approx_2d_arms, average_happiness_2d, exact_2d_arms
from .arms_sampled import greedy_ahr, sample_linear_utilities
from .core import Dataset, Selection, normalize_dataset
from .datagen import GenSpec, generate
from .evaluation import FunctionSample, ahr_sample, khapp_grid, max_regret_lp, simplex_grid
from .krms import DEFAULT_BUDGET, PtasConfig, greedy_1rms, ptas_search
from .reduction import map_back, reduce

SCHEMA = 1
PROBLEMS = ("krms-greedy", "krms-ptas", "arms-sample", "arms-2d-exact", "arms-2d-approx")
AGREE_TOL = 1e-9
CSV_FIELDS = (
    "dataset", "kind", "n", "d", "seed", "solver", "problem", "r", "k", "mode", "epsilon", "rep",
    "metric", "happiness", "regret", "claimed_happiness", "reduced_size", "size",
    "reduce_ms", "solve_ms", "evaluate_ms", "wall_time_ms", "error",
)


class UsageError(ValueError):
    """Parameters that do not fit the chosen problem."""


@dataclass
class SolveOutcome:
    selection: Selection
    metric: str  # "MHR" or "AHR"
    claimed: float | None  # happiness as the solver saw it, when it refers to the original data
    evaluated: float
    reduced_size: int | None = None
    timings_ms: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def agrees(self) -> bool | None:
        if self.claimed is None:
            return None
        return abs(self.claimed - self.evaluated) <= AGREE_TOL

    def to_dict(self) -> dict:
        return {
            "indices": list(self.selection.indices),
            "metric": self.metric,
            "happiness": self.evaluated,
            "regret": 1.0 - self.evaluated,
            "claimed_happiness": self.claimed,
            "agrees": self.agrees,
            "reduced_size": self.reduced_size,
            "timings_ms": self.timings_ms,
            "solver_metrics": _jsonable(self.extra),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items() if k != "state"}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _ms(t0: float) -> float:
    return 1000.0 * (time.perf_counter() - t0)


def _need(params: dict, key: str):
    if params.get(key) is None:
        raise UsageError(f"parameter {key!r} is required for this problem")
    return params[key]


def run_solver(dataset: Dataset, problem: str, params: dict) -> SolveOutcome:
    """Run one solver and re-evaluate its selection with the evaluation module.

    ``params`` keys: r, k, epsilon, mode, evaluator, resolution, budget,
    reduction ({mode, epsilon}) and, for arms-sample, sample (FunctionSample)
    or N + sample_seed.
    """
    if problem not in PROBLEMS:
        raise UsageError(f"unknown problem {problem!r}; expected one of {', '.join(PROBLEMS)}")
    r = int(_need(params, "r"))
    if not 1 <= r <= dataset.n:
        raise UsageError(f"r must be in [1, {dataset.n}]")
    k = int(params.get("k") or 1)
    timings: dict[str, float] = {}

    if problem == "krms-greedy":
        if k != 1:
            raise UsageError("krms-greedy handles k = 1 only; use krms-ptas with the grid evaluator")
        red = params.get("reduction")
        reduced_size = None
        if red:
            t0 = time.perf_counter()
            rd = reduce(dataset, red["mode"], float(red["epsilon"]))
            timings["reduce_ms"] = _ms(t0)
            t0 = time.perf_counter()
            inner = greedy_1rms(rd.reduced, r)
            sel = Selection(map_back(inner, rd).indices, inner.metrics)
            timings["solve_ms"] = _ms(t0)
            reduced_size, claimed = rd.reduced.n, None
        else:
            t0 = time.perf_counter()
            sel = greedy_1rms(dataset, r)
            timings["solve_ms"] = _ms(t0)
            claimed = sel.metrics["happiness"]
        t0 = time.perf_counter()
        evaluated = max_regret_lp(dataset, sel).happiness
        timings["evaluate_ms"] = _ms(t0)
        return SolveOutcome(sel, "MHR", claimed, evaluated, reduced_size, timings, sel.metrics)

    if problem == "krms-ptas":
        evaluator = params.get("evaluator") or ("lp" if k == 1 else "grid")
        cfg = PtasConfig(
            float(_need(params, "epsilon")), params.get("mode") or "additive", k, evaluator, params.get("resolution")
        )
        t0 = time.perf_counter()
        sel = ptas_search(dataset, r, cfg, int(params.get("budget") or DEFAULT_BUDGET))
        timings["solve_ms"] = _ms(t0)
        t0 = time.perf_counter()
        if evaluator == "lp":
            evaluated = max_regret_lp(dataset, sel).happiness
        else:
            evaluated = khapp_grid(dataset, sel, k, simplex_grid(dataset.dim, cfg.resolution))
        timings["evaluate_ms"] = _ms(t0)
        return SolveOutcome(
            sel, "MHR", sel.metrics["happiness"], evaluated, sel.metrics["reduced_size"], timings, sel.metrics
        )

    if problem == "arms-sample":
        sample = params.get("sample")
        if sample is None:
            sample = sample_linear_utilities(int(_need(params, "N")), dataset.dim, int(params.get("sample_seed") or 0))
        if not isinstance(sample, FunctionSample):
            raise UsageError("sample must be a FunctionSample")
        if sample.is_linear and sample.weights.shape[1] != dataset.dim:
            raise UsageError("sample dimension does not match the dataset")
        t0 = time.perf_counter()
        sel = greedy_ahr(dataset, r, sample)
        timings["solve_ms"] = _ms(t0)
        t0 = time.perf_counter()
        evaluated = ahr_sample(dataset, sel, sample)
        timings["evaluate_ms"] = _ms(t0)
        return SolveOutcome(sel, "AHR", sel.metrics["ahr"], evaluated, None, timings, sel.metrics)

    # the two planar solvers
    if dataset.dim != 2:
        raise UsageError(f"{problem} needs a 2-dimensional dataset, got d = {dataset.dim}")
    t0 = time.perf_counter()
    if problem == "arms-2d-exact":
        sel = exact_2d_arms(dataset, r)
        claimed = sel.metrics["ahr"]
    else:
        sel = approx_2d_arms(dataset, r, float(_need(params, "epsilon")))
        claimed = sel.metrics["ahr"]
    timings["solve_ms"] = _ms(t0)
    t0 = time.perf_counter()
    evaluated = average_happiness_2d(dataset, sel)
    timings["evaluate_ms"] = _ms(t0)
    return SolveOutcome(sel, "AHR", claimed, evaluated, sel.metrics.get("candidates"), timings, sel.metrics)


# -- experiments -------------------------------------------------------------

def _solver_label(s: dict) -> str:
    label = s.get("label")
    if label:
        return label
    red = s.get("reduction")
    suffix = f"+{red['mode']}({red['epsilon']})" if red else ""
    return s["problem"] + suffix


def _record(spec: GenSpec, ds_index: int, solver: dict, rep: int, normalize: bool) -> dict:
    red = solver.get("reduction") or {}
    rec = {
        "dataset": ds_index, "kind": spec.kind, "n": spec.n, "d": spec.d, "seed": spec.seed,
        "solver": _solver_label(solver), "problem": solver.get("problem"), "r": solver.get("r"),
        "k": solver.get("k", 1), "mode": red.get("mode", solver.get("mode")),
        "epsilon": red.get("epsilon", solver.get("epsilon")), "rep": rep,
    }
    try:
        data = generate(spec)
        if normalize:
            data = normalize_dataset(data)
        params = {k: v for k, v in solver.items() if k not in ("problem", "label")}
        out = run_solver(data, solver["problem"], params)
        t = out.timings_ms
        rec.update(
            metric=out.metric, happiness=out.evaluated, regret=1.0 - out.evaluated,
            claimed_happiness=out.claimed, reduced_size=out.reduced_size, size=len(out.selection),
            reduce_ms=t.get("reduce_ms", 0.0), solve_ms=t.get("solve_ms", 0.0),
            evaluate_ms=t.get("evaluate_ms", 0.0),
            wall_time_ms=t.get("reduce_ms", 0.0) + t.get("solve_ms", 0.0),
            indices=list(out.selection.indices), error=None,
        )
    except Exception as e:  # a failed run is recorded, the experiment goes on
        rec.update(error=f"{type(e).__name__}: {e}", traceback=traceback.format_exc(limit=3))
    return rec


def run_experiment(exp: dict, jobs: int = 1) -> dict:
    """Run the cross product of datasets x solvers x repetitions.

    With ``jobs > 1`` whole runs are spread over worker processes; a single
    run is never split, so its timings stay meaningful.
    """
    specs = [g if isinstance(g, GenSpec) else GenSpec(**g) for g in exp.get("datasets", [])]
    solvers = list(exp.get("solvers", []))
    reps = int(exp.get("repetitions", 1))
    if reps < 1:
        raise UsageError("repetitions must be >= 1")
    for s in solvers:
        if s.get("problem") not in PROBLEMS:
            raise UsageError(f"unknown problem {s.get('problem')!r}")
    normalize = bool(exp.get("normalize", False))
    tasks = [(spec, i, s, rep, normalize) for i, spec in enumerate(specs) for s in solvers for rep in range(reps)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_record, *zip(*tasks)))
    else:
        records = [_record(*t) for t in tasks]
    return {
        "schema": SCHEMA,
        "config": {
            "datasets": [s.to_dict() for s in specs],
            "solvers": solvers,
            "repetitions": reps,
            "normalize": normalize,
        },
        "environment": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "machine": platform.machine(),
            "note": "timings are wall-clock on this machine; compare shapes, not absolute values",
        },
        "records": records,
    }


def write_report(report: dict, json_path, csv_path=None) -> None:
    Path(json_path).write_text(json.dumps(_jsonable(report), indent=1))
    if csv_path is not None:
        with Path(csv_path).open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, extrasaction="ignore")
            w.writeheader()
            for rec in report["records"]:
                w.writerow({k: rec.get(k) for k in CSV_FIELDS})
