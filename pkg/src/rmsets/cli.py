"""Command-line entry point: gen, reduce, solve, eval, bench.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .arms2d import average_happiness_2d
from .arms_sampled import sample_linear_utilities
from .bench import PROBLEMS, SCHEMA, UsageError, _jsonable, run_experiment, run_solver, write_report
from .core import Dataset, Selection, normalize_dataset
from .datagen import KINDS, DataFormatError, GenSpec, generate, load_dataset, load_experiment, load_sample, save_dataset
from .evaluation import ahr_sample, khapp_grid, max_regret_lp, simplex_grid
from .krms import BudgetExceededError
from .reduction import reduce, size_bound


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _emit(payload: dict, output: str | None) -> None:
    text = json.dumps(_jsonable({"schema": SCHEMA, **payload}), indent=1)
    if output:
        Path(output).write_text(text + "\n")
    else:
        print(text)


def _load(args) -> Dataset:
    data = load_dataset(args.input)
    return normalize_dataset(data) if args.normalize else data


def _sample_for(args, d: int):
    if args.sample:
        return load_sample(args.sample, d)
    if args.N:
        return sample_linear_utilities(args.N, d, args.seed)
    return None


def cmd_gen(args) -> None:
    data = generate(GenSpec(args.kind, args.n, args.d, args.seed))
    if args.normalize:
        data = normalize_dataset(data)
    if not args.output:
        raise UsageError("gen needs --output")
    save_dataset(data, args.output)
    print(json.dumps({"schema": SCHEMA, "kind": args.kind, "n": data.n, "d": data.dim, "seed": args.seed,
                      "output": args.output}))


def cmd_reduce(args) -> None:
    data = _load(args)
    rd = reduce(data, args.mode, args.epsilon)
    if not args.output:
        raise UsageError("reduce needs --output")
    map_path = args.map or str(Path(args.output).with_suffix(".map.json"))
    rd.save(args.output, map_path)
    image = rd.image_of()
    dominated = bool(np.all(rd.reduced.points[image] <= data.points + 1e-12))
    bound = size_bound(args.mode, data.dim, args.epsilon)
    print(json.dumps({
        "schema": SCHEMA, "mode": args.mode, "epsilon": args.epsilon, "n": data.n, "d": data.dim,
        "reduced_size": rd.reduced.n, "size_bound": bound, "within_bound": rd.reduced.n <= bound,
        "dominance_ok": dominated, "output": args.output, "map": map_path,
    }, indent=1))


def cmd_solve(args) -> None:
    data = _load(args)
    params = {
        "r": args.r, "k": args.k, "epsilon": args.epsilon, "mode": args.mode, "budget": args.budget,
        "evaluator": args.evaluator, "resolution": args.resolution,
    }
    if args.problem == "krms-greedy" and args.epsilon is not None:
        params["reduction"] = {"mode": args.mode or "multiplicative", "epsilon": args.epsilon}
    if args.problem == "arms-sample":
        sample = _sample_for(args, data.dim)
        if sample is None:
            raise UsageError("arms-sample needs --sample FILE or --N")
        params["sample"] = sample
    out = run_solver(data, args.problem, params)
    _emit({"problem": args.problem, "input": args.input, "n": data.n, "d": data.dim, **out.to_dict()}, args.output)


def cmd_eval(args) -> None:
    data = _load(args)
    try:
        idx = [int(v) for v in args.indices.split(",") if v.strip()]
    except ValueError:
        raise UsageError("--indices must be a comma-separated list of row numbers") from None
    sel = Selection(tuple(idx))
    sel.validate(data)
    result: dict = {"indices": idx}
    if args.metric == "mhr":
        if args.k == 1 and args.resolution is None:
            rep = max_regret_lp(data, sel)
            result.update(happiness=rep.happiness, regret=rep.value, witness_w=list(rep.witness.weights),
                          witness_point=rep.witness_point)
        else:
            h = khapp_grid(data, sel, args.k, simplex_grid(data.dim, args.resolution or 100))
            result.update(happiness=h, regret=1.0 - h, k=args.k, resolution=args.resolution or 100)
    elif args.metric == "ahr":
        sample = _sample_for(args, data.dim)
        if sample is None:
            raise UsageError("ahr needs --sample FILE or --N")
        h = ahr_sample(data, sel, sample)
        result.update(happiness=h, regret=1.0 - h)
    else:
        if data.dim != 2:
            raise UsageError("ahr2d needs a 2-dimensional dataset")
        h = average_happiness_2d(data, sel)
        result.update(happiness=h, regret=1.0 - h)
    _emit({"metric": args.metric, **result}, args.output)


def cmd_bench(args) -> None:
    exp = load_experiment(args.input)
    report = run_experiment(exp, jobs=args.jobs)
    json_path = args.output or "report.json"
    csv_path = str(Path(json_path).with_suffix(".csv"))
    write_report(report, json_path, csv_path)
    failed = sum(1 for r in report["records"] if r.get("error"))
    print(json.dumps({"schema": SCHEMA, "records": len(report["records"]), "failed": failed,
                      "json": json_path, "csv": csv_path}))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rmsets", description="Regret-minimizing and happiness-maximizing representative subsets.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, need_input=True):
        sp.add_argument("--input", required=need_input, help="dataset CSV")
        sp.add_argument("--output", help="output path (stdout when omitted)")
        sp.add_argument("--normalize", action="store_true", help="rescale each column so its maximum is 1")
        sp.add_argument("--seed", type=int, default=0)

    g = sub.add_parser("gen", help="generate a synthetic dataset")
    common(g, need_input=False)
    g.add_argument("--kind", choices=KINDS, default="independent")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.set_defaults(func=cmd_gen)

    rd = sub.add_parser("reduce", help="round a dataset down to a small surrogate")
    common(rd)
    rd.add_argument("--mode", choices=("additive", "multiplicative"), required=True)
    rd.add_argument("--epsilon", type=float, required=True)
    rd.add_argument("--map", help="back-map JSON path (default: OUTPUT with .map.json)")
    rd.set_defaults(func=cmd_reduce)

    s = sub.add_parser("solve", help="select r representatives")
    common(s)
    s.add_argument("problem", choices=PROBLEMS)
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--epsilon", type=float, help="reduction / approximation parameter")
    s.add_argument("--mode", choices=("additive", "multiplicative"))
    s.add_argument("--evaluator", choices=("lp", "grid"))
    s.add_argument("--resolution", type=int, help="utility grid resolution for the grid evaluator")
    s.add_argument("--budget", type=int, help="maximum number of combinations for krms-ptas")
    s.add_argument("--sample", help="utility sample CSV (weights, optional prob column)")
    s.add_argument("--N", type=int, help="number of random linear utilities when no --sample is given")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("eval", help="evaluate a given selection")
    common(e)
    e.add_argument("--indices", required=True, help="comma-separated row numbers (0-based)")
    e.add_argument("--metric", choices=("mhr", "ahr", "ahr2d"), default="mhr")
    e.add_argument("--k", type=int, default=1)
    e.add_argument("--resolution", type=int)
    e.add_argument("--sample")
    e.add_argument("--N", type=int)
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", help="run an experiment file")
    b.add_argument("--input", required=True, help="experiment JSON")
    b.add_argument("--output", help="report JSON path; the CSV table goes next to it")
    b.add_argument("--jobs", type=int, default=1, help="worker processes across runs")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (FileNotFoundError, DataFormatError, BudgetExceededError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (UsageError, ValueError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
