"""Command-line interface: gen, run, counter, analyze, verify.

Exit codes: 0 on success, 1 on verification failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from random import Random

from . import checks, comptrees, counter_graph, counters
from .experiments import ExperimentConfig, derive_seed, run_experiment
from .graphs import load_graph_json, save_graph_json


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    p.add_argument("--out", type=str, default=None, help="output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pivotlab",
        description="Randomized simplex pivoting rules on shortest-path instances",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a counter graph")
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--r", type=int, required=True)
    p_gen.add_argument("--s", type=int, required=True)
    p_gen.add_argument("--t", type=int, required=True)
    _add_common(p_gen)

    p_run = sub.add_parser("run", help="run pivot-rule trials")
    p_run.add_argument(
        "--rule", required=True,
        choices=["random-facet", "random-facet-nonrec", "random-facet-1p",
                 "bland", "random-bland", "dantzig"],
    )
    p_run.add_argument("--graph", type=str, default=None, help="graph JSON file")
    p_run.add_argument("--n", type=int, default=None)
    p_run.add_argument("--r", type=int, default=None)
    p_run.add_argument("--s", type=int, default=None)
    p_run.add_argument("--t", type=int, default=None)
    p_run.add_argument("--trials", type=int, default=1)
    p_run.add_argument("--start", choices=["auto", "zero", "bfs"], default="auto")
    p_run.add_argument("--trace", type=str, default=None,
                       help="dump pivot log and computation tree JSON here")
    _add_common(p_run)

    p_counter = sub.add_parser("counter", help="randomized counter experiments")
    p_counter.add_argument("--variant", choices=["fresh", "one-perm"],
                           default="fresh")
    p_counter.add_argument("--n", type=int, required=True)
    p_counter.add_argument("--trials", type=int, default=1000)
    p_counter.add_argument("--exact", action="store_true",
                           help="print the exact expectation and exit")
    _add_common(p_counter)

    p_analyze = sub.add_parser("analyze", help="canonical-path event frequencies")
    p_analyze.add_argument("--graph", type=str, required=True)
    p_analyze.add_argument("--index", type=str, default=None,
                           help="sidecar index JSON (default: <graph>.index.json)")
    p_analyze.add_argument("--S", type=str, required=True,
                           help="comma-separated bit levels, e.g. 3,1")
    p_analyze.add_argument("--trials", type=int, default=100)
    _add_common(p_analyze)

    p_verify = sub.add_parser("verify", help="run a named verification check")
    p_verify.add_argument("check", choices=sorted(checks.CHECKS))
    p_verify.add_argument("--params", type=str, default=None,
                          help="JSON object of keyword overrides")
    _add_common(p_verify)
    return parser


def cmd_gen(args) -> int:
    g, idx = counter_graph.build_counter_graph(args.n, args.r, args.s, args.t)
    out = args.out or f"counter_{args.n}_{args.r}_{args.s}_{args.t}.json"
    save_graph_json(g, out)
    sidecar = out + ".index.json" if not out.endswith(".json") else out[:-5] + ".index.json"
    with open(sidecar, "w") as fh:
        json.dump(counter_graph.index_to_json_dict(idx), fh, indent=1)
        fh.write("\n")
    print(f"wrote {out} ({g.n_vertices} vertices, {g.n_edges} edges) and {sidecar}")
    return 0


def cmd_run(args) -> int:
    gen = None
    if args.graph is None:
        if None in (args.n, args.r, args.s, args.t):
            print("run: need --graph or all of --n/--r/--s/--t", file=sys.stderr)
            return 2
        gen = (args.n, args.r, args.s, args.t)
    config = ExperimentConfig(
        rule=args.rule,
        trials=args.trials,
        seed=args.seed,
        graph_path=args.graph,
        gen_params=gen,
        start=args.start,
        out_path=args.out,
        threads=args.threads,
        trace_path=args.trace,
    )
    records, summary = run_experiment(config)
    print(
        f"rule={args.rule} trials={summary.trials} mean={summary.mean:.3f} "
        f"stderr={summary.stderr:.3f} min={summary.minimum} max={summary.maximum}"
    )
    if args.trace:
        print(f"wrote trace of trial 0 to {args.trace}")
    return 0


def cmd_counter(args) -> int:
    if args.exact:
        f = counters.expected_increments(args.n)
        print(f"{f.numerator}/{f.denominator}")
        return 0
    values = []
    for trial in range(args.trials):
        trng = Random(derive_seed(args.seed, trial))
        if args.variant == "fresh":
            values.append(counters.rand_count(range(1, args.n + 1), trng))
        else:
            prio = list(range(1, args.n + 1))
            trng.shuffle(prio)
            values.append(
                counters.rand_count_one_perm(range(1, args.n + 1), [0] + prio)
            )
    mean = sum(values) / len(values)
    exact = counters.expected_increments(args.n)
    print(
        f"variant={args.variant} n={args.n} trials={args.trials} "
        f"mean={mean:.4f} exact={float(exact):.4f}"
    )
    return 0


def _load_index(path: str) -> counter_graph.CounterGraphIndex:
    with open(path) as fh:
        doc = json.load(fh)
    p = doc["params"]
    _, idx = counter_graph.build_counter_graph(p["n"], p["r"], p["s"], p["t"])
    return idx


def cmd_analyze(args) -> int:
    g = load_graph_json(args.graph)
    index_path = args.index or (
        args.graph[:-5] + ".index.json" if args.graph.endswith(".json")
        else args.graph + ".index.json"
    )
    idx = _load_index(index_path)
    if idx.n_edges != g.n_edges:
        print("analyze: index does not match the graph", file=sys.stderr)
        return 2
    levels = [int(x) for x in args.S.split(",") if x]
    rows = []
    counts: dict[str, int] = {}
    for trial in range(args.trials):
        rng = Random(derive_seed(args.seed, trial))
        out = comptrees.follow_canonical(g, idx, levels, rng)
        counts[out.kind] = counts.get(out.kind, 0) + 1
        rows.append((trial, derive_seed(args.seed, trial), out.kind,
                     "" if out.detail is None else str(out.detail),
                     len(out.path)))
    if args.out:
        import csv

        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trial", "seed", "outcome", "detail", "path_len"])
            w.writerows(rows)
    canon = counts.get(comptrees.CANONICAL, 0)
    low, high = comptrees.wilson_interval(canon, args.trials)
    print(f"S={levels} trials={args.trials} counts={counts}")
    print(f"canonical frequency {canon / args.trials:.4f} "
          f"(wilson [{low:.4f}, {high:.4f}])")
    return 0


def cmd_verify(args) -> int:
    params = json.loads(args.params) if args.params else {}
    try:
        report = checks.run_check(args.check, **params)
    except checks.UnknownCheckError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    text = json.dumps(report, indent=1, default=str)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0 if report["passed"] else 1


def main(argv=None) -> int:
    from .experiments import BadConfigError

    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "gen": cmd_gen,
        "run": cmd_run,
        "counter": cmd_counter,
        "analyze": cmd_analyze,
        "verify": cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except BadConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
