"""Seeded experiment execution, per-trial seed derivation, and CSV output.

Per-trial seeds are derived from the master seed through a counter-based
mixing function, so scheduling (sequential or a worker pool) can never
change a trial's stream. Given one config, every column of the result CSV
except the wall-clock timing is reproducible byte for byte.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from random import Random

from . import counter_graph, rules
from .graphs import Digraph, Policy, bfs_tree_policy, load_graph_json


class BadConfigError(Exception):
    """The experiment configuration is unusable."""


_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One step of the splitmix64 mixer; full 64-bit avalanche."""
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, trial: int) -> int:
    """Trial seed = splitmix64(master xor (trial+1)*golden); order free."""
    return splitmix64((master ^ ((trial + 1) * _GOLDEN)) & _MASK64)


RULE_NAMES = (
    "random-facet",
    "random-facet-nonrec",
    "random-facet-1p",
    "bland",
    "random-bland",
    "dantzig",
)


def run_rule(
    rule: str, g: Digraph, start: Policy, seed: int
) -> rules.RunResult:
    """One seeded run of a named rule from the given start policy."""
    rng = Random(seed)
    if rule == "random-facet":
        return rules.random_facet(g, start, rng, seed=seed)
    if rule == "random-facet-nonrec":
        return rules.random_facet_nonrec(g, start, rng, seed=seed)
    if rule == "random-facet-1p":
        sigma = rules.random_permutation_fn(g.n_edges, rng)
        return rules.random_facet_one_perm(g, start, sigma, seed=seed)
    if rule == "bland":
        # classic lowest-edge-id scan: the highest permutation rank goes to
        # the lowest id
        sigma = [g.n_edges - e for e in range(g.n_edges)]
        return rules.bland_nonrec(g, start, sigma, seed=seed)
    if rule == "random-bland":
        return rules.random_bland(g, start, rng, seed=seed)
    if rule == "dantzig":
        return rules.dantzig(g, start, seed=seed)
    raise BadConfigError(f"unknown rule {rule!r}")


@dataclass
class ExperimentConfig:
    rule: str
    trials: int
    seed: int
    graph_path: str | None = None
    gen_params: tuple[int, int, int, int] | None = None  # (n, r, s, t)
    start: str = "auto"  # auto | zero | bfs
    out_path: str | None = None
    threads: int = 1
    trace_path: str | None = None

    def validate(self) -> None:
        if self.rule not in RULE_NAMES:
            raise BadConfigError(f"unknown rule {self.rule!r}")
        if self.trials < 1:
            raise BadConfigError("trials must be at least 1")
        if (self.graph_path is None) == (self.gen_params is None):
            raise BadConfigError("need exactly one of graph_path or gen_params")
        if self.start not in ("auto", "zero", "bfs"):
            raise BadConfigError(f"unknown start policy {self.start!r}")


@dataclass
class ResultRecord:
    trial: int
    seed: int
    rule: str
    pivots: int
    wall_ns: int
    outcome: str | None = None
    detail: str | None = None


def sidecar_index_path(graph_path: str) -> str:
    if graph_path.endswith(".json"):
        return graph_path[:-5] + ".index.json"
    return graph_path + ".index.json"


def load_instance(config: ExperimentConfig):
    """The graph, its counter-graph index when available, and the start
    policy. Graph files written by `gen` carry a sidecar index, which makes
    the zero-edge start available for them too."""
    import json
    import os

    idx = None
    if config.gen_params is not None:
        g, idx = counter_graph.build_counter_graph(*config.gen_params)
    else:
        g = load_graph_json(config.graph_path)
        sidecar = sidecar_index_path(config.graph_path)
        if os.path.exists(sidecar):
            with open(sidecar) as fh:
                p = json.load(fh)["params"]
            _, idx = counter_graph.build_counter_graph(p["n"], p["r"], p["s"], p["t"])
            if idx.n_edges != g.n_edges:
                idx = None
    start_mode = config.start
    if start_mode == "auto":
        start_mode = "zero" if idx is not None else "bfs"
    if start_mode == "zero":
        if idx is None:
            raise BadConfigError(
                "zero start needs counter-graph parameters or a sidecar index"
            )
        start = counter_graph.initial_tree(idx)
    else:
        start = bfs_tree_policy(g)
    return g, idx, start


def _one_trial(args) -> ResultRecord:
    rule, g, start, trial, master = args
    seed = derive_seed(master, trial)
    t0 = time.perf_counter_ns()
    res = run_rule(rule, g, start, seed)
    wall = time.perf_counter_ns() - t0
    return ResultRecord(trial=trial, seed=seed, rule=rule, pivots=res.pivots,
                        wall_ns=wall)


def run_trials(
    g: Digraph,
    start: Policy,
    rule: str,
    trials: int,
    master_seed: int,
    threads: int = 1,
) -> list[ResultRecord]:
    """Independent seeded trials; results come back in trial order whatever
    the scheduling."""
    jobs = [(rule, g, start, t, master_seed) for t in range(trials)]
    if threads <= 1:
        return [_one_trial(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_one_trial, jobs, chunksize=max(1, trials // (4 * threads))))


CSV_FIELDS = ("trial", "seed", "rule", "pivots", "wall_ns")


def write_csv(records: list[ResultRecord], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for r in records:
            writer.writerow([r.trial, r.seed, r.rule, r.pivots, r.wall_ns])


@dataclass
class Summary:
    trials: int
    mean: float
    stderr: float
    minimum: int
    maximum: int


def summarize(pivot_counts: list[int]) -> Summary:
    n = len(pivot_counts)
    mean = sum(pivot_counts) / n
    var = (
        sum((x - mean) ** 2 for x in pivot_counts) / (n - 1) if n > 1 else 0.0
    )
    return Summary(
        trials=n,
        mean=mean,
        stderr=math.sqrt(var / n) if n > 1 else 0.0,
        minimum=min(pivot_counts),
        maximum=max(pivot_counts),
    )


def write_trace(config: ExperimentConfig, g: Digraph, start: Policy) -> None:
    """Dump trial 0's pivot log (plus the recursion tree for the facet rule)
    as JSON at config.trace_path."""
    import json

    from . import comptrees, rules as _rules

    trial_seed = derive_seed(config.seed, 0)
    doc: dict = {"rule": config.rule, "seed": trial_seed}
    if config.rule == "random-facet":
        run = _rules.random_facet(g, start, Random(trial_seed), trace=True)
        tree = comptrees.record_tree(run)
        doc["tree"] = {
            "picked": tree.picked,
            "left": tree.left,
            "right": tree.right,
            "leaving": tree.leaving,
        }
    else:
        # only the facet recursion defines a computation tree
        run = run_rule(config.rule, g, start, trial_seed)
    doc["pivot_log"] = run.pivot_log
    with open(config.trace_path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def run_experiment(config: ExperimentConfig) -> tuple[list[ResultRecord], Summary]:
    """Execute the configured trials, optionally writing CSV and trace files."""
    config.validate()
    g, _idx, start = load_instance(config)
    records = run_trials(
        g, start, config.rule, config.trials, config.seed, config.threads
    )
    if config.out_path:
        write_csv(records, config.out_path)
    if config.trace_path:
        write_trace(config, g, start)
    return records, summarize([r.pivots for r in records])
