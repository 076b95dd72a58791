"""Named verification checks binding the library's testable claims.

Each check returns a JSON-ready report dict: {"check", "params", "passed",
"details"}. Defaults match the acceptance scale; tests may pass smaller
parameters. The registry backs the `verify` CLI subcommand.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from fractions import Fraction
from math import factorial
from random import Random

import numpy as np

from . import comptrees, counter_graph, counters, lp, rules
from .graphs import (
    Digraph,
    Policy,
    improving_switches,
    optimal_edge_set,
    random_dag,
    random_policy,
    tree_distances_list,
)


class UnknownCheckError(Exception):
    """No check registered under the requested id."""


# ---------------------------------------------------------------------------
# counters


def check_recurrence(n_max: int = 200) -> dict:
    """Closed form equals the recurrence, exactly, for all n up to n_max."""
    bad = [
        n for n in range(n_max + 1)
        if counters.expected_increments(n) != counters.expected_increments_recurrence(n)
    ]
    return _report("recurrence", {"n_max": n_max}, not bad, {"mismatches": bad})


def check_counters_equality(n_max: int = 8) -> dict:
    """Mean of the one-permutation count over all n! orders equals the
    fresh-randomness expectation, exactly."""
    details = {}
    ok = True
    for n in range(n_max + 1):
        mean = counters.one_perm_mean_over_permutations(n)
        exact = counters.expected_increments(n)
        details[n] = str(mean)
        if mean != exact:
            ok = False
    return _report("counters-equality", {"n_max": n_max}, ok, details)


# ---------------------------------------------------------------------------
# counter-graph structure


def _varied_functional_subset(idx, rng) -> frozenset[int]:
    """Functional subsets spanning all four optimal-edge cases: random
    drops, plus forced b-chain gaps and disabled a levels."""
    drop = (0.05, 0.2, 0.4, 0.6)[rng.randrange(4)]
    sub = set(counter_graph.random_functional_subset(idx, rng, drop))
    if rng.random() < 0.5:
        i = rng.randrange(idx.n) + 1
        sub.discard(idx.b1(i)[rng.randrange(len(idx.b1(i)))])
    if rng.random() < 0.5:
        i = rng.randrange(idx.n) + 1
        sub.update(idx.b1(i))
        for j in range(1, idx.r + 1):
            chunk = idx.a1(i, j)
            sub.discard(chunk[rng.randrange(len(chunk))])
    return frozenset(sub)


def check_bf_optimal(
    n_range=(1, 2, 3, 4),
    r_range=(1, 2, 3),
    s_range=(1, 2, 3),
    t_range=(1, 2, 3),
    samples: int = 100,
    seed: int = 20240,
) -> dict:
    """The case-split optimal-edge family equals the subgraph's true optimal
    edge set for random functional subsets, exact set equality."""
    rng = Random(seed)
    mismatches = []
    combos = 0
    for n, r, s, t in itertools.product(n_range, r_range, s_range, t_range):
        g, idx = counter_graph.build_counter_graph(n, r, s, t)
        combos += 1
        for k in range(samples):
            sub = _varied_functional_subset(idx, rng)
            predicted = counter_graph.bf_edge_set(idx, sub)
            actual = optimal_edge_set(g, sub)
            if predicted != frozenset(actual):
                mismatches.append({"params": (n, r, s, t), "sample": k})
    return _report(
        "bf-optimal",
        {"combos": combos, "samples": samples, "seed": seed},
        not mismatches,
        {"mismatches": mismatches[:5], "total_mismatches": len(mismatches)},
    )


def _force_reset_at_most(idx, sub: set, i: int) -> None:
    # levels above i must not qualify as the reset level
    for i2 in range(i + 1, idx.n + 1):
        if all(e in sub for e in idx.b1(i2)):
            if not any(
                all(e in sub for e in idx.a1(i2, j)) for j in range(1, idx.r + 1)
            ):
                sub.update(idx.a1(i2, 1))


def check_make_switch(samples: int = 500, seed: int = 20241) -> dict:
    """Re-adding the lowest missing chain edge is an improving switch for
    every tree inside the subgraph's optimal family (both chain kinds)."""
    rng = Random(seed)
    combos = [(1, 1, 2, 1), (2, 2, 2, 2), (3, 2, 2, 2), (2, 3, 2, 3), (4, 2, 3, 2)]
    built = [counter_graph.build_counter_graph(*c) for c in combos]
    violations = []
    checked = 0
    for k in range(samples):
        g, idx = built[k % len(built)]
        part_b = k % 2 == 0
        i = rng.randrange(idx.n) + 1
        sub = set(counter_graph.random_functional_subset(idx, rng, drop=0.3))
        if part_b:
            chain = idx.b1(i)
            j = rng.randrange(len(chain)) + 1
            e = chain[j - 1]
            sub.discard(e)
            sub.update(chain[j:])
        else:
            j = rng.randrange(idx.r) + 1
            chain = idx.a1(i, j)
            kk = rng.randrange(len(chain)) + 1
            e = chain[kk - 1]
            sub.discard(e)
            sub.update(chain[kk:])
            sub.update(idx.b1(i))  # the second case needs the b chain intact
        _force_reset_at_most(idx, sub, i)
        assert counter_graph.reset_level(idx, sub) <= i
        checked += 1
        fam = counter_graph.bf_edge_set(idx, frozenset(sub))
        tree = counter_graph.random_tree_within(g, fam, rng)
        if e not in improving_switches(g, tree, sub | {e}):
            violations.append({"sample": k, "edge": g.edge_names[e]})
    return _report(
        "make-switch",
        {"samples": samples, "seed": seed},
        bool(checked == samples and not violations),
        {"checked": checked, "violations": violations[:5],
         "total_violations": len(violations)},
    )


# ---------------------------------------------------------------------------
# rule equivalences


def check_bland_equiv(
    dag_instances: int = 100,
    counter_sigmas: int = 20,
    seed: int = 20242,
) -> dict:
    """Recursive and scanning fixed-permutation runs produce element-wise
    identical pivot logs."""
    rng = Random(seed)
    mismatches = 0
    total = 0
    for _ in range(dag_instances):
        g = random_dag(rng, rng.randrange(4, 12), extra_edges=rng.randrange(2, 12))
        start = random_policy(g, rng)
        sigma = rules.random_permutation_fn(g.n_edges, rng)
        total += 1
        rec = rules.bland_rec(g, start, sigma)
        non = rules.bland_nonrec(g, start, sigma)
        if rec.pivot_log != non.pivot_log:
            mismatches += 1
    g, idx = counter_graph.build_counter_graph(2, 2, 2, 2)
    start = counter_graph.initial_tree(idx)
    for _ in range(counter_sigmas):
        sigma = rules.random_permutation_fn(g.n_edges, rng)
        total += 1
        rec = rules.bland_rec(g, start, sigma)
        non = rules.bland_nonrec(g, start, sigma)
        if rec.pivot_log != non.pivot_log:
            mismatches += 1
    return _report(
        "bland-equiv",
        {"dag_instances": dag_instances, "counter_sigmas": counter_sigmas, "seed": seed},
        mismatches == 0,
        {"compared": total, "mismatches": mismatches},
    )


def expected_pivots_recursive(g: Digraph, start: Policy) -> Fraction:
    """Exact expected pivot count of the recursive facet rule by exhaustive
    enumeration of every random choice, with the full distribution over
    returned trees threaded through the recursion."""
    dist_cache: dict[tuple, list[int]] = {}

    def dists(chosen: tuple) -> list[int]:
        if chosen not in dist_cache:
            dist_cache[chosen] = tree_distances_list(g, chosen)
        return dist_cache[chosen]

    def improving(e: int, chosen: tuple) -> bool:
        d = dists(chosen)
        return g.costs[e] + d[g.heads[e]] < d[g.tails[e]]

    memo: dict[tuple, tuple[Fraction, dict]] = {}

    def go(f_set: frozenset, chosen: tuple) -> tuple[Fraction, dict]:
        key = (f_set, chosen)
        if key in memo:
            return memo[key]
        cands = sorted(e for e in f_set if chosen[g.tails[e]] != e)
        if not cands:
            memo[key] = (Fraction(0), {chosen: Fraction(1)})
            return memo[key]
        exp_total = Fraction(0)
        dist_total: dict = defaultdict(Fraction)
        for e in cands:
            exp_left, dist_left = go(f_set - {e}, chosen)
            exp_e = exp_left
            for ret, p in dist_left.items():
                if improving(e, ret):
                    switched = list(ret)
                    switched[g.tails[e]] = e
                    exp_right, dist_right = go(f_set, tuple(switched))
                    exp_e += p * (1 + exp_right)
                    for ret2, p2 in dist_right.items():
                        dist_total[ret2] += p * p2
                else:
                    dist_total[ret] += p
            exp_total += exp_e
        k = len(cands)
        memo[key] = (
            exp_total / k,
            {ret: p / k for ret, p in dist_total.items()},
        )
        return memo[key]

    exp, _ = go(frozenset(range(g.n_edges)), tuple(start.chosen))
    return exp


def expected_pivots_nonrec(g: Digraph, start: Policy) -> Fraction:
    """Exact expected pivot count of the permutation-maintaining facet rule.

    States carry the scan structure: an ordered run of uniformly shuffled
    blocks followed by a fixed tail. A pivot merges everything scanned
    before the entering edge (plus the leaving edge) into one reshuffled
    block and leaves the unscanned order alone, which is exactly the
    prefix-reshuffle the rule performs.
    """
    dist_cache: dict[tuple, list[int]] = {}

    def dists(chosen: tuple) -> list[int]:
        if chosen not in dist_cache:
            dist_cache[chosen] = tree_distances_list(g, chosen)
        return dist_cache[chosen]

    def improving(e: int, chosen: tuple) -> bool:
        d = dists(chosen)
        return g.costs[e] + d[g.heads[e]] < d[g.tails[e]]

    memo: dict[tuple, Fraction] = {}

    def pivot(chosen: tuple, e: int) -> tuple[tuple, int]:
        switched = list(chosen)
        leaving = switched[g.tails[e]]
        switched[g.tails[e]] = e
        return tuple(switched), leaving

    def go(blocks: tuple, tail: tuple, chosen: tuple) -> Fraction:
        key = (blocks, tail, chosen)
        if key in memo:
            return memo[key]
        for bi, blk in enumerate(blocks):
            imp = sorted(e for e in blk if improving(e, chosen))
            if not imp:
                continue
            non = sorted(e for e in blk if not improving(e, chosen))
            earlier: set = set().union(*blocks[:bi]) if bi else set()
            b_len = len(blk)
            total = Fraction(0)
            for e in imp:
                switched, leaving = pivot(chosen, e)
                for a_sz in range(len(non) + 1):
                    weight = Fraction(
                        factorial(a_sz) * factorial(b_len - a_sz - 1),
                        factorial(b_len),
                    )
                    for a_set in itertools.combinations(non, a_sz):
                        prefix = earlier | set(a_set) | {leaving}
                        rest = blk - {e} - set(a_set)
                        new_blocks = (frozenset(prefix),)
                        if rest:
                            new_blocks += (frozenset(rest),)
                        new_blocks += blocks[bi + 1:]
                        total += weight * (
                            1 + go(new_blocks, tail, switched)
                        )
            memo[key] = total
            return total
        for pos, e in enumerate(tail):
            if improving(e, chosen):
                switched, leaving = pivot(chosen, e)
                prefix = set().union(*blocks) if blocks else set()
                prefix |= set(tail[:pos]) | {leaving}
                result = 1 + go((frozenset(prefix),), tail[pos + 1:], switched)
                memo[key] = result
                return result
        memo[key] = Fraction(0)
        return Fraction(0)

    nontree = frozenset(
        e for e in range(g.n_edges) if start.chosen[g.tails[e]] != e
    )
    return go((nontree,), (), tuple(start.chosen))


def check_rf_equiv(seed: int = 20243, sizes=(3, 3, 3, 3, 3, 3, 3, 4, 4, 4,
                                             4, 4, 4, 5, 5, 5, 5, 6, 6, 7)) -> dict:
    """Recursive and non-recursive facet rules have exactly equal expected
    pivot counts on random acyclic instances, by exhaustive enumeration."""
    rng = Random(seed)
    mismatches = []
    values = []
    for k, nontree in enumerate(sizes):
        v = rng.randrange(3, 6)
        # the backbone contributes one edge per vertex, so extra_edges is
        # exactly the non-tree edge count; small costs create ties and
        # with them genuinely random pivot sequences
        g = random_dag(rng, v, extra_edges=nontree, max_cost=6)
        chosen = [
            max(g.out_edges[u], key=lambda e: (g.costs[e], e))
            if u != g.target else None
            for u in range(g.n_vertices)
        ]
        start = Policy(tuple(chosen))
        rec = expected_pivots_recursive(g, start)
        non = expected_pivots_nonrec(g, start)
        values.append(str(rec))
        if rec != non:
            mismatches.append({"instance": k, "rec": str(rec), "nonrec": str(non)})
    return _report(
        "rf-equiv",
        {"seed": seed, "instances": len(sizes), "max_nontree": max(sizes)},
        not mismatches,
        {"mismatches": mismatches, "expected_values": values[:5]},
    )


def check_lp_correspondence(instances: int = 20, seed: int = 20244) -> dict:
    """Seeded facet runs on the graph engine and on the flow LP pivot in
    lockstep, with duals equal to tree distances and the reduced-cost
    formula holding at every step."""
    rng = Random(seed)
    problems = []
    for k in range(instances):
        run_seed = rng.randrange(2**32)
        g = random_dag(rng, rng.randrange(3, 9), extra_edges=rng.randrange(2, 10))
        start = random_policy(g, rng)
        graph_run = rules.random_facet(g, start, Random(run_seed), trace=True)
        the_lp, row_of, _ = lp.sp_to_lp(g)
        basis, log = lp.random_facet_lp(
            the_lp, range(g.n_edges), lp.tree_basis(g, start), Random(run_seed)
        )
        if log != graph_run.pivot_log:
            problems.append({"instance": k, "kind": "pivot-log"})
            continue
        # replay and verify duals plus reduced costs after every pivot
        pol = start
        cur = list(lp.tree_basis(g, start))
        steps = [(None, None)] + log
        for entering, _leaving in steps:
            if entering is not None:
                u = g.tails[entering]
                old = pol.chosen[u]
                pol = Policy(
                    tuple(entering if v == u else c for v, c in enumerate(pol.chosen))
                )
                cur[cur.index(old)] = entering
            cbar, y = lp.reduced_costs(the_lp, cur)
            dist = tree_distances_list(g, pol.chosen)
            for v in range(g.n_vertices):
                if v != g.target and y[row_of[v]] != dist[v]:
                    problems.append({"instance": k, "kind": "dual"})
                    break
            else:
                for e in range(g.n_edges):
                    yh = 0 if g.heads[e] == g.target else y[row_of[g.heads[e]]]
                    if cbar[e] != g.costs[e] + yh - y[row_of[g.tails[e]]]:
                        problems.append({"instance": k, "kind": "reduced-cost"})
                        break
                else:
                    continue
            break
    return _report(
        "lp-correspondence",
        {"instances": instances, "seed": seed},
        not problems,
        {"problems": problems},
    )


# ---------------------------------------------------------------------------
# lower-bound inequalities


def _counter_bound(idx, sigma) -> int:
    sigma_hat = rules.induced_permutation(idx, sigma)
    return counters.rand_count_one_perm(range(1, idx.n + 1), sigma_hat)


def check_technical_star(
    ns=(3, 4, 5, 6),
    rst=(2, 3),
    samples: int = 200,
    seed: int = 20245,
) -> dict:
    """One-permutation facet runs from the zero start perform at least the
    one-permutation counter's increments, per well-behaved permutation."""
    return _lower_bound_check("technical-star", ns, rst, samples, seed, star=True)


def check_technical_bland(
    ns=(3, 4, 5, 6),
    rst=(2, 3),
    samples: int = 200,
    seed: int = 20246,
) -> dict:
    """Fixed-permutation scanning runs obey the same counter lower bound."""
    return _lower_bound_check("technical-bland", ns, rst, samples, seed, star=False)


def _lower_bound_check(name, ns, rst, samples, seed, star: bool) -> dict:
    rng = Random(seed)
    violations = []
    checked = 0
    for n in ns:
        for v in rst:
            g, idx = counter_graph.build_counter_graph(n, v, v, v)
            start = counter_graph.initial_tree(idx)
            for k in range(samples):
                sigma = rules.sample_well_behaved(idx, rng)
                bound = _counter_bound(idx, sigma)
                if star:
                    run = rules.random_facet_one_perm(g, start, sigma)
                else:
                    run = rules.bland_nonrec(g, start, sigma)
                checked += 1
                if run.pivots < bound:
                    violations.append(
                        {"n": n, "rst": v, "sample": k,
                         "pivots": run.pivots, "bound": bound}
                    )
    return _report(
        name,
        {"ns": list(ns), "rst": list(rst), "samples": samples, "seed": seed},
        not violations,
        {"checked": checked, "violations": violations[:5],
         "total_violations": len(violations)},
    )


def well_behaved_frequency(
    n: int, r: int, s: int, t: int, trials: int, seed: int
) -> float:
    """Vectorized empirical frequency of well-behaved uniform permutations."""
    _, idx = counter_graph.build_counter_graph(n, r, s, t)
    b1 = np.array([idx.b1(i) for i in idx.levels()])
    a1 = np.array(
        [idx.a1(i, j) for i in idx.levels() for j in range(1, r + 1)]
    )
    multi = np.array(idx.multi_edges)
    gen = np.random.default_rng(seed)
    good = 0
    for _ in range(trials):
        ranks = gen.permutation(idx.n_edges)
        chunk_min = ranks[a1].min(axis=1)
        level_a = chunk_min.reshape(n, r).max(axis=1)
        level_b = ranks[b1].min(axis=1)
        if (level_b < level_a).all() and chunk_min.max() < ranks[multi].max(axis=1).min():
            good += 1
    return good / trials


def check_well_behaved_prob(
    n: int = 8, rst: int = 9, trials: int = 10000, seed: int = 20247
) -> dict:
    """Empirical well-behaved frequency at the prescribed chain lengths is
    at least one half, up to three standard errors."""
    freq = well_behaved_frequency(n, rst, rst, rst, trials, seed)
    stderr = (freq * (1 - freq) / trials) ** 0.5
    passed = freq >= 0.5 - 3 * stderr
    return _report(
        "well-behaved-prob",
        {"n": n, "rst": rst, "trials": trials, "seed": seed},
        passed,
        {"frequency": freq, "stderr": stderr, "threshold": 0.5 - 3 * stderr},
    )


def check_switch_identity(
    counter_runs: int = 30, dag_runs: int = 20, seed: int = 20248
) -> dict:
    """Right-child count of every traced computation tree equals the run's
    pivot count."""
    rng = Random(seed)
    g, idx = counter_graph.build_counter_graph(2, 2, 2, 2)
    start = counter_graph.initial_tree(idx)
    failures = 0
    total = 0
    for _ in range(counter_runs):
        run = rules.random_facet(g, start, Random(rng.randrange(2**32)), trace=True)
        tree = comptrees.ComputationTree.from_events(run.trace_events)
        total += 1
        if tree.switch_count() != run.pivots:
            failures += 1
    for _ in range(dag_runs):
        gd = random_dag(rng, rng.randrange(3, 9), extra_edges=rng.randrange(2, 10))
        sd = random_policy(gd, rng)
        run = rules.random_facet(gd, sd, Random(rng.randrange(2**32)), trace=True)
        tree = comptrees.ComputationTree.from_events(run.trace_events)
        total += 1
        if tree.switch_count() != run.pivots:
            failures += 1
    return _report(
        "switch-identity",
        {"counter_runs": counter_runs, "dag_runs": dag_runs, "seed": seed},
        failures == 0,
        {"runs": total, "failures": failures},
    )


# ---------------------------------------------------------------------------


def _report(check: str, params: dict, passed: bool, details: dict) -> dict:
    return {"check": check, "params": params, "passed": bool(passed),
            "details": details}


CHECKS = {
    "recurrence": check_recurrence,
    "counters-equality": check_counters_equality,
    "bf-optimal": check_bf_optimal,
    "make-switch": check_make_switch,
    "bland-equiv": check_bland_equiv,
    "rf-equiv": check_rf_equiv,
    "lp-correspondence": check_lp_correspondence,
    "technical-star": check_technical_star,
    "technical-bland": check_technical_bland,
    "well-behaved-prob": check_well_behaved_prob,
    "switch-identity": check_switch_identity,
}


def run_check(check_id: str, **params) -> dict:
    if check_id not in CHECKS:
        raise UnknownCheckError(
            f"unknown check {check_id!r}; known: {', '.join(sorted(CHECKS))}"
        )
    return CHECKS[check_id](**params)
