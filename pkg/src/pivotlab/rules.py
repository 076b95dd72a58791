"""Pivoting rules on the graph engine, plus edge-permutation machinery.

Every engine works on exact integer distances and performs only strictly
improving switches, so the summed tree distance decreases through each run;
the engines check that invariant on every pivot. The facet-removal engines
exist in two forms: a literal per-call recursion (explicit stack, optional
event trace for computation-tree analysis) and a collapsed form that
processes each descent's candidate list in one sweep. Both execute the same
recursion; the collapsed form is the default because it does constant work
per recursive call.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

from .counter_graph import CounterGraphIndex
from .graphs import (
    Digraph,
    Policy,
    optimal_distances_list,
    tree_distances_list,
)


class InvalidStartError(Exception):
    """The start policy uses edges outside the allowed edge set."""


class PivotInvariantError(Exception):
    """A pivot failed to strictly decrease the summed tree distance."""


@dataclass
class RunResult:
    """Outcome of one pivoting-rule run."""

    rule: str
    pivots: int
    pivot_log: list[tuple[int, int]]  # (entering edge, leaving edge)
    final_policy: Policy
    seed: int | None = None
    sigma: list[int] | None = None
    trace_events: list | None = None
    extra: dict = field(default_factory=dict)


def _start(g: Digraph, policy: Policy, subset) -> tuple[list, set]:
    chosen = list(policy.chosen)
    allowed = set(range(g.n_edges)) if subset is None else set(subset)
    if not policy.edge_set() <= allowed:
        raise InvalidStartError("start policy uses edges outside the edge set")
    return chosen, allowed


def _objective(dist: list[int]) -> int:
    return sum(dist)


class _PivotTracker:
    """Maintains distances and the strictly-decreasing objective check."""

    def __init__(self, g: Digraph, chosen: list):
        self.g = g
        self.chosen = chosen
        self.dist = tree_distances_list(g, chosen)
        self.obj = _objective(self.dist)
        self.log: list[tuple[int, int]] = []

    def improving(self, e: int) -> bool:
        g = self.g
        return g.costs[e] + self.dist[g.heads[e]] < self.dist[g.tails[e]]

    def pivot(self, e: int) -> int:
        u = self.g.tails[e]
        leaving = self.chosen[u]
        self.chosen[u] = e
        self.dist = tree_distances_list(self.g, self.chosen)
        new_obj = _objective(self.dist)
        if new_obj >= self.obj:
            raise PivotInvariantError(
                f"pivot on edge {e} moved the objective {self.obj} -> {new_obj}"
            )
        self.obj = new_obj
        self.log.append((e, leaving))
        return leaving


def _facet_collapsed(g: Digraph, tracker: _PivotTracker, in_f: list, arrange) -> None:
    """Collapsed facet-removal recursion over the edges with in_f set.

    `arrange(cands)` permutes a fresh candidate list into its removal order
    (picked-first first). Each descent strips the whole candidate list, the
    unwind tests candidates last-removed first against the evolving tree,
    and every pivot opens a sub-descent over the surviving candidates.
    """
    chosen = tracker.chosen
    tails = g.tails

    def fresh_cands() -> list[int]:
        cands = [
            e for e in range(g.n_edges) if in_f[e] and chosen[tails[e]] != e
        ]
        arrange(cands)
        for e in cands:
            in_f[e] = False
        return cands

    first = fresh_cands()
    stack = [[first, len(first) - 1]]
    while stack:
        frame = stack[-1]
        k = frame[1]
        if k < 0:
            stack.pop()
            continue
        e = frame[0][k]
        frame[1] = k - 1
        in_f[e] = True  # e belongs to this call's edge set again
        if tracker.improving(e):
            tracker.pivot(e)
            sub = fresh_cands()
            stack.append([sub, len(sub) - 1])


def _facet_literal(
    g: Digraph, tracker: _PivotTracker, in_f: list, rng, events: list | None
) -> None:
    """Literal per-call facet-removal recursion with an explicit stack.

    Each call picks one random candidate (uniform index into the id-sorted
    candidate list), recurses without it, and pivots plus re-recurses when
    the pick improves the returned tree. Optionally emits trace events:
    ("pick", e), ("leaf",), ("up", pivoted, leaving).
    """
    chosen = tracker.chosen
    tails = g.tails
    cands = sorted(
        e for e in range(g.n_edges) if in_f[e] and chosen[tails[e]] != e
    )
    # frame: [stage, picked_edge]; stage 0 = entering, 1 = after first call
    stack = [[0, -1]]
    while stack:
        frame = stack[-1]
        if frame[0] == 0:
            if not cands:
                if events is not None:
                    events.append(("leaf",))
                stack.pop()
                continue
            idx = rng.randrange(len(cands))
            e = cands.pop(idx)
            in_f[e] = False
            frame[0] = 1
            frame[1] = e
            if events is not None:
                events.append(("pick", e))
            stack.append([0, -1])
            continue
        # first recursive call returned; decide on the pick
        e = frame[1]
        in_f[e] = True
        if tracker.improving(e):
            leaving = tracker.pivot(e)
            # e joined the tree; the leaving edge becomes a candidate again
            if in_f[leaving] and chosen[tails[leaving]] != leaving:
                bisect.insort(cands, leaving)
            if events is not None:
                events.append(("up", True, leaving))
            frame[0] = 0
            frame[1] = -1
            continue
        if events is not None:
            events.append(("up", False, None))
        # e returns to the caller's candidate pool unless it is now chosen
        if chosen[tails[e]] != e:
            bisect.insort(cands, e)
        stack.pop()


def random_facet(
    g: Digraph,
    policy: Policy,
    rng,
    subset=None,
    trace: bool = False,
    seed: int | None = None,
) -> RunResult:
    """Facet-removal rule with a fresh random pick at every call."""
    chosen, allowed = _start(g, policy, subset)
    in_f = [False] * g.n_edges
    for e in allowed:
        in_f[e] = True
    tracker = _PivotTracker(g, chosen)
    if trace:
        events: list = []
        _facet_literal(g, tracker, in_f, rng, events)
    else:
        events = None

        def arrange(cands: list[int]) -> None:
            # drawing a uniform index per removal equals one uniform shuffle
            rng.shuffle(cands)

        _facet_collapsed(g, tracker, in_f, arrange)
    return RunResult(
        rule="random-facet",
        pivots=len(tracker.log),
        pivot_log=tracker.log,
        final_policy=Policy(tuple(chosen)),
        seed=seed,
        trace_events=events,
    )


def random_facet_one_perm(
    g: Digraph,
    policy: Policy,
    sigma,
    subset=None,
    seed: int | None = None,
) -> RunResult:
    """Facet-removal rule that always removes the candidate of minimum
    permutation index; deterministic given sigma."""
    chosen, allowed = _start(g, policy, subset)
    in_f = [False] * g.n_edges
    for e in allowed:
        in_f[e] = True
    tracker = _PivotTracker(g, chosen)

    def arrange(cands: list[int]) -> None:
        cands.sort(key=sigma.__getitem__)

    _facet_collapsed(g, tracker, in_f, arrange)
    return RunResult(
        rule="random-facet-1p",
        pivots=len(tracker.log),
        pivot_log=tracker.log,
        final_policy=Policy(tuple(chosen)),
        seed=seed,
        sigma=list(sigma),
    )


def random_facet_nonrec(
    g: Digraph, policy: Policy, rng, seed: int | None = None
) -> RunResult:
    """Non-recursive facet-removal rule.

    Keeps an explicit permutation of the non-tree edges; pivots on the first
    improving edge in permutation order, then reshuffles the scanned prefix
    together with the edge that left the tree, keeping the suffix order.
    """
    chosen = list(policy.chosen)
    tracker = _PivotTracker(g, chosen)
    perm = [e for e in range(g.n_edges) if chosen[g.tails[e]] != e]
    rng.shuffle(perm)
    while True:
        j = next((i for i, e in enumerate(perm) if tracker.improving(e)), None)
        if j is None:
            break
        e = perm[j]
        leaving = tracker.pivot(e)
        prefix = perm[:j] + [leaving]
        rng.shuffle(prefix)
        perm = prefix + perm[j + 1:]
    return RunResult(
        rule="random-facet-nonrec",
        pivots=len(tracker.log),
        pivot_log=tracker.log,
        final_policy=Policy(tuple(chosen)),
        seed=seed,
    )


def bland_rec(
    g: Digraph,
    policy: Policy,
    sigma,
    ell: int = 1,
    seed: int | None = None,
    frame_hook=None,
) -> RunResult:
    """Recursive fixed-permutation rule over the suffix edge sets.

    The call for suffix level ell works on the edges of permutation index
    >= ell; it removes the index-ell edge, recurses, and pivots when that
    edge improves the returned tree. `frame_hook(ell, policy_before,
    entering, policy_after)` observes every pivot.
    """
    m = g.n_edges
    edge_of_rank = [0] * (m + 1)
    for e in range(m):
        edge_of_rank[sigma[e]] = e
    chosen = list(policy.chosen)
    tracker = _PivotTracker(g, chosen)
    # frame: [rank, stage]; global policy threads through the recursion
    stack = [[ell, 0]]
    while stack:
        frame = stack[-1]
        rank, stage = frame
        if rank > m:
            stack.pop()
            continue
        if stage == 0:
            frame[1] = 1
            stack.append([rank + 1, 0])
            continue
        e = edge_of_rank[rank]
        if tracker.improving(e):
            before = Policy(tuple(chosen)) if frame_hook else None
            tracker.pivot(e)
            if frame_hook:
                frame_hook(rank, before, e, Policy(tuple(chosen)))
            frame[1] = 0  # tail call: rerun this suffix with the new tree
            continue
        stack.pop()
    return RunResult(
        rule="bland",
        pivots=len(tracker.log),
        pivot_log=tracker.log,
        final_policy=Policy(tuple(chosen)),
        seed=seed,
        sigma=list(sigma),
    )


def bland_nonrec(
    g: Digraph, policy: Policy, sigma, start: int = 1, seed: int | None = None
) -> RunResult:
    """Scanning form of the fixed-permutation rule: repeatedly pivot on the
    improving edge of largest permutation index >= start."""
    m = g.n_edges
    by_rank_desc = sorted(range(m), key=sigma.__getitem__, reverse=True)
    by_rank_desc = [e for e in by_rank_desc if sigma[e] >= start]
    chosen = list(policy.chosen)
    tracker = _PivotTracker(g, chosen)
    while True:
        e = next((x for x in by_rank_desc if tracker.improving(x)), None)
        if e is None:
            break
        tracker.pivot(e)
    return RunResult(
        rule="bland-nonrec",
        pivots=len(tracker.log),
        pivot_log=tracker.log,
        final_policy=Policy(tuple(chosen)),
        seed=seed,
        sigma=list(sigma),
    )


def random_bland(
    g: Digraph, policy: Policy, rng, seed: int | None = None
) -> RunResult:
    """Fixed-permutation rule with a uniformly random permutation."""
    sigma = random_permutation_fn(g.n_edges, rng)
    res = bland_nonrec(g, policy, sigma, start=1, seed=seed)
    res.rule = "random-bland"
    return res


def dantzig(g: Digraph, policy: Policy, seed: int | None = None) -> RunResult:
    """Baseline rule: pivot on the edge of smallest reduced cost
    cost(e) + y(head) - y(tail); ties break to the lowest edge id."""
    chosen = list(policy.chosen)
    tracker = _PivotTracker(g, chosen)
    while True:
        best = None
        best_red = 0
        for e in range(g.n_edges):
            red = g.costs[e] + tracker.dist[g.heads[e]] - tracker.dist[g.tails[e]]
            if red < best_red:
                best, best_red = e, red
        if best is None:
            break
        tracker.pivot(best)
    return RunResult(
        rule="dantzig",
        pivots=len(tracker.log),
        pivot_log=tracker.log,
        final_policy=Policy(tuple(chosen)),
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Permutation machinery


def random_permutation_fn(m: int, rng) -> list[int]:
    """A uniform bijection edge id -> rank in 1..m, as a list."""
    ranks = list(range(1, m + 1))
    rng.shuffle(ranks)
    return ranks


def sigma_b1(idx: CounterGraphIndex, sigma, i: int) -> int:
    """First (minimum) rank among level i's b-chain one-edges."""
    return min(sigma[e] for e in idx.b1(i))


def sigma_a1_chunk(idx: CounterGraphIndex, sigma, i: int, j: int) -> int:
    return min(sigma[e] for e in idx.a1(i, j))


def sigma_a1(idx: CounterGraphIndex, sigma, i: int) -> int:
    """Rank at which the last a chain of level i is first touched."""
    return max(sigma_a1_chunk(idx, sigma, i, j) for j in range(1, idx.r + 1))


def sigma_multi(sigma, group) -> int:
    """Rank of the last copy of a multi-edge."""
    return max(sigma[e] for e in group)


def is_well_behaved(idx: CounterGraphIndex, sigma) -> bool:
    """Whether sigma orders removals so the counter dynamics survive.

    Requires, for every level, a b-chain edge ahead of the level's last
    a chain, and every a chain's first edge ahead of every multi-edge's
    last copy.
    """
    a_chunk_min = [
        sigma_a1_chunk(idx, sigma, i, j)
        for i in idx.levels()
        for j in range(1, idx.r + 1)
    ]
    pos = 0
    for i in idx.levels():
        level_a = max(a_chunk_min[pos: pos + idx.r])
        pos += idx.r
        if sigma_b1(idx, sigma, i) >= level_a:
            return False
    threshold = max(a_chunk_min)
    return all(sigma_multi(sigma, grp) > threshold for grp in idx.multi_edges)


def induced_permutation(idx: CounterGraphIndex, sigma) -> list[int]:
    """Bit priorities induced by sigma: levels ranked by the first rank of
    their b chain. Entry 0 of the returned list is unused."""
    order = sorted(idx.levels(), key=lambda i: sigma_b1(idx, sigma, i))
    out = [0] * (idx.n + 1)
    for rank, i in enumerate(order, start=1):
        out[i] = rank
    return out


def sample_well_behaved(idx: CounterGraphIndex, rng) -> list[int]:
    """Sample a well-behaved permutation constructively.

    Uniform rejection is hopeless at small chain lengths (the acceptance
    probability decays like exp(-|M| * P[one chain sorts after one
    multi-edge])), so instead: draw independent uniform keys, then (a) for
    any level whose b chain sorts after its last a chain, redraw one random
    b-chain key below that threshold, and (b) for any multi-edge whose last
    copy sorts before some a chain's first key, redraw one random copy above
    the largest such key. Neither repair disturbs the other constraint. The
    rank order of the keys is the permutation.
    """
    while True:
        keys = [rng.random() for _ in range(idx.n_edges)]
        chunk_min = {
            (i, j): min(keys[e] for e in idx.a1(i, j))
            for i in idx.levels()
            for j in range(1, idx.r + 1)
        }
        for i in idx.levels():
            level_a = max(chunk_min[(i, j)] for j in range(1, idx.r + 1))
            b_edges = idx.b1(i)
            if min(keys[e] for e in b_edges) >= level_a:
                keys[b_edges[rng.randrange(len(b_edges))]] = rng.random() * level_a
        threshold = max(chunk_min.values())
        for grp in idx.multi_edges:
            if max(keys[e] for e in grp) <= threshold:
                pick = grp[rng.randrange(len(grp))]
                keys[pick] = threshold + rng.random() * (1.0 - threshold)
        order = sorted(range(idx.n_edges), key=keys.__getitem__)
        sigma = [0] * idx.n_edges
        for rank, e in enumerate(order, start=1):
            sigma[e] = rank
        # float key collisions could break a strict comparison; retry if so
        if is_well_behaved(idx, sigma):
            return sigma


def suffix_set(sigma, ell: int) -> frozenset[int]:
    """Edges whose permutation index is at least ell."""
    return frozenset(e for e in range(len(sigma)) if sigma[e] >= ell)


def fixed_vertices(g: Digraph, policy: Policy, subset) -> set[int]:
    """Tails whose tree distance is already optimal in the subgraph spanned
    by the subset plus the policy's own edges."""
    edges = set(subset) | policy.edge_set()
    dist_tree = tree_distances_list(g, policy.chosen)
    dist_opt = optimal_distances_list(g, edges)
    return {
        v for v in range(g.n_vertices)
        if v != g.target and dist_tree[v] == dist_opt[v]
    }


def is_fixed_edge(g: Digraph, e: int, policy: Policy, subset) -> bool:
    """Whether the policy edge e keeps its tail at the optimal distance of
    the subgraph spanned by subset plus the policy edges; such edges survive
    every later improving switch."""
    u = g.tails[e]
    if policy.chosen[u] != e:
        raise ValueError(f"edge {e} is not the policy's choice at vertex {u}")
    return u in fixed_vertices(g, policy, subset)
