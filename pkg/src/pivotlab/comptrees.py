"""Computation trees of the facet-removal recursion and canonical-path
analysis on counter graphs.

A traced run of the fresh-randomness facet rule yields a binary computation
tree: each node is one recursive call, the left child drops the picked edge,
and the right child (present exactly when the pick improves the tree the
first call returned) performs the switch. Right children therefore count
pivots.

The canonical follower watches a single root path of such a run: given a
set S of bit levels (descending), it extends the path left or right
according to the counting schedule for S and stops when the path either
completes the schedule ("canonical") or first becomes impossible to extend
(one of three failure events). Only the followed path is kept in memory;
subtrees hanging off it run to completion through the ordinary solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .counter_graph import CounterGraphIndex, initial_tree
from .graphs import Digraph, Policy
from .rules import RunResult, _facet_collapsed, _PivotTracker


class ComputationTree:
    """Binary recursion tree stored as parallel arrays.

    Per node: the picked edge (None at leaves), child ids, and for nodes
    with a right child the leaving edge plus the pivot's position in the
    run's pivot log. Edge sets per node are implicit: the left child's set
    drops the picked edge, the right child's set is unchanged.
    """

    def __init__(self):
        self.picked: list[int | None] = []
        self.left: list[int | None] = []
        self.right: list[int | None] = []
        self.parent: list[int | None] = []
        self.leaving: list[int | None] = []
        self.pivot_seq: list[int | None] = []

    def _new_node(self, parent: int | None) -> int:
        self.picked.append(None)
        self.left.append(None)
        self.right.append(None)
        self.parent.append(parent)
        self.leaving.append(None)
        self.pivot_seq.append(None)
        return len(self.picked) - 1

    @property
    def n_nodes(self) -> int:
        return len(self.picked)

    def switch_nodes(self) -> list[int]:
        """Nodes with a right child; one per pivot of the run."""
        return [u for u in range(self.n_nodes) if self.right[u] is not None]

    def switch_count(self) -> int:
        return sum(1 for u in range(self.n_nodes) if self.right[u] is not None)

    @classmethod
    def from_events(cls, events: list) -> "ComputationTree":
        """Rebuild the tree from a traced run's event stream."""
        tree = cls()
        root = tree._new_node(None)
        cur = root
        open_nodes: list[int] = []
        pivots_seen = 0
        for ev in events:
            kind = ev[0]
            if kind == "pick":
                tree.picked[cur] = ev[1]
                open_nodes.append(cur)
                child = tree._new_node(cur)
                tree.left[cur] = child
                cur = child
            elif kind == "leaf":
                cur = -1  # resolved; the next event must be an "up"
            elif kind == "up":
                u = open_nodes.pop()
                _, pivoted, leaving = ev
                if pivoted:
                    child = tree._new_node(u)
                    tree.right[u] = child
                    tree.leaving[u] = leaving
                    tree.pivot_seq[u] = pivots_seen
                    pivots_seen += 1
                    cur = child
                else:
                    cur = -1
            else:
                raise ValueError(f"unknown trace event {ev!r}")
        if open_nodes:
            raise ValueError("trace ended with unbalanced calls")
        return tree

    def validate(self, g: Digraph, start: Policy, subset=None) -> None:
        """Recompute every node's edge set and entry tree and check the
        child rules; intended for small traced runs.

        The left child's edge set and tree follow from the parent directly,
        but the right child's entry tree is the one returned by the whole
        left subtree, so evaluation interleaves a top-down fill with a
        bottom-up return pass.
        """
        from .graphs import improving_switches

        full = frozenset(range(g.n_edges)) if subset is None else frozenset(subset)
        f_of: dict[int, frozenset[int]] = {0: full}
        b_of: dict[int, Policy] = {0: start}
        returned: dict[int, Policy] = {}
        stack: list[tuple[int, int]] = [(0, 0)]
        while stack:
            u, stage = stack.pop()
            e = self.picked[u]
            if e is None:
                if f_of[u] != b_of[u].edge_set():
                    raise AssertionError(f"leaf {u} still has free edges")
                returned[u] = b_of[u]
                continue
            if stage == 0:
                lu = self.left[u]
                if lu is None:
                    raise AssertionError(f"node {u} picked an edge but has no left child")
                f_of[lu] = f_of[u] - {e}
                b_of[lu] = b_of[u]
                stack.append((u, 1))
                stack.append((lu, 0))
            elif stage == 1:
                sub_ret = returned[self.left[u]]  # type: ignore[index]
                ru = self.right[u]
                improving = e in improving_switches(g, sub_ret, f_of[u])
                if (ru is not None) != improving:
                    raise AssertionError(f"right child presence wrong at node {u}")
                if ru is None:
                    returned[u] = sub_ret
                    continue
                switched = list(sub_ret.chosen)
                if switched[g.tails[e]] != self.leaving[u]:
                    raise AssertionError(f"leaving edge mismatch at node {u}")
                switched[g.tails[e]] = e
                f_of[ru] = f_of[u]
                b_of[ru] = Policy(tuple(switched))
                stack.append((u, 2))
                stack.append((ru, 0))
            else:
                returned[u] = returned[self.right[u]]  # type: ignore[index]


def record_tree(result: RunResult) -> ComputationTree:
    """Build the computation tree of a traced run and check that its right
    edges count exactly the pivots performed."""
    if result.trace_events is None:
        raise ValueError("run was not traced")
    tree = ComputationTree.from_events(result.trace_events)
    if tree.switch_count() != result.pivots:
        raise AssertionError(
            f"tree has {tree.switch_count()} switch nodes, run performed "
            f"{result.pivots} pivots"
        )
    return tree


# ---------------------------------------------------------------------------
# Computation paths and their group indices

L = "L"
R = "R"
ComputationPath = list[tuple[int, str]]


def path_index(path: ComputationPath, e: int) -> int | None:
    """Position of edge e along the path, None when absent."""
    for ell, (edge, _) in enumerate(path):
        if edge == e:
            return ell
    return None


def group_first_index(path: ComputationPath, edges) -> int | None:
    """Smallest path position of any edge in the group."""
    members = set(edges)
    for ell, (edge, _) in enumerate(path):
        if edge in members:
            return ell
    return None


def level_cover_index(
    idx: CounterGraphIndex, path: ComputationPath, i: int
) -> int | None:
    """Position at which every a chain of level i has been touched, i.e. the
    max over chains of the chain's first position; None if some chain never
    appears."""
    firsts = [
        group_first_index(path, idx.a1(i, j)) for j in range(1, idx.r + 1)
    ]
    if any(f is None for f in firsts):
        return None
    return max(firsts)  # type: ignore[arg-type]


def sigma_p(idx: CounterGraphIndex, path: ComputationPath, target) -> int | None:
    """Path index of an edge or an edge group.

    `target` is an edge id, ("b1", i), ("a1", i, j) for one chain, or
    ("a1", i) for the full-level cover index (max over chains of the chain
    minimum). Absent means None.
    """
    if isinstance(target, int):
        return path_index(path, target)
    kind = target[0]
    if kind == "b1":
        return group_first_index(path, idx.b1(target[1]))
    if kind == "a1" and len(target) == 3:
        return group_first_index(path, idx.a1(target[1], target[2]))
    if kind == "a1":
        return level_cover_index(idx, path, target[1])
    raise ValueError(f"unknown sigma_p target {target!r}")


# ---------------------------------------------------------------------------
# Canonical following

CANONICAL = "canonical"
BAD1 = "bad1"
BAD2 = "bad2"
BAD3 = "bad3"
NOT_APPLICABLE = "not_applicable"
MISSING_CHILD = "missing_child"
EXHAUSTED = "exhausted"


@dataclass
class CanonicalOutcome:
    """Classification of the followed root path for one run."""

    kind: str
    detail: object = None  # level, schedule position, or multi-edge group id
    path: ComputationPath = field(default_factory=list)
    pivots_done: int = 0  # pivots the run performed up to the stop


class _FollowState:
    """Incremental bookkeeping for the canonical follower."""

    def __init__(self, idx: CounterGraphIndex, s_levels: list[int]):
        self.idx = idx
        self.s_levels = s_levels  # descending
        self.s_set = set(s_levels)
        self.b_seen = {i: False for i in idx.levels()}
        self.chunk_covered = {
            (i, j): False for i in idx.levels() for j in range(1, idx.r + 1)
        }
        self.cover_remaining = {i: idx.r for i in idx.levels()}
        self.chunk_in_f = {
            (i, j): idx.s for i in idx.levels() for j in range(1, idx.r + 1)
        }
        self.full_chunks = {i: idx.r for i in idx.levels()}
        self.multi_in_f = [len(ids) for ids in idx.multi_edges]

    def decide(self, e: int) -> tuple[str, str | None, object]:
        """Direction for the pick plus a terminal classification, if any.

        Returns (direction, stop_kind, detail); direction is meaningful even
        when the path stops here. Mutates the coverage bookkeeping, but not
        the in-subset counters (the caller removes only on L steps).
        """
        idx = self.idx
        grp = idx.edge_group[e]
        kind = grp[0]
        if kind == "b1":
            i = grp[1]
            first = not self.b_seen[i]
            self.b_seen[i] = True
            direction = R if i in self.s_set else L
            if first and i in self.s_set:
                for pos, lvl in enumerate(self.s_levels):
                    if lvl == i:
                        break
                    if not self.b_seen[lvl]:
                        return direction, BAD1, pos + 1  # schedule position q
            return direction, None, None
        if kind == "a1":
            i, j = grp[1], grp[2]
            chunk_full = self.chunk_in_f[(i, j)] == idx.s
            remaining_full = self.full_chunks[i] - (1 if chunk_full else 0)
            direction = R if (i in self.s_set and remaining_full == 0) else L
            if not self.chunk_covered[(i, j)]:
                self.chunk_covered[(i, j)] = True
                self.cover_remaining[i] -= 1
                if self.cover_remaining[i] == 0:
                    if not self.b_seen[i]:
                        return direction, BAD2, i
                    if self.s_levels and i == self.s_levels[-1]:
                        # schedule complete; the final step must be a switch
                        stop = CANONICAL if direction == R else MISSING_CHILD
                        return direction, stop, i
            return direction, None, None
        # multi-edge copy
        gix = grp[1]
        if self.multi_in_f[gix] == 1:
            return L, BAD3, gix  # removing the last copy breaks the subgraph
        return L, None, None

    def removed(self, e: int) -> None:
        """Account an L-step removal."""
        idx = self.idx
        grp = idx.edge_group[e]
        if grp[0] == "a1":
            i, j = grp[1], grp[2]
            if self.chunk_in_f[(i, j)] == idx.s:
                self.full_chunks[i] -= 1
            self.chunk_in_f[(i, j)] -= 1
        elif grp[0] == "multi":
            self.multi_in_f[grp[1]] -= 1


def follow_canonical(
    g: Digraph,
    idx: CounterGraphIndex,
    s_levels,
    rng,
    start: Policy | None = None,
) -> CanonicalOutcome:
    """Run the fresh-randomness facet rule once and classify its followed
    root path against the counting schedule for the given bit levels.

    The follower only steers which child of the current node to expand:
    left-steps drop the picked edge, right-steps let the first recursive
    call run to completion through the ordinary solver, then perform the
    switch. Levels must be distinct; they are followed in descending order.
    """
    s_sorted = sorted(set(s_levels), reverse=True)
    if not s_sorted:
        return CanonicalOutcome(NOT_APPLICABLE)
    if any(i < 1 or i > idx.n for i in s_sorted):
        raise ValueError("schedule levels must lie in 1..n")
    if start is None:
        start = initial_tree(idx)
    state = _FollowState(idx, s_sorted)
    chosen = list(start.chosen)
    tracker = _PivotTracker(g, chosen)
    in_f = [True] * g.n_edges
    path: ComputationPath = []
    while True:
        cands = sorted(
            e for e in range(g.n_edges) if in_f[e] and chosen[g.tails[e]] != e
        )
        if not cands:
            return CanonicalOutcome(EXHAUSTED, None, path, len(tracker.log))
        e = cands[rng.randrange(len(cands))]
        direction, stop, detail = state.decide(e)
        path.append((e, direction))
        if stop == CANONICAL:
            # the final switch must exist; run the first call, then pivot
            in_f[e] = False
            _solve_in_place(g, tracker, in_f, rng)
            in_f[e] = True
            if not tracker.improving(e):
                return CanonicalOutcome(
                    MISSING_CHILD, detail, path, len(tracker.log)
                )
            tracker.pivot(e)
            return CanonicalOutcome(CANONICAL, detail, path, len(tracker.log))
        if stop is not None:
            return CanonicalOutcome(stop, detail, path, len(tracker.log))
        if direction == L:
            state.removed(e)
            in_f[e] = False
            continue
        # right step: complete the first recursive call, then switch
        in_f[e] = False
        _solve_in_place(g, tracker, in_f, rng)
        in_f[e] = True
        if not tracker.improving(e):
            return CanonicalOutcome(MISSING_CHILD, None, path, len(tracker.log))
        tracker.pivot(e)


def _solve_in_place(g: Digraph, tracker: _PivotTracker, in_f: list, rng) -> None:
    """Run the facet recursion to optimality over the in_f edges, evolving
    the tracker's tree."""

    def arrange(cands: list[int]) -> None:
        rng.shuffle(cands)

    _facet_collapsed(g, tracker, in_f, arrange)


def classify_path(
    idx: CounterGraphIndex, s_levels, path: ComputationPath
) -> tuple[str, object]:
    """Post-hoc classification of a recorded path, straight from the
    definitions; independent of the follower's incremental bookkeeping."""
    s_sorted = sorted(set(s_levels), reverse=True)
    if not s_sorted:
        return NOT_APPLICABLE, None
    if not path:
        return EXHAUSTED, None
    k = len(path) - 1
    _, last_dir = path[k]
    # remaining copies after all L-removals
    removed = {e for e, d in path if d == L}
    for gix, ids in enumerate(idx.multi_edges):
        if all(e in removed for e in ids):
            return BAD3, gix
    for pos, lvl in enumerate(s_sorted):
        first_here = group_first_index(path, idx.b1(lvl))
        if first_here is None:
            later = [
                group_first_index(path, idx.b1(l2))
                for l2 in s_sorted[pos + 1:]
            ]
            if any(f == k for f in later):
                return BAD1, pos + 1
    for i in idx.levels():
        if group_first_index(path, idx.b1(i)) is None:
            if level_cover_index(idx, path, i) == k:
                return BAD2, i
    if (
        level_cover_index(idx, path, s_sorted[-1]) == k
        and last_dir == R
    ):
        return CANONICAL, s_sorted[-1]
    return MISSING_CHILD, None


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054):
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    phat = successes / trials
    denom = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (
        z
        * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
        / denom
    )
    return max(0.0, center - half), min(1.0, center + half)


@dataclass
class CanonicalEstimate:
    """Monte Carlo estimate of the follower's outcome frequencies."""

    trials: int
    counts: dict[str, int]
    canonical_freq: float
    wilson_low: float
    wilson_high: float
    good1_freq: float
    bad2_given_good1: float
    bad3_given_good1: float


def estimate_canonical_probability(
    g: Digraph,
    idx: CounterGraphIndex,
    s_levels,
    trials: int,
    rng,
) -> CanonicalEstimate:
    """Frequency of canonical completions over independent runs, with a
    Wilson interval and the conditional failure frequencies."""
    counts: dict[str, int] = {}
    for _ in range(trials):
        out = follow_canonical(g, idx, s_levels, rng)
        counts[out.kind] = counts.get(out.kind, 0) + 1
    canon = counts.get(CANONICAL, 0)
    bad1 = counts.get(BAD1, 0)
    bad2 = counts.get(BAD2, 0)
    bad3 = counts.get(BAD3, 0)
    good1 = trials - bad1
    low, high = wilson_interval(canon, trials)
    return CanonicalEstimate(
        trials=trials,
        counts=counts,
        canonical_freq=canon / trials if trials else 0.0,
        wilson_low=low,
        wilson_high=high,
        good1_freq=good1 / trials if trials else 0.0,
        bad2_given_good1=bad2 / good1 if good1 else 0.0,
        bad3_given_good1=bad3 / good1 if good1 else 0.0,
    )
