"""Weighted digraphs with exact integer costs, policy trees, and shortest-path oracles.

All costs are integers in scaled units (true cost times a global positive
integer ``scale``), so every distance comparison is exact. Shortest paths are
measured from each vertex *to* a designated target vertex.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence


class PolicyCycleError(Exception):
    """Chosen edges contain a cycle, so tree distances are undefined."""


class NegativeCycleError(Exception):
    """The graph contains a negative cycle; distances are unbounded below."""


class DisconnectedVertexError(Exception):
    """Some vertex cannot reach the target within the allowed edge set."""


class NotAnEdgeError(Exception):
    """An edge id outside the graph was supplied."""


class SelfReplaceWarning(UserWarning):
    """The switch target is already the chosen edge; applying it is a no-op."""


INF = float("inf")


class Digraph:
    """Directed graph with integer scaled costs and a designated target.

    Vertex ids are dense integers ``0..n_vertices-1``; edge ids are dense
    integers ``0..n_edges-1``. Every non-target vertex must have out-degree
    at least one and must be able to reach the target; both are validated at
    construction time.
    """

    def __init__(
        self,
        n_vertices: int,
        target: int,
        tails: Sequence[int],
        heads: Sequence[int],
        costs: Sequence[int],
        scale: int = 1,
        edge_names: Sequence[str] | None = None,
        vertex_names: Sequence[str] | None = None,
    ):
        if not (0 <= target < n_vertices):
            raise ValueError("target out of range")
        if not (len(tails) == len(heads) == len(costs)):
            raise ValueError("edge arrays must have equal length")
        if scale <= 0:
            raise ValueError("scale must be a positive integer")
        self.n_vertices = n_vertices
        self.target = target
        self.tails = tuple(tails)
        self.heads = tuple(heads)
        self.costs = tuple(int(c) for c in costs)
        self.scale = scale
        self.n_edges = len(self.tails)
        self.edge_names = (
            tuple(edge_names) if edge_names is not None
            else tuple(f"e{e}" for e in range(self.n_edges))
        )
        self.vertex_names = (
            tuple(vertex_names) if vertex_names is not None
            else tuple(f"v{v}" for v in range(n_vertices))
        )
        out: list[list[int]] = [[] for _ in range(n_vertices)]
        for e, (u, v) in enumerate(zip(self.tails, self.heads)):
            if not (0 <= u < n_vertices and 0 <= v < n_vertices):
                raise ValueError(f"edge {e} endpoint out of range")
            if u == target:
                raise ValueError("the target vertex must have no outgoing edges")
            out[u].append(e)
        self.out_edges = tuple(tuple(es) for es in out)
        for v in range(n_vertices):
            if v != target and not self.out_edges[v]:
                raise DisconnectedVertexError(f"vertex {v} has no outgoing edge")
        unreachable = self._unreachable(None)
        if unreachable:
            raise DisconnectedVertexError(
                f"vertices {sorted(unreachable)} cannot reach the target"
            )
        self._topo: tuple[int, ...] | None | bool = False  # False = not computed

    def _unreachable(self, subset: set[int] | None) -> set[int]:
        """Vertices that cannot reach the target using edges in `subset`."""
        into: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for e in range(self.n_edges) if subset is None else subset:
            into[self.heads[e]].append(self.tails[e])
        seen = [False] * self.n_vertices
        seen[self.target] = True
        stack = [self.target]
        while stack:
            v = stack.pop()
            for u in into[v]:
                if not seen[u]:
                    seen[u] = True
                    stack.append(u)
        return {v for v in range(self.n_vertices) if not seen[v]}

    def topological_order(self) -> tuple[int, ...] | None:
        """Vertices ordered so every edge goes forward, or None if cyclic."""
        if self._topo is False:
            indeg = [0] * self.n_vertices
            for v in self.heads:
                indeg[v] += 1
            queue = [v for v in range(self.n_vertices) if indeg[v] == 0]
            order = []
            while queue:
                u = queue.pop()
                order.append(u)
                for e in self.out_edges[u]:
                    h = self.heads[e]
                    indeg[h] -= 1
                    if indeg[h] == 0:
                        queue.append(h)
            self._topo = tuple(order) if len(order) == self.n_vertices else None
        return self._topo  # type: ignore[return-value]

    @property
    def is_acyclic(self) -> bool:
        return self.topological_order() is not None

    def edge_str(self, e: int) -> str:
        return (
            f"{self.edge_names[e]}({self.vertex_names[self.tails[e]]}->"
            f"{self.vertex_names[self.heads[e]]}, c={self.costs[e]})"
        )


@dataclass(frozen=True)
class Policy:
    """One chosen outgoing edge per non-target vertex; ``None`` at the target.

    A valid policy's chosen edges form a tree of paths into the target.
    """

    chosen: tuple[int | None, ...]

    def edge_set(self) -> frozenset[int]:
        return frozenset(e for e in self.chosen if e is not None)

    def chosen_list(self) -> list[int | None]:
        return list(self.chosen)


def policy_from_chosen(chosen: Sequence[int | None]) -> Policy:
    return Policy(tuple(chosen))


def tree_distances_list(
    g: Digraph, chosen: Sequence[int | None]
) -> list[int]:
    """Distance to the target along the chosen edges, as a list over vertices.

    Raises PolicyCycleError if the chosen edges loop.
    """
    n = g.n_vertices
    dist: list[int | None] = [None] * n
    dist[g.target] = 0
    state = bytearray(n)  # 0 unvisited, 1 on current walk, 2 done
    state[g.target] = 2
    heads = g.heads
    costs = g.costs
    for v0 in range(n):
        if state[v0]:
            continue
        path = []
        v = v0
        while state[v] == 0:
            state[v] = 1
            path.append(v)
            e = chosen[v]
            if e is None or g.tails[e] != v:
                raise PolicyCycleError(f"vertex {v} has no valid chosen edge")
            v = heads[e]
        if state[v] == 1:
            raise PolicyCycleError(f"chosen edges cycle through vertex {v}")
        acc = dist[v]
        for u in reversed(path):
            acc = costs[chosen[u]] + acc  # type: ignore[index]
            dist[u] = acc
            state[u] = 2
    return dist  # type: ignore[return-value]


def tree_distances(g: Digraph, policy: Policy) -> dict[int, int]:
    """Exact distance of every vertex to the target along the policy tree."""
    dist = tree_distances_list(g, policy.chosen)
    return {v: dist[v] for v in range(g.n_vertices)}


def policy_objective(g: Digraph, policy: Policy) -> int:
    """Sum of all tree distances; strictly decreases on improving switches."""
    return sum(tree_distances_list(g, policy.chosen))


def optimal_distances_list(
    g: Digraph, subset: Iterable[int] | None = None
) -> list[int]:
    """True shortest distances to the target, restricted to `subset` edges.

    Uses topological-order relaxation when the graph is acyclic, Bellman-Ford
    otherwise. Raises DisconnectedVertexError if some vertex cannot reach the
    target within the subset, NegativeCycleError on a negative cycle.
    """
    sub = None if subset is None else set(subset)
    if sub is not None:
        bad = g._unreachable(sub)
        if bad:
            raise DisconnectedVertexError(
                f"vertices {sorted(bad)} cannot reach the target in the subgraph"
            )
    n = g.n_vertices
    tails, heads, costs = g.tails, g.heads, g.costs
    topo = g.topological_order()
    if topo is not None:
        dist: list = [INF] * n
        dist[g.target] = 0
        for v in reversed(topo):
            if v == g.target:
                continue
            best = INF
            for e in g.out_edges[v]:
                if sub is not None and e not in sub:
                    continue
                d = dist[heads[e]]
                if d is not INF:
                    cand = costs[e] + d
                    if cand < best:
                        best = cand
            dist[v] = best
        return dist
    # Bellman-Ford toward the target.
    dist = [INF] * n
    dist[g.target] = 0
    edges = range(g.n_edges) if sub is None else sub
    for _ in range(n - 1):
        changed = False
        for e in edges:
            dh = dist[heads[e]]
            if dh is not INF:
                cand = costs[e] + dh
                if cand < dist[tails[e]]:
                    dist[tails[e]] = cand
                    changed = True
        if not changed:
            break
    else:
        for e in edges:
            dh = dist[heads[e]]
            if dh is not INF and costs[e] + dh < dist[tails[e]]:
                raise NegativeCycleError("relaxation still improves after n-1 rounds")
    return dist


def optimal_distances(g: Digraph, subset: Iterable[int] | None = None) -> dict[int, int]:
    dist = optimal_distances_list(g, subset)
    return {v: dist[v] for v in range(g.n_vertices)}


def improving_switches(
    g: Digraph, policy: Policy, subset: Iterable[int] | None = None
) -> set[int]:
    """Edges e=(u,v) with cost(e) + y_B(v) < y_B(u), strict and exact."""
    dist = tree_distances_list(g, policy.chosen)
    edges = range(g.n_edges) if subset is None else subset
    out = set()
    for e in edges:
        if g.costs[e] + dist[g.heads[e]] < dist[g.tails[e]]:
            out.add(e)
    return out


def apply_switch(g: Digraph, policy: Policy, e: int) -> Policy:
    """Replace the chosen edge at tail(e) with e."""
    if not (0 <= e < g.n_edges):
        raise NotAnEdgeError(f"no edge with id {e}")
    u = g.tails[e]
    if policy.chosen[u] == e:
        warnings.warn(f"edge {e} is already chosen at vertex {u}", SelfReplaceWarning)
        return policy
    chosen = list(policy.chosen)
    chosen[u] = e
    return Policy(tuple(chosen))


def is_valid_policy(g: Digraph, policy: Policy) -> bool:
    if len(policy.chosen) != g.n_vertices or policy.chosen[g.target] is not None:
        return False
    try:
        tree_distances_list(g, policy.chosen)
    except PolicyCycleError:
        return False
    return True


def optimal_edge_set(g: Digraph, subset: Iterable[int] | None = None) -> set[int]:
    """Edges e=(u,v) in the subset with y(u) = cost(e) + y(v) under the
    optimal distances of the subgraph; exactly the edges lying on shortest
    paths."""
    sub = set(range(g.n_edges)) if subset is None else set(subset)
    dist = optimal_distances_list(g, sub)
    return {
        e for e in sub
        if dist[g.tails[e]] == g.costs[e] + dist[g.heads[e]]
    }


def bfs_tree_policy(g: Digraph) -> Policy:
    """A deterministic valid policy: breadth-first tree toward the target."""
    chosen: list[int | None] = [None] * g.n_vertices
    into: list[list[int]] = [[] for _ in range(g.n_vertices)]
    for e in range(g.n_edges):
        into[g.heads[e]].append(e)
    frontier = [g.target]
    seen = [False] * g.n_vertices
    seen[g.target] = True
    while frontier:
        nxt = []
        for v in frontier:
            for e in sorted(into[v]):
                u = g.tails[e]
                if not seen[u]:
                    seen[u] = True
                    chosen[u] = e
                    nxt.append(u)
        frontier = nxt
    return Policy(tuple(chosen))


def random_policy(g: Digraph, rng) -> Policy:
    """Uniform random out-edge per vertex; valid on acyclic graphs, else
    resampled until the chosen edges form a tree."""
    while True:
        chosen: list[int | None] = [None] * g.n_vertices
        for v in range(g.n_vertices):
            if v != g.target:
                chosen[v] = g.out_edges[v][rng.randrange(len(g.out_edges[v]))]
        pol = Policy(tuple(chosen))
        if g.is_acyclic or is_valid_policy(g, pol):
            return pol


def random_dag(
    rng,
    n_vertices: int,
    extra_edges: int = 0,
    max_cost: int = 20,
    parallel_ok: bool = True,
) -> Digraph:
    """Random acyclic instance: a chain backbone into the target plus random
    forward edges with non-negative integer costs.

    `n_vertices` counts the non-target vertices; the target gets the last id.
    """
    n = n_vertices
    target = n
    order = list(range(n))
    rng.shuffle(order)  # order[i] appears at topological position i
    tails, heads, costs = [], [], []
    # backbone guarantees out-degree >= 1 and reachability
    for pos, v in enumerate(order):
        later = order[pos + 1:] + [target]
        heads.append(later[rng.randrange(len(later))])
        tails.append(v)
        costs.append(rng.randrange(max_cost + 1))
    seen = {(tails[i], heads[i]) for i in range(len(tails))}
    attempts = 0
    added = 0
    while added < extra_edges and attempts < 50 * (extra_edges + 1):
        attempts += 1
        pos = rng.randrange(n)
        v = order[pos]
        later = order[pos + 1:] + [target]
        h = later[rng.randrange(len(later))]
        if not parallel_ok and (v, h) in seen:
            continue
        seen.add((v, h))
        tails.append(v)
        heads.append(h)
        costs.append(rng.randrange(max_cost + 1))
        added += 1
    return Digraph(n + 1, target, tails, heads, costs)


def save_graph_json(g: Digraph, path: str) -> None:
    """Write the graph in the interchange schema; costs become decimal strings."""
    doc = {
        "scale": g.scale,
        "target": g.target,
        "vertices": [
            {"id": v, "name": g.vertex_names[v]} for v in range(g.n_vertices)
        ],
        "edges": [
            {
                "id": e,
                "name": g.edge_names[e],
                "tail": g.tails[e],
                "head": g.heads[e],
                "scaled_cost": str(g.costs[e]),
            }
            for e in range(g.n_edges)
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_graph_json(path: str) -> Digraph:
    with open(path) as fh:
        doc = json.load(fh)
    vertices = sorted(doc["vertices"], key=lambda d: d["id"])
    if [d["id"] for d in vertices] != list(range(len(vertices))):
        raise ValueError("vertex ids must be dense integers starting at 0")
    edges = sorted(doc["edges"], key=lambda d: d["id"])
    if [d["id"] for d in edges] != list(range(len(edges))):
        raise ValueError("edge ids must be dense integers starting at 0")
    return Digraph(
        n_vertices=len(vertices),
        target=doc["target"],
        tails=[d["tail"] for d in edges],
        heads=[d["head"] for d in edges],
        costs=[int(d["scaled_cost"]) for d in edges],
        scale=doc.get("scale", 1),
        edge_names=[d["name"] for d in edges],
        vertex_names=[d["name"] for d in vertices],
    )
