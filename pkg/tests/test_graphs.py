"""Graph core: distances, switches, oracles, serialization."""

from random import Random

import pytest

from pivotlab.graphs import (
    Digraph,
    DisconnectedVertexError,
    NegativeCycleError,
    NotAnEdgeError,
    Policy,
    PolicyCycleError,
    SelfReplaceWarning,
    apply_switch,
    improving_switches,
    load_graph_json,
    optimal_distances,
    optimal_edge_set,
    policy_objective,
    random_dag,
    random_policy,
    save_graph_json,
    tree_distances,
)


def parallel_pair():
    # v --5--> t and v --2--> t
    return Digraph(2, 1, tails=[0, 0], heads=[1, 1], costs=[5, 2])


def chain():
    # v --2--> u --3--> t
    return Digraph(3, 2, tails=[0, 1], heads=[1, 2], costs=[2, 3])


def test_single_edge_distance():
    g = Digraph(2, 1, tails=[0], heads=[1], costs=[5])
    assert tree_distances(g, Policy((0, None))) == {0: 5, 1: 0}


def test_chain_distances():
    g = chain()
    assert tree_distances(g, Policy((0, 1, None))) == {0: 5, 1: 3, 2: 0}


def test_policy_cycle_detected():
    g = Digraph(3, 2, tails=[0, 1, 0], heads=[1, 0, 2], costs=[1, 1, 1])
    with pytest.raises(PolicyCycleError):
        tree_distances(g, Policy((0, 1, None)))


def test_optimal_distances_parallel():
    g = parallel_pair()
    assert optimal_distances(g) == {0: 2, 1: 0}


def test_unreachable_rejected_at_construction():
    with pytest.raises(DisconnectedVertexError):
        # vertex 0 only reaches vertex 1 which has no outgoing edge
        Digraph(3, 2, tails=[0, 1], heads=[1, 0], costs=[1, 1])


def test_improving_switches_parallel():
    g = parallel_pair()
    assert improving_switches(g, Policy((0, None))) == {1}
    assert improving_switches(g, Policy((1, None))) == set()


def test_apply_switch():
    g = parallel_pair()
    pol = apply_switch(g, Policy((0, None)), 1)
    assert tree_distances(g, pol)[0] == 2
    with pytest.raises(NotAnEdgeError):
        apply_switch(g, pol, 7)
    with pytest.warns(SelfReplaceWarning):
        assert apply_switch(g, pol, 1) == pol


def test_non_improving_switch_still_valid_on_dag():
    g = parallel_pair()
    pol = apply_switch(g, Policy((1, None)), 0)
    assert tree_distances(g, pol)[0] == 5


def test_objective_strictly_decreases_on_improving_switch():
    rng = Random(4)
    for _ in range(20):
        g = random_dag(rng, rng.randrange(3, 9), extra_edges=rng.randrange(0, 8))
        pol = random_policy(g, rng)
        for e in improving_switches(g, pol):
            assert policy_objective(g, apply_switch(g, pol, e)) < policy_objective(g, pol)


def _brute_force_distances(g: Digraph) -> dict[int, int]:
    # enumerate all simple paths to the target
    best = {g.target: 0}

    def walk(v, cost, seen):
        if v == g.target:
            if v not in best or cost < best[v]:
                pass
            return cost
        out = None
        for e in g.out_edges[v]:
            h = g.heads[e]
            if h in seen:
                continue
            sub = walk(h, 0, seen | {h})
            if sub is not None:
                cand = g.costs[e] + sub
                if out is None or cand < out:
                    out = cand
        return out

    return {v: walk(v, 0, {v}) for v in range(g.n_vertices)}


def test_optimal_distances_against_path_enumeration():
    rng = Random(11)
    for _ in range(25):
        g = random_dag(rng, rng.randrange(2, 7), extra_edges=rng.randrange(0, 6))
        assert optimal_distances(g) == _brute_force_distances(g)


def test_bellman_ford_on_cyclic_graph():
    # cycle 0 <-> 1 plus exits; no negative cycle
    g = Digraph(
        3, 2,
        tails=[0, 1, 0, 1],
        heads=[1, 0, 2, 2],
        costs=[1, 1, 10, 3],
    )
    assert not g.is_acyclic
    assert optimal_distances(g) == {0: 4, 1: 3, 2: 0}


def test_negative_cycle_detected():
    g = Digraph(
        3, 2,
        tails=[0, 1, 0, 1],
        heads=[1, 0, 2, 2],
        costs=[-2, 1, 10, 3],
    )
    with pytest.raises(NegativeCycleError):
        optimal_distances(g)


def test_optimal_edge_set_examples():
    g = parallel_pair()
    assert optimal_edge_set(g) == {1}
    assert optimal_edge_set(g, {0}) == {0}  # only path available is optimal


def test_optimal_edge_set_disconnected_subset():
    g = chain()
    with pytest.raises(DisconnectedVertexError):
        optimal_edge_set(g, {0})  # u loses its only edge


def test_improving_empty_iff_optimal():
    rng = Random(19)
    for _ in range(30):
        g = random_dag(rng, rng.randrange(2, 8), extra_edges=rng.randrange(0, 8))
        pol = random_policy(g, rng)
        dist = tree_distances(g, pol)
        opt = optimal_distances(g)
        assert (not improving_switches(g, pol)) == (dist == opt)


def test_json_round_trip(tmp_path):
    rng = Random(8)
    g = random_dag(rng, 6, extra_edges=5)
    path = tmp_path / "g.json"
    save_graph_json(g, str(path))
    g2 = load_graph_json(str(path))
    assert g2.n_vertices == g.n_vertices
    assert g2.tails == g.tails
    assert g2.heads == g.heads
    assert g2.costs == g.costs
    assert g2.target == g.target
    assert g2.edge_names == g.edge_names


def test_json_big_costs_survive(tmp_path):
    big = 2**200 + 7
    g = Digraph(2, 1, tails=[0], heads=[1], costs=[big], scale=3)
    path = tmp_path / "big.json"
    save_graph_json(g, str(path))
    g2 = load_graph_json(str(path))
    assert g2.costs[0] == big
    assert g2.scale == 3


def test_tree_distance_equals_optimal_when_edges_all_optimal():
    rng = Random(23)
    for _ in range(20):
        g = random_dag(rng, rng.randrange(2, 8), extra_edges=rng.randrange(0, 8))
        opt_edges = optimal_edge_set(g)
        # build a policy from optimal edges only
        chosen = [None] * g.n_vertices
        ok = True
        for v in range(g.n_vertices):
            if v == g.target:
                continue
            cands = [e for e in g.out_edges[v] if e in opt_edges]
            if not cands:
                ok = False
                break
            chosen[v] = cands[0]
        assert ok
        pol = Policy(tuple(chosen))
        assert tree_distances(g, pol) == optimal_distances(g)
