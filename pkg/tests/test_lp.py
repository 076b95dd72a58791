"""Exact LP kernel: basic solutions, reduced costs, pivots, flow encoding."""

from fractions import Fraction
from random import Random

import pytest

from pivotlab import lp
from pivotlab.graphs import Digraph, Policy, random_dag, random_policy, tree_distances_list
from pivotlab.lp import (
    DegenerateError,
    SingularBasisError,
    UnboundedError,
    basic_solution,
    brute_force_optimum,
    make_lp,
    pivot_lp,
    random_facet_lp,
    reduced_costs,
    sp_to_lp,
    tree_basis,
)


def test_identity_basic_solution():
    prob = make_lp([[1]], [1], [1])
    x, feasible = basic_solution(prob, (0,))
    assert x == [Fraction(1)]
    assert feasible


def test_infeasible_basis_flagged():
    prob = make_lp([[1, -1]], [-1], [0, 0])
    x, feasible = basic_solution(prob, (0,))
    assert x[0] == Fraction(-1)
    assert not feasible


def test_singular_basis_raises():
    prob = make_lp([[1, 2, 2], [2, 4, 1]], [1, 1], [0, 0, 0])
    with pytest.raises(SingularBasisError):
        basic_solution(prob, (0, 1))  # parallel columns


def test_sp_lp_shapes_and_signs():
    g = Digraph(3, 2, tails=[0, 1, 0], heads=[1, 2, 2], costs=[2, 3, 9])
    prob, row_of, vertex_of_row = sp_to_lp(g)
    assert prob.n_cols == g.n_edges
    assert prob.n_rows == g.n_vertices - 1
    # edge 0 = (0,1): +1 at row of 0, -1 at row of 1
    assert prob.A[row_of[0]][0] == 1
    assert prob.A[row_of[1]][0] == -1
    # edge 1 = (1, target): single +1
    col1 = [prob.A[r][1] for r in range(prob.n_rows)]
    assert col1.count(1) == 1 and col1.count(0) == prob.n_rows - 1
    assert vertex_of_row[row_of[0]] == 0


def test_sp_lp_flows_are_descendant_counts():
    # chain v -> u -> t: flow on (u,t) carries both supplies
    g = Digraph(3, 2, tails=[0, 1], heads=[1, 2], costs=[2, 3])
    prob, _, _ = sp_to_lp(g)
    x, feasible = basic_solution(prob, tree_basis(g, Policy((0, 1, None))))
    assert feasible
    assert x == [Fraction(1), Fraction(2)]


def test_reduced_costs_zero_on_basis_and_duals_are_distances():
    rng = Random(5)
    for _ in range(15):
        g = random_dag(rng, rng.randrange(2, 7), extra_edges=rng.randrange(0, 6))
        pol = random_policy(g, rng)
        prob, row_of, _ = sp_to_lp(g)
        basis = tree_basis(g, pol)
        cbar, y = reduced_costs(prob, basis)
        dist = tree_distances_list(g, pol.chosen)
        for j in basis:
            assert cbar[j] == 0
        for v in range(g.n_vertices):
            if v != g.target:
                assert y[row_of[v]] == dist[v]
        for e in range(g.n_edges):
            yh = 0 if g.heads[e] == g.target else y[row_of[g.heads[e]]]
            assert cbar[e] == g.costs[e] + yh - y[row_of[g.tails[e]]]


def test_pivot_matches_graph_switch():
    g = Digraph(2, 1, tails=[0, 0], heads=[1, 1], costs=[5, 2])
    prob, _, _ = sp_to_lp(g)
    basis, leaving = pivot_lp(prob, (0,), 1)
    assert basis == (1,)
    assert leaving == 0


def test_pivot_requires_negative_reduced_cost():
    g = Digraph(2, 1, tails=[0, 0], heads=[1, 1], costs=[5, 2])
    prob, _, _ = sp_to_lp(g)
    with pytest.raises(ValueError):
        pivot_lp(prob, (1,), 0)


def test_pivot_strictly_decreases_objective():
    rng = Random(9)
    hits = 0
    for _ in range(30):
        g = random_dag(rng, rng.randrange(2, 7), extra_edges=rng.randrange(1, 7))
        pol = random_policy(g, rng)
        prob, _, _ = sp_to_lp(g)
        basis = tree_basis(g, pol)
        cbar, _ = reduced_costs(prob, basis)
        entering = next((j for j in range(prob.n_cols) if cbar[j] < 0), None)
        if entering is None:
            continue
        hits += 1
        before = lp.objective_value(prob, basis)
        after_basis, _ = pivot_lp(prob, basis, entering)
        assert lp.objective_value(prob, after_basis) < before
    assert hits > 5


def test_unbounded_detected():
    # min -x subject to 0x = 0 has no blocking variable
    prob = make_lp([[0, 1]], [1], [-1, 0])
    with pytest.raises(UnboundedError):
        pivot_lp(prob, (1,), 0)


def test_degenerate_tie_detected():
    # two rows hit the ratio bound simultaneously
    prob = make_lp(
        [[1, 0, 1], [0, 1, 1]],
        [1, 1],
        [0, 0, -1],
    )
    with pytest.raises(DegenerateError):
        pivot_lp(prob, (0, 1), 2)


def test_random_facet_lp_base_case():
    g = Digraph(2, 1, tails=[0], heads=[1], costs=[3])
    prob, _, _ = sp_to_lp(g)
    basis, log = random_facet_lp(prob, [0], (0,), Random(1))
    assert basis == (0,)
    assert log == []


def test_random_facet_lp_against_brute_force():
    rng = Random(31)
    done = 0
    while done < 12:
        # random 1x3 LP with a feasible bounded start
        a = [rng.randrange(1, 6) for _ in range(3)]
        c = [rng.randrange(-5, 6) for _ in range(3)]
        prob = make_lp([a], [rng.randrange(2, 10)], c)
        try:
            best, bases = brute_force_optimum(prob)
        except ValueError:
            continue
        # need a non-degenerate run: all basic values positive and unique optimum
        start = next(
            (
                (j,) for j in range(3)
                if basic_solution(prob, (j,))[1]
                and basic_solution(prob, (j,))[0][j] > 0
            ),
            None,
        )
        if start is None:
            continue
        try:
            basis, _ = random_facet_lp(prob, range(3), start, rng)
        except DegenerateError:
            continue
        done += 1
        assert lp.objective_value(prob, basis) == best


def test_brute_force_no_feasible_basis():
    prob = make_lp([[1, 1]], [-1], [0, 0])
    with pytest.raises(ValueError):
        brute_force_optimum(prob)


def test_reduced_costs_nonnegative_exactly_at_termination():
    rng = Random(71)
    for _ in range(10):
        g = random_dag(rng, rng.randrange(2, 7), extra_edges=rng.randrange(1, 7))
        pol = random_policy(g, rng)
        prob, _, _ = sp_to_lp(g)
        basis = lp.tree_basis(g, pol)
        final, log = random_facet_lp(prob, range(g.n_edges), basis, rng)
        cbar, _ = reduced_costs(prob, final)
        assert all(c >= 0 for c in cbar)
        # mid-run bases (all but the last) still have a negative entry
        replay = list(basis)
        for entering, leaving in log[:-1] if log else []:
            replay[replay.index(leaving)] = entering
            mid_cbar, _ = reduced_costs(prob, replay)
            assert any(c < 0 for c in mid_cbar)


def test_flow_conservation_and_feasibility_after_every_pivot():
    rng = Random(73)
    g = random_dag(rng, 6, extra_edges=8)
    pol = random_policy(g, rng)
    prob, _, _ = sp_to_lp(g)
    basis = list(lp.tree_basis(g, pol))
    _final, log = random_facet_lp(prob, range(g.n_edges), tuple(basis), rng)
    for entering, leaving in log:
        basis[basis.index(leaving)] = entering
        x, feasible = basic_solution(prob, basis)
        assert feasible
        for r in range(prob.n_rows):
            lhs = sum(prob.A[r][j] * x[j] for j in range(prob.n_cols))
            assert lhs == prob.b[r]
