"""Exact-arithmetic standard-form LP kernel and the shortest-path encoding.

Instances are desk scale (at most a few hundred columns), so every basis
operation is a fresh fraction-free elimination; exactness matters more than
factorization updates here. Degeneracy is detected and reported, never
perturbed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

from .graphs import Digraph, Policy


class SingularBasisError(Exception):
    """The selected basis columns are linearly dependent."""


class UnboundedError(Exception):
    """No leaving variable: the improving ray is unbounded."""


class DegenerateError(Exception):
    """Tie or zero step in the ratio test; the instance is degenerate."""


@dataclass(frozen=True)
class StdFormLP:
    """min c'x subject to Ax = b, x >= 0, with exact rational data."""

    A: tuple[tuple[Fraction, ...], ...]  # m rows, n columns
    b: tuple[Fraction, ...]
    c: tuple[Fraction, ...]

    @property
    def n_rows(self) -> int:
        return len(self.A)

    @property
    def n_cols(self) -> int:
        return len(self.c)


def make_lp(A: Sequence[Sequence], b: Sequence, c: Sequence) -> StdFormLP:
    return StdFormLP(
        tuple(tuple(Fraction(x) for x in row) for row in A),
        tuple(Fraction(x) for x in b),
        tuple(Fraction(x) for x in c),
    )


def _solve_exact(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Solve the square system rows * x = rhs by fraction-free elimination.

    Rows are scaled to integers, eliminated Bareiss-style (every division is
    exact), and back-substituted with rationals.
    """
    m = len(rows)
    aug: list[list[int]] = []
    for i in range(m):
        denom = lcm(*(x.denominator for x in rows[i]), rhs[i].denominator)
        aug.append([int(x * denom) for x in rows[i]] + [int(rhs[i] * denom)])
    prev = 1
    for col in range(m):
        pivot_row = next((r for r in range(col, m) if aug[r][col] != 0), None)
        if pivot_row is None:
            raise SingularBasisError(f"no pivot in column {col}")
        if pivot_row != col:
            aug[col], aug[pivot_row] = aug[pivot_row], aug[col]
        p = aug[col][col]
        for r in range(col + 1, m):
            factor = aug[r][col]
            row_r = aug[r]
            row_p = aug[col]
            for j in range(col, m + 1):
                row_r[j] = (p * row_r[j] - factor * row_p[j]) // prev
        prev = p
    x: list[Fraction] = [Fraction(0)] * m
    for i in range(m - 1, -1, -1):
        acc = Fraction(aug[i][m])
        for j in range(i + 1, m):
            acc -= aug[i][j] * x[j]
        x[i] = acc / aug[i][i]
    return x


def _basis_columns(lp: StdFormLP, basis: Sequence[int]) -> list[list[Fraction]]:
    return [[lp.A[r][j] for j in basis] for r in range(lp.n_rows)]


def basic_solution(lp: StdFormLP, basis: Sequence[int]) -> tuple[list[Fraction], bool]:
    """The basic solution for the basis and whether it is feasible (x_B >= 0)."""
    if len(basis) != lp.n_rows:
        raise ValueError("basis size must equal the number of rows")
    xb = _solve_exact(_basis_columns(lp, basis), list(lp.b))
    x = [Fraction(0)] * lp.n_cols
    for k, j in enumerate(basis):
        x[j] = xb[k]
    return x, all(v >= 0 for v in xb)


def reduced_costs(
    lp: StdFormLP, basis: Sequence[int]
) -> tuple[list[Fraction], list[Fraction]]:
    """Reduced cost vector and the dual vector y solving B'y = c_B."""
    cols = _basis_columns(lp, basis)
    bt = [[cols[r][k] for r in range(lp.n_rows)] for k in range(lp.n_rows)]
    y = _solve_exact(bt, [lp.c[j] for j in basis])
    cbar = []
    for j in range(lp.n_cols):
        acc = lp.c[j]
        for r in range(lp.n_rows):
            acc -= lp.A[r][j] * y[r]
        cbar.append(acc)
    return cbar, y


def objective_value(lp: StdFormLP, basis: Sequence[int]) -> Fraction:
    x, _ = basic_solution(lp, basis)
    return sum((lp.c[j] * x[j] for j in range(lp.n_cols)), Fraction(0))


def pivot_lp(lp: StdFormLP, basis: Sequence[int], entering: int) -> tuple[tuple[int, ...], int]:
    """One pivot with `entering` joining the basis; returns (basis, leaving).

    Requires a strictly negative reduced cost for the entering column. Raises
    UnboundedError when no basic variable blocks the move, DegenerateError
    on a tie or a zero-length step.
    """
    cbar, _ = reduced_costs(lp, basis)
    if cbar[entering] >= 0:
        raise ValueError(
            f"column {entering} has reduced cost {cbar[entering]} >= 0"
        )
    xb = _solve_exact(_basis_columns(lp, basis), list(lp.b))
    direction = _solve_exact(
        _basis_columns(lp, basis), [lp.A[r][entering] for r in range(lp.n_rows)]
    )
    best: Fraction | None = None
    best_k: int | None = None
    tie = False
    for k, d in enumerate(direction):
        if d > 0:
            ratio = xb[k] / d
            if best is None or ratio < best:
                best, best_k, tie = ratio, k, False
            elif ratio == best:
                tie = True
    if best_k is None:
        raise UnboundedError(f"column {entering} improves without bound")
    if tie or best == 0:
        raise DegenerateError(
            f"ratio test for column {entering} is not uniquely resolved"
        )
    new_basis = list(basis)
    leaving = new_basis[best_k]
    new_basis[best_k] = entering
    return tuple(new_basis), leaving


def sp_to_lp(g: Digraph) -> tuple[StdFormLP, dict[int, int], list[int]]:
    """Shortest-path LP of the graph: min-cost flow with unit supply per
    vertex.

    Rows are the non-target vertices (in id order); columns are the edges by
    id. Column e has +1 at its tail row and -1 at its head row; the head
    entry is absent when the head is the target. Returns the LP, the
    vertex-to-row map, and the row-to-vertex list.
    """
    vertex_of_row = [v for v in range(g.n_vertices) if v != g.target]
    row_of_vertex = {v: r for r, v in enumerate(vertex_of_row)}
    n_rows = len(vertex_of_row)
    A = [[Fraction(0)] * g.n_edges for _ in range(n_rows)]
    for e in range(g.n_edges):
        A[row_of_vertex[g.tails[e]]][e] = Fraction(1)
        if g.heads[e] != g.target:
            A[row_of_vertex[g.heads[e]]][e] = Fraction(-1)
    lp = StdFormLP(
        tuple(tuple(row) for row in A),
        tuple(Fraction(1) for _ in range(n_rows)),
        tuple(Fraction(c) for c in g.costs),
    )
    return lp, row_of_vertex, vertex_of_row


def tree_basis(g: Digraph, policy: Policy) -> tuple[int, ...]:
    """The policy's chosen edges as an ordered basis of the shortest-path LP."""
    return tuple(sorted(policy.edge_set()))


def random_facet_lp(
    lp: StdFormLP, allowed: Sequence[int], basis: Sequence[int], rng
) -> tuple[tuple[int, ...], list[tuple[int, int]]]:
    """Facet-removal recursion on the LP restricted to the `allowed` columns.

    Candidate selection draws a uniform index into the id-sorted candidate
    list, the same discipline as the graph engine, so seeded runs stay in
    lockstep. Returns the optimal basis and the pivot log.
    """
    allowed_set = frozenset(allowed)
    cur = tuple(basis)
    if not set(cur) <= allowed_set:
        raise ValueError("basis must lie inside the allowed column set")
    log: list[tuple[int, int]] = []

    # Each frame is [removed_stack, k]; see the graph engine for the shape of
    # this collapse: descend removing candidates in pick order, then test
    # improvement in reverse while the basis evolves globally.
    in_f = {j: (j in allowed_set) for j in range(lp.n_cols)}

    def candidates() -> list[int]:
        return [j for j in range(lp.n_cols) if in_f[j] and j not in cur_set]

    cur_set = set(cur)
    first = candidates()
    order: list[int] = []
    while first:
        pick = first[rng.randrange(len(first))]
        order.append(pick)
        first.remove(pick)
    for j in order:
        in_f[j] = False
    stack = [[order, len(order) - 1]]
    while stack:
        frame = stack[-1]
        cands, k = frame
        if k < 0:
            stack.pop()
            continue
        j = cands[k]
        frame[1] = k - 1
        in_f[j] = True
        cbar, _ = reduced_costs(lp, cur)
        if cbar[j] < 0:
            new_basis, leaving = pivot_lp(lp, cur, j)
            log.append((j, leaving))
            cur = new_basis
            cur_set = set(cur)
            sub = candidates()
            suborder: list[int] = []
            while sub:
                pick = sub[rng.randrange(len(sub))]
                suborder.append(pick)
                sub.remove(pick)
            for jj in suborder:
                in_f[jj] = False
            stack.append([suborder, len(suborder) - 1])
    return cur, log


def lp_to_json_dict(lp: StdFormLP) -> dict:
    """Debug dump: the exact matrices as numerator/denominator strings."""

    def enc(x: Fraction) -> str:
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)

    return {
        "A": [[enc(x) for x in row] for row in lp.A],
        "b": [enc(x) for x in lp.b],
        "c": [enc(x) for x in lp.c],
    }


def brute_force_optimum(lp: StdFormLP) -> tuple[Fraction, list[tuple[int, ...]]]:
    """Enumerate every feasible basis; return the best value and its bases."""
    best: Fraction | None = None
    argmin: list[tuple[int, ...]] = []
    for basis in itertools.combinations(range(lp.n_cols), lp.n_rows):
        try:
            x, feasible = basic_solution(lp, basis)
        except SingularBasisError:
            continue
        if not feasible:
            continue
        val = sum((lp.c[j] * x[j] for j in range(lp.n_cols)), Fraction(0))
        if best is None or val < best:
            best, argmin = val, [basis]
        elif val == best:
            argmin.append(basis)
    if best is None:
        raise ValueError("no feasible basis")
    return best, argmin
