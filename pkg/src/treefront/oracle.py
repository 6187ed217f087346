"""Brute-force reference solvers.

Deliberately implementation-independent from the decomposition DP: each
oracle enumerates the raw combinatorial space (vertex subsets, edge
subsets, vertex permutations), computes costs from first principles and
filters with its own quadratic pairwise pass.  The only shared code is
the ``dominates`` predicate.  Oracles return witnesses alongside the
vectors so tests can re-verify costs independently.

Size guards keep the enumerations honest: 2^n subsets for cuts
(n <= 20), C(m, n-1) edge subsets for spanning trees (n <= 10),
(n-1)!/2 closed tours (n <= 9).
"""

from __future__ import annotations

from itertools import combinations, permutations

from .fronts import Vec, dominates
from .graphs import Graph


def pareto_filter_with_witness(items: list[tuple[Vec, object]]) -> list[tuple[Vec, object]]:
    """Quadratic nondominance filter; first witness wins on equal vectors."""
    kept: list[tuple[Vec, object]] = []
    for vec, wit in items:
        if any(dominates(other, vec) for other, _ in items):
            continue
        if any(other == vec for other, _ in kept):
            continue
        kept.append((vec, wit))
    kept.sort(key=lambda it: it[0])
    return kept


def _zero(d: int) -> Vec:
    return (0,) * d


def cut_cost(g: Graph, source_side: set[int] | frozenset[int]) -> Vec:
    """Cost of the s-t cut whose source side is {s} union the given
    inner vertices (s = 0, t = n+1)."""
    cost = list(_zero(g.d))
    for u, v, w in g.edges:
        u_src = u == 0 or u in source_side
        v_src = v == 0 or v in source_side
        if u == g.n + 1:
            u_src = False
        if v == g.n + 1:
            v_src = False
        if u_src != v_src:
            for k in range(g.d):
                cost[k] += w[k]
    return tuple(cost)


def brute_cuts(g: Graph) -> list[tuple[Vec, frozenset[int]]]:
    """All Pareto-optimal s-t cuts by full subset enumeration."""
    if g.n > 20:
        raise ValueError(f"brute_cuts enumerates 2^n subsets; n={g.n} is too large")
    inner = list(g.inner_vertices())
    items = []
    for mask in range(1 << g.n):
        side = frozenset(v for i, v in enumerate(inner) if mask >> i & 1)
        items.append((cut_cost(g, side), side))
    return pareto_filter_with_witness(items)


def is_spanning_tree(g: Graph, edge_indices) -> bool:
    parent = list(range(g.n + 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for idx in edge_indices:
        u, v, _ = g.edges[idx]
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return len(edge_indices) == g.n - 1


def tree_cost(g: Graph, edge_indices) -> Vec:
    cost = list(_zero(g.d))
    for idx in edge_indices:
        for k in range(g.d):
            cost[k] += g.edges[idx][2][k]
    return tuple(cost)


def brute_mst(g: Graph) -> list[tuple[Vec, frozenset[int]]]:
    """All Pareto-optimal spanning trees by edge-subset enumeration."""
    if g.n > 10:
        raise ValueError(f"brute_mst enumerates edge subsets; n={g.n} is too large")
    if g.n <= 1:
        return [(_zero(g.d), frozenset())]
    items = []
    for combo in combinations(range(g.m), g.n - 1):
        if is_spanning_tree(g, combo):
            items.append((tree_cost(g, combo), frozenset(combo)))
    return pareto_filter_with_witness(items)


def _edge_index(g: Graph) -> dict[tuple[int, int], int]:
    idx: dict[tuple[int, int], int] = {}
    for i, (u, v, _) in enumerate(g.edges):
        key = (min(u, v), max(u, v))
        if key in idx:
            raise ValueError(
                "brute_tsp expects a simple graph (parallel edges present)"
            )
        idx[key] = i
    return idx


def tour_cost(g: Graph, edge_indices) -> Vec:
    return tree_cost(g, edge_indices)


def brute_tsp(g: Graph) -> list[tuple[Vec, frozenset[int]]]:
    """All Pareto-optimal Hamiltonian cycles by permutation enumeration
    (vertex 1 fixed, orientation canonicalized)."""
    if g.n > 9:
        raise ValueError(f"brute_tsp enumerates (n-1)!/2 tours; n={g.n} is too large")
    if g.n < 3:
        return []
    index = _edge_index(g)
    items = []
    rest = list(range(2, g.n + 1))
    for perm in permutations(rest):
        if perm[0] > perm[-1]:
            continue  # one orientation per tour
        cycle = (1, *perm, 1)
        edges = []
        ok = True
        for a, b in zip(cycle, cycle[1:]):
            key = (min(a, b), max(a, b))
            if key not in index:
                ok = False
                break
            edges.append(index[key])
        if ok:
            items.append((tour_cost(g, edges), frozenset(edges)))
    return pareto_filter_with_witness(items)
