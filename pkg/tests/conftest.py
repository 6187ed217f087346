"""Shared instance generators and helpers for the test suite.

All generators take an explicit ``random.Random`` so every test is
reproducible from its seed.  Costs are produced directly in integer
units (one text decimal = 10 units).
"""

from __future__ import annotations

import random

from treefront.graphs import Graph
from treefront.td import TreeDecomposition


def random_units(rng: random.Random, d: int, hi: int = 100) -> tuple[int, ...]:
    """A cost vector with entries uniform over {0, 0.1, ..., hi/10}."""
    return tuple(rng.randint(0, hi) for _ in range(d))


def random_cut_graph(rng: random.Random, n: int, d: int, p: float = 0.4) -> Graph:
    """Random s-t cut instance: source 0, sink n+1, inner vertices 1..n."""
    edges = []
    for u in range(1, n + 1):
        for v in range(u + 1, n + 1):
            if rng.random() < p:
                edges.append((u, v, random_units(rng, d)))
    for v in range(1, n + 1):
        if rng.random() < 0.6:
            edges.append((0, v, random_units(rng, d)))
        if rng.random() < 0.6:
            edges.append((v, n + 1, random_units(rng, d)))
    return Graph(n, d, edges)


def elimination_td(graph: Graph) -> TreeDecomposition:
    """Tree decomposition of the inner-vertex subgraph via min-degree
    elimination; bag i+1 = {order[i]} plus its later fill-neighbors."""
    n = graph.n
    work: dict[int, set[int]] = {v: set() for v in range(1, n + 1)}
    for u, v, _ in graph.edges:
        if 1 <= u <= n and 1 <= v <= n and u != v:
            work[u].add(v)
            work[v].add(u)
    remaining = set(range(1, n + 1))
    order: list[int] = []
    bag_of: dict[int, frozenset[int]] = {}
    while remaining:
        v = min(remaining, key=lambda x: (len(work[x] & remaining), x))
        nbrs = (work[v] & remaining) - {v}
        bag_of[v] = frozenset({v} | nbrs)
        for a in nbrs:
            work[a] |= nbrs - {a}
        order.append(v)
        remaining.remove(v)
    pos = {v: i for i, v in enumerate(order)}
    bags = {i + 1: bag_of[v] for i, v in enumerate(order)}
    edges = []
    for i, v in enumerate(order):
        later = sorted(bag_of[v] - {v}, key=lambda u: pos[u])
        if later:
            edges.append((i + 1, pos[later[0]] + 1))
        elif i + 1 < n:
            edges.append((i + 1, i + 2))
    if not bags:
        bags[1] = frozenset()
    return TreeDecomposition(num_vertices=n, bags=bags, edges=edges)


def random_connected_graph(rng: random.Random, n: int, d: int, extra: float = 0.35) -> Graph:
    """Connected graph on 1..n: a random spanning tree plus extra edges."""
    verts = list(range(1, n + 1))
    rng.shuffle(verts)
    present: set[tuple[int, int]] = set()
    edges = []
    for i in range(1, n):
        u = verts[rng.randrange(i)]
        v = verts[i]
        a, b = min(u, v), max(u, v)
        present.add((a, b))
        edges.append((a, b, random_units(rng, d)))
    for u in range(1, n + 1):
        for v in range(u + 1, n + 1):
            if (u, v) not in present and rng.random() < extra:
                present.add((u, v))
                edges.append((u, v, random_units(rng, d)))
    return Graph(n, d, edges)


def random_tsp_graph(rng: random.Random, n: int, d: int = 2, extra: float = 0.3) -> Graph:
    """Graph on 1..n; most draws seed a hidden Hamiltonian cycle so the
    tour front is usually nonempty, the rest are bare random graphs."""
    present: set[tuple[int, int]] = set()
    edges = []
    if rng.random() < 0.8:
        cyc = list(range(1, n + 1))
        rng.shuffle(cyc)
        for i in range(n):
            u, v = cyc[i], cyc[(i + 1) % n]
            a, b = min(u, v), max(u, v)
            if (a, b) not in present:
                present.add((a, b))
                edges.append((a, b, random_units(rng, d)))
    for u in range(1, n + 1):
        for v in range(u + 1, n + 1):
            if (u, v) not in present and rng.random() < extra:
                present.add((u, v))
                edges.append((u, v, random_units(rng, d)))
    return Graph(n, d, edges)


def random_front(rng: random.Random, k: int, span: int = 10**6) -> list:
    """A reduced 2-objective front of size k: strictly increasing first
    coordinate, strictly decreasing second, payload = position."""
    span = max(span, k)
    xs = sorted(rng.sample(range(span), k))
    ys = sorted(rng.sample(range(span), k), reverse=True)
    return [((x, y), i) for i, (x, y) in enumerate(zip(xs, ys))]
