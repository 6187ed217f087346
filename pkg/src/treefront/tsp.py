"""Multiobjective traveling salesperson DP over nice tree decompositions
with introduce-edge nodes.

A table key is a tour state ``(D0, D1, D2, M)``: the bag split by
current degree (0, 1 or 2) and a perfect matching ``M`` on the degree-1
vertices pairing up the endpoints of each open path.  Solutions are
edge subsets of the introduced edges forming vertex-disjoint simple
paths whose endpoints are exactly ``D1``, with every forgotten vertex
already at degree 2.  The tour may only close — one cycle through every
vertex — when the whole graph has been seen: either the closing edge
merges the last open path's endpoints, or a join overlays two children
whose open paths concatenate into a single cycle.  Any other cycle is
rejected.  After closure the state is all-``D2`` with an empty
matching, which the final forgets drain to the root's empty state.
"""

from __future__ import annotations

import tempfile

from .engine import DpConfig, DpProblem, SolveResult, run_dp
from .fronts import EMPTY_SOLUTION as EMPTY
from .fronts import Vec, reduce_entries, vec_add
from .graphs import Graph, require_inner_edges
from .heuristic import family_join
from .mst import edge_element
from .store import SolutionStore
from .td import FORGET, INTRODUCE, INTRODUCE_EDGE, NiceTD, count_edge_nodes

State = tuple  # (d0, d1, d2, matching), all sorted tuples


def validate_state(state, bag=None) -> bool:
    """True iff the state is well-formed: D0/D1/D2 disjoint (covering
    the bag when given), |D1| even, and M a perfect matching on D1."""
    try:
        d0, d1, d2, m = state
    except (TypeError, ValueError):
        return False
    parts = (tuple(d0), tuple(d1), tuple(d2))
    union: set = set()
    total = 0
    for part in parts:
        if tuple(sorted(part)) != part:
            return False
        union.update(part)
        total += len(part)
    if total != len(union):
        return False
    if bag is not None and union != set(bag):
        return False
    if len(d1) % 2:
        return False
    matched: set = set()
    for pair in m:
        if len(pair) != 2:
            return False
        a, b = pair
        if a >= b or a in matched or b in matched:
            return False
        matched.update(pair)
    return matched == set(d1)


def _degree(state: State, v: int) -> int:
    d0, d1, d2, _ = state
    if v in d0:
        return 0
    if v in d1:
        return 1
    if v in d2:
        return 2
    raise KeyError(v)


def _partner(matching, v: int) -> int:
    for a, b in matching:
        if a == v:
            return b
        if b == v:
            return a
    raise KeyError(v)


def _pair(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def _without(items, *gone) -> tuple:
    drop = set(gone)
    return tuple(x for x in items if x not in drop)


def _with(items, *new) -> tuple:
    return tuple(sorted(set(items) | set(new)))


def _overlay(m1, m2):
    """Decompose the multigraph M1 ∪ M2 into open paths and cycles.

    Returns (path endpoint pairs, interior path vertices, cycle count,
    cycle vertices)."""
    edges = list(m1) + list(m2)
    adj: dict[int, list[tuple[int, int]]] = {}
    for idx, (a, b) in enumerate(edges):
        adj.setdefault(a, []).append((idx, b))
        adj.setdefault(b, []).append((idx, a))
    used = [False] * len(edges)
    paths: list[tuple[int, int]] = []
    interior: set[int] = set()
    ends = sorted(v for v, inc in adj.items() if len(inc) == 1)
    done: set[int] = set()
    for start in ends:
        if start in done:
            continue
        cur = start
        while True:
            step = None
            for idx, other in adj[cur]:
                if not used[idx]:
                    step = (idx, other)
                    break
            if step is None:
                break
            used[step[0]] = True
            if cur != start:
                interior.add(cur)
            cur = step[1]
        done.add(start)
        done.add(cur)
        paths.append(_pair(start, cur))
    cycles = 0
    cycle_vertices: set[int] = set()
    for idx in range(len(edges)):
        if used[idx]:
            continue
        cycles += 1
        used[idx] = True
        first, cur = edges[idx]
        cycle_vertices.update((first, cur))
        while True:
            step = None
            for jdx, other in adj[cur]:
                if not used[jdx]:
                    step = (jdx, other)
                    break
            if step is None:
                break
            used[step[0]] = True
            cur = step[1]
            cycle_vertices.add(cur)
    return paths, interior, cycles, cycle_vertices


def _join_pair(bag, s1: State, s2: State, allow_closure: bool) -> State | None:
    """Target state of overlaying two child states, or None if they are
    incompatible.  ``allow_closure`` admits the single-cycle tour
    completion; otherwise any cycle rejects the pair."""
    degs = {}
    for v in bag:
        total = _degree(s1, v) + _degree(s2, v)
        if total > 2:
            return None
        degs[v] = total
    paths, interior, cycles, cycle_vertices = _overlay(s1[3], s2[3])
    if cycles:
        if not allow_closure or cycles != 1 or paths:
            return None
        if any(d != 2 for d in degs.values()):
            return None
        return ((), (), tuple(bag), ())
    endpoints: set[int] = set()
    for a, b in paths:
        if degs[a] != 1 or degs[b] != 1:
            return None
        endpoints.update((a, b))
    d0 = tuple(v for v in bag if degs[v] == 0)
    d1 = tuple(v for v in bag if degs[v] == 1)
    d2 = tuple(v for v in bag if degs[v] == 2)
    if set(d1) != endpoints:
        return None
    return (d0, d1, d2, tuple(sorted(paths)))


def join_compatible(s1: State, s2: State, target: State) -> bool:
    """True iff overlaying the child states yields exactly ``target``.
    Cycles in the overlay always reject here; tour completion is a
    solver-level step tied to full vertex coverage."""
    bag = tuple(sorted(set(s1[0]) | set(s1[1]) | set(s1[2])))
    return _join_pair(bag, s1, s2, allow_closure=False) == target


def _take_edge(state: State, u: int, v: int, bag, complete: bool) -> State | None:
    """Child state after adding edge {u,v}, or None if infeasible."""
    d0, d1, d2, m = state
    du = _degree(state, u)
    dv = _degree(state, v)
    if du == 2 or dv == 2:
        return None
    if du == 0 and dv == 0:
        return (_without(d0, u, v), _with(d1, u, v), d2, tuple(sorted(m + (_pair(u, v),))))
    if du == 1 and dv == 1:
        pu = _partner(m, u)
        if pu == v:
            # closing the open path into a cycle: only the final tour may
            if len(m) == 1 and not d0 and complete:
                return ((), (), tuple(bag), ())
            return None
        pv = _partner(m, v)
        new_m = tuple(
            sorted(
                tuple(p for p in m if u not in p and v not in p) + (_pair(pu, pv),)
            )
        )
        return (d0, _without(d1, u, v), _with(d2, u, v), new_m)
    # exactly one endpoint has degree 1: extend its path
    if du == 0:
        u, v, du, dv = v, u, dv, du
    p = _partner(m, u)
    new_m = tuple(sorted(tuple(q for q in m if u not in q) + (_pair(p, v),)))
    return (_without(d0, v), _with(_without(d1, u), v), _with(d2, u), new_m)


class TspProblem(DpProblem):
    def __init__(self, graph: Graph, ntd: NiceTD, store: SolutionStore, cfg: DpConfig):
        super().__init__(ntd, store, cfg)
        self.graph = graph
        self.zero: Vec = (0,) * graph.d

    def leaf(self, node):
        return {((), (), (), ()): [(self.zero, EMPTY)]}

    def unary(self, node, child):
        if node.kind == INTRODUCE:
            v = node.vertex
            return {
                (_with(s[0], v), s[1], s[2], s[3]): front for s, front in child.items()
            }
        if node.kind == FORGET:
            return self._forget(node, child)
        if node.kind == INTRODUCE_EDGE:
            return self._introduce_edge(node, child)
        raise ValueError(f"tour DP cannot process node kind {node.kind}")

    def _forget(self, node, child):
        v = node.vertex
        groups: dict = {}
        for s, front in child.items():
            if v not in s[2]:
                continue  # a vertex must finish at degree 2
            target = (s[0], s[1], _without(s[2], v), s[3])
            groups.setdefault(target, []).extend(front)
        out = {}
        for key, entries in groups.items():
            front = reduce_entries(entries)
            if front:
                out[key] = front
        return out

    def _introduce_edge(self, node, child):
        u, v, idx = node.edge
        cost = self.graph.edges[idx][2]
        element = edge_element(u, v)
        complete = self.ntd.subtree_mask[node.id] == self.ntd.full_mask
        groups: dict = {}
        for s, front in child.items():
            groups.setdefault(s, []).extend((vec, (0, sid)) for vec, sid in front)
            target = _take_edge(s, u, v, node.bag, complete)
            if target is not None:
                groups.setdefault(target, []).extend(
                    (vec_add(vec, cost), (1, sid)) for vec, sid in front
                )
        out = {}
        for key in sorted(groups):
            reduced = reduce_entries(groups[key])
            if reduced:
                out[key] = self.materialize_additions(reduced, element)
        return out

    def join_targets(self, node, t1, t2):
        bag = node.bag
        complete = self.ntd.subtree_mask[node.id] == self.ntd.full_mask
        plans: dict = {}
        for s1 in sorted(t1):
            for s2 in sorted(t2):
                target = _join_pair(bag, s1, s2, allow_closure=complete)
                if target is None:
                    continue
                plans.setdefault(target, []).append((t1[s1], t2[s2]))
        return plans

    def join_compute(self, node, key, plan, stats):
        subjoins = [(f1, f2, None) for f1, f2 in plan]
        entries = family_join(subjoins, self.cfg.heuristic, stats)
        return entries, [(0, 0)] * len(plan)

    def join_materialize(self, node, key, computed):
        entries, metas = computed
        return self.materialize_pairs(node, entries, metas)

    def root_key(self):
        return ((), (), (), ())

    def key_hex(self, node, key) -> str:
        pos = {v: i for i, v in enumerate(node.bag)}
        val = 0
        for v in key[1]:
            val |= 1 << (2 * pos[v])
        for v in key[2]:
            val |= 2 << (2 * pos[v])
        shift = 2 * len(node.bag)
        for a, b in key[3]:
            val |= (pos[a] | pos[b] << 5) << shift
            shift += 10
        return format(val, "x")

    @staticmethod
    def key_sort(key):
        return key

    def check_table(self, node, table):
        w = self.ntd.width
        bound = (3 * (w + 1)) ** (w + 1)
        assert len(table) <= bound, "state count exceeds the structural bound"


def solve_tsp(
    graph: Graph,
    ntd: NiceTD,
    cfg: DpConfig | None = None,
    store: SolutionStore | None = None,
) -> SolveResult:
    """Exact Pareto set over Hamiltonian cycles; an empty front means no
    tour exists."""
    require_inner_edges(graph)
    if graph.n < 3:
        raise ValueError("tours need at least three vertices")
    if count_edge_nodes(ntd) != graph.m:
        raise ValueError("decomposition must introduce every edge exactly once")
    if ntd.num_vertices != graph.n:
        raise ValueError("decomposition and graph disagree on the vertex count")
    cfg = cfg or DpConfig()
    if store is None:
        store = SolutionStore(tempfile.mkdtemp(prefix="treefront-store-"), d=graph.d)
    store.set_meta(problem="tsp", d=graph.d, element_kind="edge", n=graph.n)
    problem = TspProblem(graph, ntd, store, cfg)
    return run_dp(problem, cfg)


def tour_edges(result: SolveResult, solution_id: int) -> list[tuple[int, int]]:
    """Decode one root entry's tour as (u, v) edge pairs."""
    elements = result.store.reconstruct(solution_id)
    return [(e >> 32, e & 0xFFFFFFFF) for e in elements]
