"""Multiobjective minimum spanning tree DP over nice tree decompositions
with introduce-edge nodes.

Table keys are set partitions of the bag, encoded as restricted growth
strings over sorted bag positions: entry i is the block index of bag
position i, blocks numbered by first appearance.  A key's front holds
the Pareto costs of forests using only already-introduced edges whose
components trace exactly that partition on the bag, every component
touching the bag.  A vertex may leave the bag while alone in its block
only when the bag empties and the subtree has seen every vertex — at
that point its component is the finished spanning tree.  Disconnected
inputs therefore drain every table naturally and yield an empty front.
"""

from __future__ import annotations

import tempfile

from .engine import DpConfig, DpProblem, SolveResult, run_dp
from .fronts import EMPTY_SOLUTION as EMPTY
from .fronts import Vec, reduce_entries, vec_add
from .graphs import Graph, require_inner_edges
from .heuristic import family_join
from .store import SolutionStore
from .td import FORGET, INTRODUCE, INTRODUCE_EDGE, NiceTD, count_edge_nodes

Partition = tuple  # restricted growth string over bag positions


def canonical_partition(labels) -> Partition:
    """Renumber arbitrary block labels by first appearance."""
    seen: dict = {}
    out = []
    for label in labels:
        seen.setdefault(label, len(seen))
        out.append(seen[label])
    return tuple(out)


def enumerate_partitions(bag) -> list[Partition]:
    """All set partitions of the bag as restricted growth strings, in
    lexicographic order; the empty bag has exactly the empty partition."""
    n = len(bag)
    if n == 0:
        return [()]
    out: list[Partition] = []

    def grow(prefix: list[int], top: int) -> None:
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for label in range(top + 2):
            prefix.append(label)
            grow(prefix, max(top, label))
            prefix.pop()

    grow([0], 0)
    return out


def partition_blocks(partition: Partition) -> list[tuple[int, ...]]:
    blocks: dict[int, list[int]] = {}
    for i, label in enumerate(partition):
        blocks.setdefault(label, []).append(i)
    return [tuple(blocks[k]) for k in sorted(blocks)]


def partitions_create(s1: Partition, s2: Partition) -> Partition | None:
    """Overlay the spanning forests of two bag partitions; ``None`` if
    the union multigraph closes a cycle, else the component partition.

    Whether a cycle appears depends only on the partitions, not on the
    chosen forests: each forest's edge count is fixed by its block
    sizes, so acyclicity reduces to a rank identity on the lattice join.
    """
    if len(s1) != len(s2):
        raise ValueError("partitions must cover the same bag")
    n = len(s1)
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for part in (s1, s2):
        for block in partition_blocks(part):
            for a, b in zip(block, block[1:]):
                ra, rb = find(a), find(b)
                if ra == rb:
                    return None
                parent[ra] = rb
    return canonical_partition(find(i) for i in range(n))


def _singleton_insert(partition: Partition, pos: int) -> Partition:
    label = (max(partition) + 1) if partition else 0
    return canonical_partition(partition[:pos] + (label,) + partition[pos:])


def edge_element(u: int, v: int) -> int:
    """Stable 64-bit element id for an edge (endpoints < 2^32)."""
    a, b = (u, v) if u <= v else (v, u)
    return (a << 32) | b


class MstProblem(DpProblem):
    def __init__(self, graph: Graph, ntd: NiceTD, store: SolutionStore, cfg: DpConfig):
        super().__init__(ntd, store, cfg)
        self.graph = graph
        self.zero: Vec = (0,) * graph.d

    def leaf(self, node):
        return {(): [(self.zero, EMPTY)]}

    def unary(self, node, child):
        if node.kind == INTRODUCE:
            pos = node.bag.index(node.vertex)
            return {_singleton_insert(s, pos): front for s, front in child.items()}
        if node.kind == FORGET:
            return self._forget(node, child)
        if node.kind == INTRODUCE_EDGE:
            return self._introduce_edge(node, child)
        raise ValueError(f"spanning tree DP cannot process node kind {node.kind}")

    def _forget(self, node, child):
        v = node.vertex
        child_bag = self.ntd.nodes[node.children[0]].bag
        pos = child_bag.index(v)
        complete = self.ntd.subtree_mask[node.id] == self.ntd.full_mask
        groups: dict = {}
        for s, front in child.items():
            if s.count(s[pos]) == 1:
                # the block dies with v: only legal as the final step of
                # a finished spanning tree
                if len(s) == 1 and complete:
                    groups.setdefault((), []).extend(front)
                continue
            target = canonical_partition(s[:pos] + s[pos + 1 :])
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
        pu = node.bag.index(u)
        pv = node.bag.index(v)
        element = edge_element(u, v)
        groups: dict = {}
        take_count: dict = {}
        for s, front in child.items():
            groups.setdefault(s, []).extend((vec, (0, sid)) for vec, sid in front)
            if s[pu] != s[pv]:
                target = canonical_partition(
                    tuple(s[pu] if x == s[pv] else x for x in s)
                )
                take_count[target] = take_count.get(target, 0) + 1
                groups.setdefault(target, []).extend(
                    (vec_add(vec, cost), (1, sid)) for vec, sid in front
                )
        limit = 2 ** max(0, len(node.bag) - 1)
        assert all(c <= limit for c in take_count.values()), (
            "more merge sources than splitting one block can explain"
        )
        out = {}
        for key in sorted(groups):
            reduced = reduce_entries(groups[key])
            if reduced:
                out[key] = self.materialize_additions(reduced, element)
        return out

    def join_targets(self, node, t1, t2):
        plans: dict = {}
        for s1 in sorted(t1):
            for s2 in sorted(t2):
                target = partitions_create(s1, s2)
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
        return ()

    def key_hex(self, node, key) -> str:
        mask = 0
        for i, label in enumerate(key):
            mask |= label << (5 * i)
        return format(mask, "x")

    @staticmethod
    def key_sort(key):
        return key


def solve_mst(
    graph: Graph,
    ntd: NiceTD,
    cfg: DpConfig | None = None,
    store: SolutionStore | None = None,
) -> SolveResult:
    """Exact Pareto set over spanning trees; an empty front means the
    graph has no spanning tree."""
    require_inner_edges(graph)
    if count_edge_nodes(ntd) != graph.m:
        raise ValueError("decomposition must introduce every edge exactly once")
    if ntd.num_vertices != graph.n:
        raise ValueError("decomposition and graph disagree on the vertex count")
    cfg = cfg or DpConfig()
    if store is None:
        store = SolutionStore(tempfile.mkdtemp(prefix="treefront-store-"), d=graph.d)
    store.set_meta(problem="mst", d=graph.d, element_kind="edge", n=graph.n)
    problem = MstProblem(graph, ntd, store, cfg)
    return run_dp(problem, cfg)


def tree_edges(result: SolveResult, solution_id: int) -> list[tuple[int, int]]:
    """Decode one root entry's spanning tree as (u, v) edge pairs."""
    elements = result.store.reconstruct(solution_id)
    return [(e >> 32, e & 0xFFFFFFFF) for e in elements]
