"""Multiobjective s-t cut dynamic programming over a nice tree decomposition.

Vertices ``1..n`` are the inner vertices, ``0`` is the source ``s`` and
``n+1`` the sink ``t``.  For each node and each selection ``S`` of its
bag, the table holds the Pareto front of the costs of all full cuts
whose source side, restricted to the processed subtree, meets the bag
exactly in ``S`` — with every not-yet-seen vertex assumed on the sink
side.  That normalization makes all stored vectors full-instance cut
costs, so introduces shift a front by a constant, forgets merge two
fronts, and joins combine child fronts with the double-counted part
``c'(delta(S))`` subtracted once.
"""

from __future__ import annotations

import tempfile

from .engine import (
    DpConfig,
    DpProblem,
    SolveResult,
    run_dp,
    shift_entries,
    skipped_resolver,
)
from .fronts import EMPTY_SOLUTION as EMPTY
from .fronts import Front, Vec, heap_join, vec_add
from .graphs import Graph
from .heuristic import DEFAULT_CONFIG, HeuristicConfig, family_join, heuristic_join
from .store import Record, SolutionStore
from .td import FORGET, INTRODUCE, INTRODUCE_EDGE, JOIN_FAMILY, LEAF, NiceTD


class CutInstance:
    """Preprocessed s-t cut instance: terminal-cost accumulators per
    inner vertex, inner adjacency, and the all-sink-side base cost."""

    __slots__ = ("n", "d", "s_cost", "t_cost", "adj", "base_cost", "graph")

    def __init__(self, graph: Graph):
        self.graph = graph
        self.n = graph.n
        self.d = graph.d
        zero = (0,) * graph.d
        s_cost: dict[int, Vec] = {}
        t_cost: dict[int, Vec] = {}
        adj: dict[int, list[tuple[int, Vec]]] = {}
        sink = graph.n + 1
        for u, v, w in graph.edges:
            ends = {u, v}
            if ends == {0, sink}:
                raise ValueError("instances must not contain a direct s-t edge")
            if 0 in ends:
                x = u if v == 0 else v
                s_cost[x] = vec_add(s_cost.get(x, zero), w)
            elif sink in ends:
                x = u if v == sink else v
                t_cost[x] = vec_add(t_cost.get(x, zero), w)
            else:
                adj.setdefault(u, []).append((v, w))
                adj.setdefault(v, []).append((u, w))
        self.s_cost = s_cost
        self.t_cost = t_cost
        self.adj = adj
        base = zero
        for w in s_cost.values():
            base = vec_add(base, w)
        self.base_cost = base

    @staticmethod
    def from_graph(graph: Graph) -> "CutInstance":
        return CutInstance(graph)


def cut_cost(inst: CutInstance, selection) -> Vec:
    """Full cut cost of putting exactly ``selection`` (plus s) on the
    source side.  Also serves as the join offset c'(delta(S))."""
    sel = set(selection)
    cost = list(inst.base_cost)
    for v in sel:
        sw = inst.s_cost.get(v)
        if sw:
            cost = [c - x for c, x in zip(cost, sw)]
        tw = inst.t_cost.get(v)
        if tw:
            cost = [c + x for c, x in zip(cost, tw)]
        for u, w in inst.adj.get(v, ()):
            if u not in sel:
                cost = [c + x for c, x in zip(cost, w)]
    return tuple(cost)


def cut_delta(inst: CutInstance, selection, added, bag, revealed_mask: int) -> Vec:
    """Cost change when ``added`` (a subset of ``selection``) moves to the
    source side, relative to the table that did not yet contain it.

    For each edge from an added vertex x: a neighbor already on the
    source side was wrongly charged before (subtract), a neighbor on the
    sink side of the bag or not yet revealed is newly cut (add), and
    edges inside ``added`` cancel.  Terminal edges contribute +c(x,t)
    and -c(s,x), the latter because the base cost charged c(s,x) while x
    sat on the sink side.
    """
    sel = set(selection)
    add = set(added)
    delta = [0] * inst.d
    for x in add:
        tw = inst.t_cost.get(x)
        if tw:
            delta = [c + y for c, y in zip(delta, tw)]
        sw = inst.s_cost.get(x)
        if sw:
            delta = [c - y for c, y in zip(delta, sw)]
        for y, w in inst.adj.get(x, ()):
            if y in add:
                continue
            if y in sel:
                delta = [c - z for c, z in zip(delta, w)]
            elif y in bag or not revealed_mask >> y & 1:
                delta = [c + z for c, z in zip(delta, w)]
            else:
                raise AssertionError(
                    f"edge {{{x},{y}}} reaches a vertex forgotten below its introduction"
                )
    return tuple(delta)


def introduce_cost_delta(inst: CutInstance, ntd: NiceTD, t, S, v: int) -> Vec:
    """Constant shift applied to a child front when ``v`` is introduced
    into the source side at node ``t`` with final bag selection ``S``."""
    node = ntd.nodes[t] if isinstance(t, int) else t
    if v not in S:
        raise ValueError("introduced vertex must be part of the selection")
    return cut_delta(inst, S, (v,), set(node.bag), ntd.subtree_mask[node.id])


def stcut_introduce(inst: CutInstance, ntd: NiceTD, t, child_fronts: dict, v: int) -> dict:
    """Pure table transformation for an introduce node (ids pass through)."""
    node = ntd.nodes[t] if isinstance(t, int) else t
    out = {}
    for S, front in child_fronts.items():
        out[S] = front
        S2 = S | {v}
        out[S2] = shift_entries(front, introduce_cost_delta(inst, ntd, node, S2, v))
    return out


def stcut_forget(child_fronts: dict, v: int) -> dict:
    """Pure table transformation for a forget node: merge the selections
    that differ only in ``v``."""
    from .fronts import reduce_entries

    groups: dict = {}
    for S, front in child_fronts.items():
        groups.setdefault(S - {v}, []).extend(front)
    out = {}
    for S, entries in groups.items():
        front = reduce_entries(entries)
        if front:
            out[S] = front
    return out


def stcut_join(
    inst: CutInstance,
    left: Front,
    right: Front,
    S,
    offset: Vec | None = None,
    cfg: HeuristicConfig | None = None,
):
    """Join the two child fronts for selection ``S``; the double-counted
    cut c'(delta(S)) is subtracted once."""
    if offset is None:
        offset = cut_cost(inst, S)
    if cfg is None:
        return heap_join(left, right, offset)
    return heuristic_join(left, right, offset, cfg)


def _subsets(items: tuple) -> list[frozenset]:
    out = []
    for m in range(1 << len(items)):
        out.append(frozenset(items[i] for i in range(len(items)) if m >> i & 1))
    return out


class CutProblem(DpProblem):
    def __init__(self, inst: CutInstance, ntd: NiceTD, store: SolutionStore, cfg: DpConfig):
        super().__init__(ntd, store, cfg)
        self.inst = inst

    def leaf(self, node):
        return {frozenset(): [(self.inst.base_cost, EMPTY)]}

    def unary(self, node, child):
        if node.kind == INTRODUCE:
            v = node.vertex
            bag = set(node.bag)
            revealed = self.ntd.subtree_mask[node.id]
            out = {}
            for S, front in child.items():
                out[S] = front
                S2 = S | {v}
                delta = cut_delta(self.inst, S2, (v,), bag, revealed)
                first = self.store.count
                got = self.store.append_batch(
                    [Record.introduce(sid, v) for _, sid in front]
                )
                assert got == first
                out[S2] = [
                    (vec_add(vec, delta), first + i) for i, (vec, _) in enumerate(front)
                ]
            return out
        if node.kind == FORGET:
            return stcut_forget(child, node.vertex)
        raise ValueError(f"cut DP cannot process node kind {node.kind}")

    def join_targets(self, node, t1, t2):
        inst = self.inst
        ntd = self.ntd
        c1, c2 = node.children
        I1, I2 = node.skipped
        set_i1, set_i2 = set(I1), set(I2)
        forgotten = set(node.forgotten)
        jb = node.join_bag()
        jb_set = set(jb)
        pos = {v: i for i, v in enumerate(jb)}
        rev1 = ntd.subtree_mask[c1]
        for v in I1:
            rev1 |= 1 << v
        rev2 = ntd.subtree_mask[c2]
        for v in I2:
            rev2 |= 1 << v
        staged: dict = {}
        for k1 in t1:
            for J in _subsets(I1):
                S = k1 | J
                k2 = S - set_i2
                f2 = t2.get(k2)
                if f2 is None:
                    continue
                J2 = S & set_i2
                d1 = cut_delta(inst, S, J, jb_set, rev1) if J else None
                d2 = cut_delta(inst, S, J2, jb_set, rev2) if J2 else None
                mask_l = sum(1 << pos[v] for v in J)
                mask_r = sum(1 << pos[v] for v in J2)
                plan = (t1[k1], d1, f2, d2, cut_cost(inst, S), mask_l, mask_r)
                staged.setdefault(S - forgotten, []).append((tuple(sorted(S)), plan))
        plans = {}
        for key, items in staged.items():
            items.sort(key=lambda it: it[0])
            plans[key] = [plan for _, plan in items]
        return plans

    def join_compute(self, node, key, plan, stats):
        subjoins = []
        metas = []
        for f1, d1, f2, d2, offset, mask_l, mask_r in plan:
            subjoins.append((shift_entries(f1, d1), shift_entries(f2, d2), offset))
            metas.append((mask_l, mask_r))
        entries = family_join(subjoins, self.cfg.heuristic, stats)
        return entries, metas

    def join_materialize(self, node, key, computed):
        entries, metas = computed
        return self.materialize_pairs(node, entries, metas)

    def root_key(self):
        return frozenset()

    def key_hex(self, node, key) -> str:
        mask = 0
        for i, v in enumerate(node.bag):
            if v in key:
                mask |= 1 << i
        return format(mask, "x")


def solve_stcut(
    inst: CutInstance | Graph,
    ntd: NiceTD,
    cfg: DpConfig | None = None,
    store: SolutionStore | None = None,
) -> SolveResult:
    """Run the cut DP bottom-up; the returned front at the root's empty
    selection is the exact Pareto set of the full instance."""
    if isinstance(inst, Graph):
        inst = CutInstance.from_graph(inst)
    if any(nd.kind == INTRODUCE_EDGE for nd in ntd.nodes):
        raise ValueError("the cut DP expects a decomposition without edge nodes")
    if ntd.num_vertices != inst.n:
        raise ValueError("decomposition and instance disagree on the vertex count")
    uncovered = {(u, v) for u, nbrs in inst.adj.items() for v, _ in nbrs if u < v}
    for node in ntd.nodes:
        if not uncovered:
            break
        bag = set(node.bag).union(node.forgotten)
        uncovered = {e for e in uncovered if not bag.issuperset(e)}
    if uncovered:
        raise ValueError(
            f"decomposition covers no bag for edge {sorted(uncovered)[0]}"
        )
    cfg = cfg or DpConfig()
    if store is None:
        store = SolutionStore(tempfile.mkdtemp(prefix="treefront-store-"), d=inst.d)
    store.set_meta(problem="stcut", d=inst.d, element_kind="vertex", n=inst.n)
    problem = CutProblem(inst, ntd, store, cfg)
    return run_dp(problem, cfg)


def cut_selection(result: SolveResult, solution_id: int):
    """Reconstruct the source-side vertex set behind one front entry."""
    resolver = skipped_resolver(result.ntd)
    return result.store.reconstruct(solution_id, resolver)
