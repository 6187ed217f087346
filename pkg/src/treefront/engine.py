"""Shared dynamic-programming driver over nice tree decompositions.

A problem object supplies per-node-kind table transformations; the
engine owns everything else: postorder traversal, table lifetime
(children are released as soon as the parent is complete), optional
spilling of every table to frontier files, worker threads for
join-family nodes, store pruning against a disk budget, and per-node
statistics.

Tables map problem-specific keys (selections, partitions, states) to
fronts; empty fronts are always elided from the mapping, mirroring the
on-disk convention.  All provenance-record creation happens on the main
thread, so peeking ``store.count`` before a batch append is safe;
worker threads only run the pure join computations.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .fronts import EMPTY_SOLUTION as EMPTY
from .fronts import Front, Vec, vec_add
from .heuristic import DEFAULT_CONFIG, HeuristicConfig, JoinStats
from .store import Record, SolutionStore
from .td import (
    FORGET,
    INTRODUCE,
    INTRODUCE_EDGE,
    JOIN_FAMILY,
    LEAF,
    NiceNode,
    NiceTD,
)

Table = dict  # key -> Front


@dataclass
class DpConfig:
    threads: int = 1
    heuristic: HeuristicConfig = field(default_factory=HeuristicConfig)
    fuse: bool = True
    spill: str = "root"  # "root": only the root table persists; "all": every table
    max_disk: int | None = None  # origin log budget in bytes; triggers pruning
    collect_stats: bool = True
    keep_tables: bool = False  # retain every node's table (inspection/tests)

    # forecasts deliberately overestimate before comparing to the budget
    PRUNE_OVERESTIMATE = 1.5


@dataclass
class NodeStats:
    node: int
    kind: str
    keys: int
    entries: int
    seconds: float
    pairs_total: int = 0
    pairs_skipped: int = 0

    def as_dict(self) -> dict:
        out = {
            "node": self.node,
            "kind": self.kind,
            "keys": self.keys,
            "entries": self.entries,
            "seconds": round(self.seconds, 6),
        }
        if self.pairs_total:
            out["pairs_total"] = self.pairs_total
            out["pairs_skipped"] = self.pairs_skipped
            out["skip_fraction"] = round(self.pairs_skipped / self.pairs_total, 6)
        return out


@dataclass
class SolveResult:
    front: Front
    root_node: int
    root_key_hex: str
    store: SolutionStore
    ntd: NiceTD
    node_stats: list[NodeStats]
    prune_events: list[dict]
    join_stats: JoinStats
    tables: dict | None = None  # node id -> table, when keep_tables was set

    @property
    def vectors(self) -> list[Vec]:
        return [v for v, _ in self.front]


def shift_entries(front: Front, delta: Vec | None) -> Front:
    if delta is None or not any(delta):
        return front
    return [(vec_add(v, delta), sid) for v, sid in front]


class DpProblem:
    """Base class: problems override the per-kind table builders."""

    def __init__(self, ntd: NiceTD, store: SolutionStore, cfg: DpConfig):
        self.ntd = ntd
        self.store = store
        self.cfg = cfg

    # -- required overrides -------------------------------------------

    def leaf(self, node: NiceNode) -> Table:
        raise NotImplementedError

    def unary(self, node: NiceNode, child: Table) -> Table:
        raise NotImplementedError

    def join_targets(self, node: NiceNode, t1: Table, t2: Table) -> dict:
        """Map output key -> pure plan consumed by ``join_compute``."""
        raise NotImplementedError

    def join_compute(self, node: NiceNode, key, plan, stats: JoinStats):
        raise NotImplementedError

    def join_materialize(self, node: NiceNode, key, computed) -> Front:
        raise NotImplementedError

    def root_key(self):
        raise NotImplementedError

    def key_hex(self, node: NiceNode, key) -> str:
        raise NotImplementedError

    @staticmethod
    def key_sort(key):
        return tuple(sorted(key)) if isinstance(key, (frozenset, set)) else key

    # -- shared helpers -----------------------------------------------

    def materialize_pairs(
        self,
        node: NiceNode,
        entries: list[tuple[Vec, tuple[int, int, int]]],
        metas: list[tuple[int, int]],
    ) -> Front:
        """Create JOIN records (plus SKIPPED-INTRO wrappers where a side
        bypassed an introduce chain) for the surviving entries only."""
        if not entries:
            return []
        first = self.store.count
        recs: list[Record] = []
        front: Front = []
        for vec, (k, left, right) in entries:
            mask_l, mask_r = metas[k]
            if mask_l:
                recs.append(Record.skipped(left, node.id, mask_l))
                left = first + len(recs) - 1
            if mask_r:
                recs.append(Record.skipped(right, node.id, mask_r))
                right = first + len(recs) - 1
            recs.append(Record.join(left, right))
            front.append((vec, first + len(recs) - 1))
        got = self.store.append_batch(recs)
        assert got == first, "records must not be appended concurrently"
        return front

    def materialize_additions(self, reduced, element: int) -> Front:
        """Turn reduced (vec, (is_new, base_id)) entries into a front,
        creating an INTRODUCE record of ``element`` for each new entry."""
        first = self.store.count
        recs: list[Record] = []
        front: Front = []
        for vec, (is_new, sid) in reduced:
            if is_new:
                recs.append(Record.introduce(sid, element))
                front.append((vec, first + len(recs) - 1))
            else:
                front.append((vec, sid))
        got = self.store.append_batch(recs)
        assert got == first
        return front

    def check_table(self, node: NiceNode, table: Table) -> None:
        """Optional per-node sanity hook; runs after empty-front elision."""

    def forecast_records(self, node: NiceNode, child_tables: list[Table]) -> int:
        """Upper-ish estimate of records the node will create (prune
        trigger only; deliberately coarse)."""
        from .estimator import join_output_estimate

        if node.kind == LEAF or node.kind == FORGET:
            return 0
        if node.kind in (INTRODUCE, INTRODUCE_EDGE):
            return sum(len(f) for f in child_tables[0].values())
        total = 0.0
        t1, t2 = child_tables
        for f1 in t1.values():
            for f2 in t2.values():
                total += join_output_estimate(len(f1), len(f2))
        per_entry = 3 if node.skipped != ((), ()) else 1
        return int(total) * per_entry


def skipped_resolver(ntd: NiceTD):
    """Decode SKIPPED-INTRO bag-position masks against a decomposition."""

    def resolve(node_id: int, mask: int):
        bag = ntd.nodes[node_id].join_bag()
        return [bag[i] for i in range(len(bag)) if mask >> i & 1]

    return resolve


def run_dp(problem: DpProblem, cfg: DpConfig | None = None) -> SolveResult:
    cfg = cfg or DpConfig()
    ntd = problem.ntd
    store = problem.store
    tables: dict[int, Table] = {}
    node_stats: list[NodeStats] = []
    prune_events: list[dict] = []
    agg = JoinStats()
    pool = ThreadPoolExecutor(max_workers=cfg.threads) if cfg.threads > 1 else None
    try:
        for t in ntd.postorder:
            node = ntd.nodes[t]
            kids = [tables[c] for c in node.children]
            if cfg.max_disk is not None:
                _maybe_prune(problem, node, kids, tables, cfg, prune_events)
            started = time.perf_counter()
            skip = JoinStats()
            if node.kind == LEAF:
                table = problem.leaf(node)
            elif node.kind in (INTRODUCE, FORGET, INTRODUCE_EDGE):
                table = problem.unary(node, kids[0])
            elif node.kind in JOIN_FAMILY:
                plans = problem.join_targets(node, kids[0], kids[1])
                keys = sorted(plans, key=problem.key_sort)

                def work(key):
                    local = JoinStats()
                    return key, problem.join_compute(node, key, plans[key], local), local

                results = pool.map(work, keys) if pool else map(work, keys)
                table = {}
                for key, computed, local in results:  # in key order: deterministic
                    skip.merge(local)
                    front = problem.join_materialize(node, key, computed)
                    if front:
                        table[key] = front
            else:
                raise ValueError(f"unhandled node kind {node.kind}")
            table = {k: f for k, f in table.items() if f}
            problem.check_table(node, table)
            if not cfg.keep_tables:
                for c in node.children:
                    child = tables.pop(c)
                    if cfg.spill == "all":
                        cnode = ntd.nodes[c]
                        for k in child:
                            store.delete_frontier(c, problem.key_hex(cnode, k))
            tables[t] = table
            if cfg.spill == "all":
                for k, f in table.items():
                    store.write_frontier(t, problem.key_hex(node, k), f)
            agg.merge(skip)
            if cfg.collect_stats:
                node_stats.append(
                    NodeStats(
                        node=t,
                        kind=node.kind,
                        keys=len(table),
                        entries=sum(len(f) for f in table.values()),
                        seconds=time.perf_counter() - started,
                        pairs_total=skip.pairs_total,
                        pairs_skipped=skip.pairs_skipped,
                    )
                )
    finally:
        if pool:
            pool.shutdown()

    root = ntd.root
    root_node = ntd.nodes[root]
    rkey = problem.root_key()
    front = tables.get(root, {}).get(rkey, [])
    rhex = problem.key_hex(root_node, rkey)
    if cfg.spill != "all":
        store.write_frontier(root, rhex, front)
    store.flush()
    # Persist join bags so a later process can decode SKIPPED-INTRO
    # masks (see skipped_resolver) from the store alone.
    join_bags = {
        str(n.id): list(n.join_bag()) for n in ntd.nodes if n.kind in JOIN_FAMILY
    }
    store.set_meta(root_node=root, root_key=rhex, join_bags=join_bags)
    return SolveResult(
        front=front,
        root_node=root,
        root_key_hex=rhex,
        store=store,
        ntd=ntd,
        node_stats=node_stats,
        prune_events=prune_events,
        join_stats=agg,
        tables=tables if cfg.keep_tables else None,
    )


def _maybe_prune(problem, node, kids, tables, cfg, events) -> None:
    store = problem.store
    forecast = problem.forecast_records(node, kids) * 16 * cfg.PRUNE_OVERESTIMATE
    projected = store.log_bytes() + forecast
    if projected <= cfg.max_disk:
        return
    live: set[int] = set()
    for table in tables.values():
        for front in table.values():
            live.update(sid for _, sid in front if sid != EMPTY)
    stats = store.prune(extra_roots=sorted(live))
    idmap = stats.idmap
    for table in tables.values():
        for key, front in table.items():
            table[key] = [
                (vec, idmap[sid] if sid != EMPTY else EMPTY) for vec, sid in front
            ]
    events.append(
        {
            "at_node": node.id,
            "records_before": stats.records_before,
            "reachable": stats.reachable,
            "bytes_after": stats.bytes_after,
        }
    )
