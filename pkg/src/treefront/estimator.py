"""Decomposition performance estimator and root ranking.

Simulates per-node Pareto-set sizes from the decomposition shape alone
(leaves hold exactly one solution, introduces double, forgets roughly
halve, joins follow a fitted power law), then prices each candidate
decomposition by estimated join runtime and origin-log growth and
ranks by a weighted, min-normalized score.

``mode="upper"`` switches every rule to a provable upper bound
(forgets keep, joins multiply), which the cut DP's actual table sizes
may never exceed — used as a sanity invariant, not for ranking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .td import (
    FORGET,
    INTRO_JOIN_FORGET,
    INTRODUCE,
    INTRODUCE_EDGE,
    JOIN,
    JOIN_FAMILY,
    JOIN_FORGET,
    LEAF,
    NiceTD,
    TreeDecomposition,
    make_nice,
)

# fitted constants: join power law, forget halving, fused-forget decay
ALPHA = 0.57
BETA = 2.15
FORGET_FACTOR = 0.5
DELTA = 0.5
EPSILON = 1e-12

TIME_WEIGHT = 0.25
STORAGE_WEIGHT = 0.75


@dataclass
class NodeEstimate:
    node: int
    count: float
    join_work: float = 0.0
    log_bytes: float = 0.0


def join_output_estimate(n1: float, n2: float) -> float:
    """Estimated Pareto-set size of joining fronts of sizes n1, n2."""
    if n1 <= 0 or n2 <= 0:
        return 0.0
    small, large = (n1, n2) if n1 <= n2 else (n2, n1)
    return large * (1.0 + (small / large) ** ALPHA * BETA)


def _join_time(c1: float, c2: float, bag_size: int) -> float:
    subsets = 2.0 ** bag_size
    p1 = c1 / subsets
    p2 = c2 / subsets
    if p1 > p2:
        p1, p2 = p2, p1
    return subsets * p1 * p2 * math.log(max(p1, 1.0))


def estimate_counts(ntd: NiceTD, mode: str = "model") -> list[NodeEstimate]:
    """Per-node estimates in postorder position (indexed by node id)."""
    if mode not in ("model", "upper"):
        raise ValueError("mode must be 'model' or 'upper'")
    upper = mode == "upper"
    est = [NodeEstimate(node=i, count=0.0) for i in range(len(ntd.nodes))]
    for t in ntd.postorder:
        node = ntd.nodes[t]
        e = est[t]
        if node.kind == LEAF:
            e.count = 1.0
        elif node.kind == INTRODUCE:
            e.count = 2.0 * est[node.children[0]].count
            e.log_bytes = e.count * 16.0
        elif node.kind == FORGET:
            factor = 1.0 if upper else FORGET_FACTOR
            e.count = factor * est[node.children[0]].count
        elif node.kind == INTRODUCE_EDGE:
            e.count = est[node.children[0]].count
        elif node.kind in JOIN_FAMILY:
            c1 = est[node.children[0]].count
            c2 = est[node.children[1]].count
            i1, i2 = node.skipped
            c1 *= 2.0 ** len(i1)
            c2 *= 2.0 ** len(i2)
            bag = len(node.join_bag())
            e.join_work = _join_time(c1, c2, bag)
            if node.forgotten:
                e.join_work *= DELTA ** (len(node.forgotten) - 1)
            if upper:
                e.count = c1 * c2
            else:
                e.count = join_output_estimate(c1, c2)
                e.count *= FORGET_FACTOR ** len(node.forgotten)
            records = e.count
            if node.kind == INTRO_JOIN_FORGET:
                records *= 1.0 + (1.0 - 2.0 ** -len(i1)) + (1.0 - 2.0 ** -len(i2))
            e.log_bytes = records * 16.0
        else:
            raise ValueError(f"unknown node kind {node.kind}")
    return est


def estimate_time(ntd: NiceTD, counts: list[NodeEstimate]) -> float:
    """Total estimated join work (gamma = 1; meaningful only relatively)."""
    return sum(
        counts[t].join_work for t in ntd.postorder if ntd.nodes[t].kind in JOIN_FAMILY
    )


def estimate_storage(ntd: NiceTD, counts: list[NodeEstimate]) -> float:
    """Estimated origin-log growth in bytes (16 per created record)."""
    return sum(counts[t].log_bytes for t in ntd.postorder)


def estimate(ntd: NiceTD, mode: str = "model") -> tuple[float, float]:
    counts = estimate_counts(ntd, mode)
    return estimate_time(ntd, counts), estimate_storage(ntd, counts)


def score(candidates: list[tuple[float, float]]) -> list[tuple[int, float]]:
    """Rank (time, storage) candidates ascending by the weighted
    min-normalized score; ties keep candidate order."""
    if not candidates:
        return []
    tmin = max(min(t for t, _ in candidates), EPSILON)
    smin = max(min(s for _, s in candidates), EPSILON)
    scored = [
        (i, TIME_WEIGHT * t / tmin + STORAGE_WEIGHT * s / smin)
        for i, (t, s) in enumerate(candidates)
    ]
    scored.sort(key=lambda pair: (pair[1], pair[0]))
    return scored


def candidate_roots(td: TreeDecomposition, optimize: bool = False) -> list[int]:
    """Root bags worth trying: every bag under --optimize-root, else the
    leaves of the decomposition tree."""
    ids = sorted(td.bags)
    if optimize or len(ids) == 1:
        return ids
    degree = {i: 0 for i in ids}
    for a, b in td.edges:
        degree[a] += 1
        degree[b] += 1
    return [i for i in ids if degree[i] <= 1]


def rank_roots(
    td: TreeDecomposition, optimize: bool = False, fuse: bool = True
) -> list[tuple[int, float, float, float]]:
    """Score each candidate root; rows (bag id, time, storage, score)
    in ascending score order."""
    from .td import fuse_nodes

    roots = candidate_roots(td, optimize)
    metrics = []
    for r in roots:
        ntd = make_nice(td, root=r)
        if fuse:
            ntd = fuse_nodes(ntd)
        metrics.append(estimate(ntd))
    ranked = score(metrics)
    return [(roots[i], metrics[i][0], metrics[i][1], s) for i, s in ranked]


def select_root(td: TreeDecomposition, optimize: bool = False, fuse: bool = True) -> int:
    """The candidate root with the best estimated score."""
    return rank_roots(td, optimize, fuse)[0][0]
