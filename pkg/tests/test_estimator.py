"""Decomposition performance model: counts, time, storage, scoring."""

import math
import random

import pytest

from conftest import elimination_td, random_cut_graph
from treefront.engine import DpConfig
from treefront.estimator import (
    ALPHA,
    BETA,
    DELTA,
    FORGET_FACTOR,
    STORAGE_WEIGHT,
    TIME_WEIGHT,
    estimate,
    estimate_counts,
    estimate_storage,
    estimate_time,
    join_output_estimate,
    rank_roots,
    score,
    select_root,
)
from treefront.stcut import solve_stcut
from treefront.td import (
    FORGET,
    INTRODUCE,
    JOIN,
    JOIN_FORGET,
    LEAF,
    NiceNode,
    NiceTD,
    TreeDecomposition,
    fuse_nodes,
    make_nice,
)


def test_fitted_constants():
    assert (ALPHA, BETA) == (0.57, 2.15)
    assert FORGET_FACTOR == 0.5 and DELTA == 0.5
    assert (TIME_WEIGHT, STORAGE_WEIGHT) == (0.25, 0.75)


def chain_ntd(verts):
    """leaf -> introduce each vertex -> forget all, as a NiceTD."""
    nodes = [NiceNode(0, LEAF, ())]
    bag = []
    for v in verts:
        bag.append(v)
        nodes.append(NiceNode(len(nodes), INTRODUCE, tuple(sorted(bag)), [len(nodes) - 1], vertex=v))
    for v in reversed(verts):
        bag.remove(v)
        nodes.append(NiceNode(len(nodes), FORGET, tuple(sorted(bag)), [len(nodes) - 1], vertex=v))
    ntd = NiceTD(nodes=nodes, root=len(nodes) - 1, num_vertices=max(verts, default=0), width=max(len(verts) - 1, 0))
    ntd.finalize()
    return ntd


def join_tree(kind):
    """Two identical 8-count sides under a join-family node over bag
    (1,2,3); ``kind`` selects plain join (forgets above as separate
    nodes) or a fused join-forget with |F| = 3."""
    nodes: list[NiceNode] = []

    def side():
        start = len(nodes)
        nodes.append(NiceNode(start, LEAF, ()))
        bag: list[int] = []
        for v in (1, 2, 3, 4):
            bag.append(v)
            nodes.append(
                NiceNode(len(nodes), INTRODUCE, tuple(sorted(bag)), [len(nodes) - 1], vertex=v)
            )
        nodes.append(NiceNode(len(nodes), FORGET, (1, 2, 3), [len(nodes) - 1], vertex=4))
        return len(nodes) - 1

    a, b = side(), side()
    if kind == JOIN_FORGET:
        nodes.append(
            NiceNode(len(nodes), JOIN_FORGET, (), [a, b], forgotten=(1, 2, 3))
        )
    else:
        nodes.append(NiceNode(len(nodes), JOIN, (1, 2, 3), [a, b]))
        bag = [1, 2, 3]
        for v in (3, 2, 1):
            bag.remove(v)
            nodes.append(
                NiceNode(len(nodes), FORGET, tuple(bag), [len(nodes) - 1], vertex=v)
            )
    ntd = NiceTD(nodes=nodes, root=len(nodes) - 1, num_vertices=4, width=3)
    ntd.finalize()
    return ntd


class TestCounts:
    def test_leaf_is_one(self):
        ntd = chain_ntd([1])
        counts = estimate_counts(ntd)
        assert counts[0].count == 1.0

    def test_introduce_doubles(self):
        ntd = chain_ntd([1, 2, 3])
        counts = estimate_counts(ntd)
        for node in ntd.nodes:
            if node.kind == INTRODUCE:
                child = counts[node.children[0]].count
                assert counts[node.id].count == 2.0 * child

    def test_forget_halves_in_model_mode(self):
        ntd = chain_ntd([1, 2])
        counts = estimate_counts(ntd)
        for node in ntd.nodes:
            if node.kind == FORGET:
                child = counts[node.children[0]].count
                assert counts[node.id].count == 0.5 * child

    def test_upper_mode_keeps_on_forget(self):
        ntd = chain_ntd([1, 2])
        counts = estimate_counts(ntd, mode="upper")
        assert counts[ntd.root].count == 4.0

    def test_bad_mode_rejected(self):
        with pytest.raises(ValueError):
            estimate_counts(chain_ntd([1]), mode="typo")


class TestJoinEstimate:
    def test_hundred_hundred(self):
        assert join_output_estimate(100, 100) == pytest.approx(315.0, abs=0.5)

    def test_formula(self):
        assert join_output_estimate(50, 200) == pytest.approx(
            200 * (1 + (50 / 200) ** ALPHA * BETA)
        )

    def test_empty_side(self):
        assert join_output_estimate(0, 100) == 0.0


class TestTime:
    def test_no_joins_zero(self):
        assert estimate_time(chain_ntd([1, 2, 3]), estimate_counts(chain_ntd([1, 2, 3]))) == 0.0

    def test_model_counts_make_chain_joins_free(self):
        # model counts track 2^bag exactly, so density is 1 and ln(1) = 0
        ntd = join_tree(JOIN)
        assert estimate_time(ntd, estimate_counts(ntd)) == 0.0

    def test_single_join_formula(self):
        ntd = join_tree(JOIN)
        t = estimate_time(ntd, estimate_counts(ntd, mode="upper"))
        # upper counts keep 16 per side over a size-3 join bag: density 2
        assert t == pytest.approx(2.0**3 * 2.0 * 2.0 * math.log(2.0))

    def test_join_forget_scales_by_quarter(self):
        plain = join_tree(JOIN)
        fused = join_tree(JOIN_FORGET)
        t_plain = estimate_time(plain, estimate_counts(plain, mode="upper"))
        t_fused = estimate_time(fused, estimate_counts(fused, mode="upper"))
        assert t_fused == pytest.approx(0.25 * t_plain)
        assert t_plain > 0

    def test_reference_join_time_value(self):
        # counts 100/100 over a size-4 bag: 16 * 6.25 * 6.25 * ln(6.25)
        from treefront.estimator import _join_time

        assert _join_time(100, 100, 4) == pytest.approx(16 * 6.25 * 6.25 * math.log(6.25))


class TestStorage:
    def test_single_introduce_32_bytes(self):
        ntd = chain_ntd([1])
        assert estimate_storage(ntd, estimate_counts(ntd)) == 32.0

    def test_leaf_only_zero(self):
        ntd = NiceTD(nodes=[NiceNode(0, LEAF, ())], root=0, num_vertices=0, width=0)
        ntd.finalize()
        assert estimate_storage(ntd, estimate_counts(ntd)) == 0.0


class TestScore:
    def test_dual_minimum_scores_one(self):
        ranked = score([(3.0, 5.0), (6.0, 7.0)])
        assert ranked[0] == (0, 1.0)

    def test_double_time_min_storage(self):
        ranked = score([(3.0, 5.0), (6.0, 5.0)])
        assert dict(ranked)[1] == pytest.approx(1.25)

    def test_single_candidate(self):
        assert score([(2.0, 9.0)]) == [(0, 1.0)]

    def test_scaling_invariance(self):
        base = [(1.0, 5.0), (2.0, 5.0), (3.0, 40.0)]
        scaled = [(t * 17.0, s) for t, s in base]
        assert [i for i, _ in score(base)] == [i for i, _ in score(scaled)]

    def test_empty(self):
        assert score([]) == []


class TestRootSelection:
    def td(self):
        return TreeDecomposition(
            6,
            {
                1: frozenset({1, 2, 5}),
                2: frozenset({3, 4, 6}),
                3: frozenset({1, 2, 3, 4}),
            },
            [(1, 3), (2, 3)],
        )

    def test_rank_roots_sorted_and_deterministic(self):
        rows = rank_roots(self.td())
        again = rank_roots(self.td())
        assert rows == again
        scores = [s for _, _, _, s in rows]
        assert scores == sorted(scores)
        assert all(s > 0 for s in scores)
        assert rows[0][3] == min(scores)

    def test_select_root_is_best_ranked(self):
        assert select_root(self.td()) == rank_roots(self.td())[0][0]

    def test_optimize_considers_all_bags(self):
        rows = rank_roots(self.td(), optimize=True)
        assert {r for r, _, _, _ in rows} == {1, 2, 3}


class TestUpperBoundSanity:
    def test_actual_table_sizes_within_upper_estimate(self):
        rng = random.Random(97)
        for _ in range(6):
            g = random_cut_graph(rng, rng.randint(2, 8), 2)
            ntd = fuse_nodes(make_nice(elimination_td(g)))
            res = solve_stcut(g, ntd, DpConfig(keep_tables=True))
            upper = estimate_counts(ntd, mode="upper")
            for node_id, table in res.tables.items():
                entries = sum(len(front) for front in table.values())
                assert entries <= upper[node_id].count + 1e-9
