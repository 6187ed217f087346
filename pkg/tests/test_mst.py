"""Multiobjective spanning-tree dynamic program."""

import random

import pytest

from conftest import elimination_td, random_connected_graph
from treefront.engine import DpConfig
from treefront.graphs import FormatError, Graph
from treefront.mst import (
    canonical_partition,
    edge_element,
    enumerate_partitions,
    partition_blocks,
    partitions_create,
    solve_mst,
    tree_edges,
)
from treefront.oracle import brute_mst, is_spanning_tree, tree_cost
from treefront.td import fuse_nodes, make_nice


def mst_ntd(g, fuse=False):
    td = elimination_td(g)
    ntd = make_nice(td, with_edge_nodes=True, edges=[(u, v) for u, v, _ in g.edges])
    return fuse_nodes(ntd) if fuse else ntd


class TestPartitions:
    def test_canonical_relabeling(self):
        assert canonical_partition(("x", "y", "x")) == (0, 1, 0)
        assert canonical_partition((5, 5, 2)) == (0, 0, 1)

    def test_bag_size_one(self):
        assert enumerate_partitions((7,)) == [(0,)]

    def test_bag_size_three_bell_number(self):
        parts = enumerate_partitions((1, 2, 3))
        assert len(parts) == 5
        assert len(set(parts)) == 5

    def test_bag_size_zero(self):
        assert enumerate_partitions(()) == [()]

    def test_blocks(self):
        assert partition_blocks((0, 1, 0)) == [(0, 2), (1,)]


class TestPartitionsCreate:
    def test_path_merge(self):
        # {{a,b},{c}} with {{b,c},{a}} -> {{a,b,c}}
        assert partitions_create((0, 0, 1), (0, 1, 1)) == (0, 0, 0)

    def test_parallel_edges_cycle(self):
        assert partitions_create((0, 0), (0, 0)) is None

    def test_all_singletons(self):
        s = (0, 1, 2)
        assert partitions_create(s, s) == s

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            partitions_create((0,), (0, 1))


def test_edge_element_round_trip():
    e = edge_element(7, 3)
    assert (e >> 32, e & 0xFFFFFFFF) == (3, 7)
    assert edge_element(3, 7) == e


class TestSolve:
    def test_triangle_front(self):
        g = Graph(3, 2, [(1, 2, (1, 3)), (2, 3, (2, 2)), (1, 3, (3, 1))])
        res = solve_mst(g, mst_ntd(g), DpConfig(fuse=False))
        assert res.vectors == [(3, 5), (4, 4), (5, 3)]
        by_vec = {v: sorted(tree_edges(res, sid)) for v, sid in res.front}
        assert by_vec == {
            (3, 5): [(1, 2), (2, 3)],
            (4, 4): [(1, 2), (1, 3)],
            (5, 3): [(1, 3), (2, 3)],
        }

    def test_tree_input_single_entry(self):
        g = Graph(4, 2, [(1, 2, (1, 0)), (2, 3, (2, 5)), (3, 4, (0, 1))])
        res = solve_mst(g, mst_ntd(g), DpConfig(fuse=False))
        assert res.vectors == [(3, 6)]
        assert sorted(tree_edges(res, res.front[0][1])) == [(1, 2), (2, 3), (3, 4)]

    def test_equal_cost_trees_dedup(self):
        g = Graph(3, 2, [(1, 2, (1, 1)), (2, 3, (1, 1)), (1, 3, (1, 1))])
        res = solve_mst(g, mst_ntd(g), DpConfig(fuse=False))
        assert res.vectors == [(2, 2)]

    def test_disconnected_graph_empty_front(self):
        g = Graph(4, 2, [(1, 2, (1, 1)), (3, 4, (1, 1))])
        res = solve_mst(g, mst_ntd(g), DpConfig(fuse=False))
        assert res.front == []

    def test_matches_oracle(self):
        rng = random.Random(61)
        for _ in range(12):
            g = random_connected_graph(rng, rng.randint(2, 6), rng.choice((2, 3)))
            expected = [v for v, _ in brute_mst(g)]
            res = solve_mst(g, mst_ntd(g), DpConfig(fuse=False))
            assert res.vectors == expected

    def test_witnesses_are_spanning_trees(self):
        rng = random.Random(67)
        g = random_connected_graph(rng, 6, 2)
        index = {}
        for i, (u, v, _) in enumerate(g.edges):
            index[(min(u, v), max(u, v))] = i
        res = solve_mst(g, mst_ntd(g), DpConfig(fuse=False))
        for vec, sid in res.front:
            idxs = [index[e] for e in tree_edges(res, sid)]
            assert is_spanning_tree(g, idxs)
            assert tree_cost(g, idxs) == vec

    def test_fusion_rejected_with_edge_nodes(self):
        g = Graph(3, 2, [(1, 2, (1, 1)), (2, 3, (1, 1))])
        with pytest.raises(ValueError, match="without edge nodes"):
            mst_ntd(g, fuse=True)

    def test_requires_edge_nodes(self):
        g = Graph(3, 2, [(1, 2, (1, 1)), (2, 3, (1, 1))])
        bare = make_nice(elimination_td(g))
        with pytest.raises(ValueError, match="edge"):
            solve_mst(g, bare, DpConfig())

    def test_rejects_terminal_edges(self):
        g = Graph(2, 2, [(0, 1, (1, 1))])
        with pytest.raises(FormatError, match="terminal"):
            solve_mst(g, mst_ntd(Graph(2, 2, [(1, 2, (1, 1))])), DpConfig())
