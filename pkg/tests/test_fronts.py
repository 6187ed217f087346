"""Dominance, Pareto filtering, merging, and front joins."""

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_front
from treefront.fronts import (
    EMPTY_SOLUTION,
    check_front,
    dominates,
    front_from_text,
    front_to_text,
    front_vectors,
    heap_join,
    merge_fronts,
    product_fronts,
    reduce_entries,
    reduce_front,
    vec_add,
)


def F(*vecs):
    """Entries with position payloads, ready for the join operators."""
    return [(v, i) for i, v in enumerate(vecs)]


class TestDominates:
    def test_strict_componentwise(self):
        assert dominates((1, 1), (2, 2)) is True

    def test_equal_vectors(self):
        assert dominates((1, 1), (1, 1)) is False

    def test_incomparable(self):
        assert dominates((1, 3), (3, 1)) is False

    def test_weak_one_coordinate(self):
        assert dominates((1, 2), (1, 3)) is True
        assert dominates((1, 3), (1, 2)) is False


class TestReduce:
    def test_pairwise_filter(self):
        assert front_vectors(reduce_front([(1, 5), (2, 4), (2, 6)])) == [(1, 5), (2, 4)]

    def test_empty(self):
        assert reduce_front([]) == []

    def test_duplicate_collapse(self):
        assert front_vectors(reduce_front([(7, 7), (7, 7)])) == [(7, 7)]

    def test_equal_vectors_keep_smallest_payload(self):
        out = reduce_entries([((4, 4), 9), ((4, 4), 2), ((4, 4), 5)])
        assert out == [((4, 4), 2)]

    def test_three_objectives(self):
        pts = [(1, 2, 3), (2, 1, 3), (3, 3, 3), (1, 2, 3)]
        assert front_vectors(reduce_front(pts)) == [(1, 2, 3), (2, 1, 3)]


class TestMerge:
    def test_union_filter(self):
        out = merge_fronts(F((1, 5), (3, 2)), F((2, 4), (4, 1)))
        assert front_vectors(out) == [(1, 5), (2, 4), (3, 2), (4, 1)]

    def test_dominated_point_removed(self):
        assert front_vectors(merge_fronts(F((1, 1)), F((2, 2)))) == [(1, 1)]

    def test_empty_identity(self):
        assert front_vectors(merge_fronts([], F((0, 0)))) == [(0, 0)]


class TestProduct:
    def test_pairwise_sums(self):
        out = product_fronts(F((1, 5), (3, 2)), F((2, 4), (4, 1)), offset=(0, 0))
        assert front_vectors(out) == [(3, 9), (5, 6), (7, 3)]

    def test_additive_identity(self):
        x = F((2, 7), (5, 3))
        out = product_fronts(F((0, 0)), x, offset=(0, 0))
        assert front_vectors(out) == [v for v, _ in x]

    def test_offset_subtracted(self):
        out = product_fronts(F((2, 2)), F((3, 3)), offset=(1, 1))
        assert front_vectors(out) == [(4, 4)]

    def test_tie_keeps_first_position_pair(self):
        # (1,5)+(4,1) and (3,2)+(2,4) both sum to (5,6); position (0,1) wins
        out = product_fronts(F((1, 5), (3, 2)), F((2, 4), (4, 1)))
        tied = [w for v, w in out if v == (5, 6)]
        assert tied == [(0, 1)]


class TestHeapJoin:
    def test_matches_product_on_examples(self):
        cases = [
            (F((1, 5), (3, 2)), F((2, 4), (4, 1)), (0, 0)),
            (F((0, 0)), F((2, 7), (5, 3)), (0, 0)),
            (F((2, 2)), F((3, 3)), (1, 1)),
        ]
        for p1, p2, off in cases:
            assert heap_join(p1, p2, off) == product_fronts(p1, p2, off)

    def test_singletons(self):
        assert heap_join(F((2, 3)), F((4, 1))) == [((6, 4), (0, 0))]

    def test_empty_side(self):
        assert heap_join([], F((0, 0))) == []
        assert heap_join(F((0, 0)), []) == []

    def test_random_equivalence(self):
        rng = random.Random(2024)
        for _ in range(40):
            p1 = random_front(rng, rng.randint(1, 60), span=500)
            p2 = random_front(rng, rng.randint(1, 60), span=500)
            off = (rng.randint(-20, 20), rng.randint(-20, 20))
            assert heap_join(p1, p2, off) == product_fronts(p1, p2, off)

    def test_output_is_valid_front(self):
        rng = random.Random(7)
        out = heap_join(random_front(rng, 50), random_front(rng, 80))
        check_front(out)


@st.composite
def entry_lists(draw):
    pts = draw(
        st.lists(
            st.tuples(st.integers(0, 30), st.integers(0, 30)),
            min_size=1,
            max_size=12,
        )
    )
    return [(v, i) for i, v in enumerate(pts)]


@settings(max_examples=120, deadline=None)
@given(entry_lists(), entry_lists())
def test_join_equivalence_property(e1, e2):
    p1 = reduce_entries(e1)
    p2 = reduce_entries(e2)
    assert heap_join(p1, p2) == product_fronts(p1, p2)


@settings(max_examples=120, deadline=None)
@given(entry_lists())
def test_reduce_idempotent_and_sound(entries):
    front = reduce_entries(entries)
    check_front(front)
    assert reduce_entries(front) == front
    # every input vector is dominated-or-equalled by something kept
    kept = front_vectors(front)
    for v, _ in entries:
        assert any(k == v or dominates(k, v) for k in kept)


def test_vec_add_with_offset():
    assert vec_add((2, 2), (3, 3), offset=(1, 1)) == (4, 4)
    assert vec_add((2, 2), (3, 3)) == (5, 5)


class TestFrontText:
    def test_round_trip(self):
        vecs = [(15, 40), (20, 10), (40, 5)]
        assert front_from_text(front_to_text(vecs)) == vecs

    def test_one_decimal_rendering(self):
        assert front_to_text([(15, 40)]) == "1.5 4.0\n"

    def test_skips_comments_and_blanks(self):
        text = "# header\nc offset 1.0 2.0\n\n1.5 4.0\n"
        assert front_from_text(text) == [(15, 40)]


def test_empty_solution_sentinel():
    assert EMPTY_SOLUTION == 2**62 - 1
