"""Bound-based join skipping: sections, bounds, and losslessness."""

import random

import pytest

from conftest import random_front
from treefront.fronts import dominates, heap_join
from treefront.heuristic import (
    BoundLine,
    HeuristicConfig,
    JoinStats,
    build_heuristic_front,
    extreme_subset,
    heuristic_join,
    section_count,
    section_lower_bounds,
    skip_test,
    upper_bounds,
)


class TestSections:
    def test_large_front_hits_cap(self):
        assert section_count(5000, 500) == 500

    def test_small_front_single_section(self):
        assert section_count(7, 500) == 1

    def test_ceil_division(self):
        assert section_count(11, 500) == 2

    def test_collinear_section_zero_shift(self):
        pts = [((0, 10), 0), ((5, 5), 1), ((10, 0), 2)]
        [sec] = section_lower_bounds(pts)
        for (x, y), _ in pts:
            assert sec.line.y_at(x) == pytest.approx(y)

    def test_lower_bound_is_below_all_points(self):
        rng = random.Random(3)
        front = random_front(rng, 200, span=5000)
        for sec in section_lower_bounds(front):
            for (x, y), _ in front[sec.lo : sec.hi]:
                assert sec.line.y_at(x) <= y + 1e-9


class TestHeuristicFront:
    def test_singletons_single_sum(self):
        h = build_heuristic_front([((1, 2), 0)], [((3, 4), 0)])
        assert h == [(4, 6)]

    def test_points_are_achievable_not_dominating(self):
        rng = random.Random(5)
        p1 = random_front(rng, 300, span=10**5)
        p2 = random_front(rng, 240, span=10**5)
        exact = [v for v, _ in heap_join(p1, p2)]
        h = build_heuristic_front(p1, p2)
        exact_set = set(exact)
        for hv in h:
            assert any(e == hv or dominates(e, hv) for e in exact)
            assert not any(dominates(hv, e) for e in exact_set)

    def test_extreme_subset_within_front(self):
        rng = random.Random(7)
        front = random_front(rng, 500, span=10**5)
        sub = extreme_subset(front)
        assert set(sub) <= set(front)
        assert front[0] in sub and front[-1] in sub


class TestUpperBounds:
    def test_single_point_degenerate_section(self):
        out = upper_bounds([(4, 9)])
        assert len(out) == 1
        assert out[0].a0 == out[0].a1 == 4.0

    def test_staircase_corners(self):
        out = upper_bounds([(1, 5), (2, 3)])
        # corner set B = {(1,5),(2,5)}: one flat section through both
        assert len(out) == 1
        line = out[0]
        assert (line.a0, line.y0, line.a1, line.y1) == (1.0, 5.0, 2.0, 5.0)

    def test_corners_on_or_below_their_line(self):
        rng = random.Random(11)
        h = [v for v, _ in random_front(rng, 120, span=10**4)]
        corners = [h[0]] + [(cur[0], prev[1]) for prev, cur in zip(h, h[1:])]
        lines = upper_bounds(h)
        for x, y in corners:
            covering = [l for l in lines if l.a0 <= x <= l.a1]
            assert covering
            assert all(l.y_at(x) >= y - 1e-9 for l in covering)


class TestSkipTest:
    def test_polyline_above_cover_skips(self):
        l1 = BoundLine(0, 10, 10, 8)
        l2 = BoundLine(0, 10, 10, 8)
        upper = [BoundLine(0, 5, 20, 5)]
        skip, _ = skip_test(l1, l2, upper)
        assert skip is True

    def test_polyline_dipping_below_does_not_skip(self):
        l1 = BoundLine(0, 10, 10, 8)
        l2 = BoundLine(0, 10, 10, 8)
        upper = [BoundLine(0, 30, 20, 30)]
        skip, _ = skip_test(l1, l2, upper)
        assert skip is False

    def test_uncovered_area_never_skips(self):
        l1 = BoundLine(0, 10, 10, 8)
        l2 = BoundLine(0, 10, 10, 8)
        upper = [BoundLine(5, 0, 12, 0)]  # does not cover [0, 20]
        skip, _ = skip_test(l1, l2, upper)
        assert skip is False


class TestHeuristicJoin:
    def test_empty_inputs(self):
        rng = random.Random(13)
        front = random_front(rng, 10)
        assert heuristic_join([], front) == []
        assert heuristic_join(front, []) == []

    def test_base_case_small_fronts(self):
        rng = random.Random(17)
        p1 = random_front(rng, 30, span=10**4)
        p2 = random_front(rng, 25, span=10**4)
        assert heuristic_join(p1, p2) == heap_join(p1, p2)

    def test_matches_heap_join_random(self):
        rng = random.Random(19)
        for _ in range(12):
            k1 = rng.randint(1, 800)
            k2 = rng.randint(1, 800)
            p1 = random_front(rng, k1)
            p2 = random_front(rng, k2)
            off = (rng.randint(-100, 100), rng.randint(-100, 100))
            assert heuristic_join(p1, p2, off) == heap_join(p1, p2, off)

    def test_forced_exact_h_still_exact(self):
        rng = random.Random(23)
        p1 = random_front(rng, 600)
        p2 = random_front(rng, 500)
        exact = heap_join(p1, p2)
        forced = heuristic_join(p1, p2, h_override=[v for v, _ in exact])
        assert forced == exact

    def test_three_objectives_fall_back(self):
        p1 = [((1, 2, 3), 0), ((2, 1, 3), 1)]
        p2 = [((0, 0, 0), 0)]
        assert heuristic_join(p1, p2) == heap_join(p1, p2)

    def test_stats_accumulate(self):
        rng = random.Random(29)
        p1 = random_front(rng, 3000)
        p2 = random_front(rng, 2500)
        stats = JoinStats()
        out = heuristic_join(p1, p2, stats=stats)
        assert out == heap_join(p1, p2)
        assert stats.joins == 1
        assert stats.pairs_total == 3000 * 2500
        assert 0.0 <= stats.skip_fraction <= 1.0


class TestConfig:
    def test_defaults(self):
        cfg = HeuristicConfig()
        assert (cfg.n_lower_max, cfg.n_h_max, cfg.n_upper_max) == (500, 350, 200)
        assert cfg.subsample == 0.04
        assert cfg.base_case == 40

    def test_from_mapping_with_prefix(self):
        cfg = HeuristicConfig.from_mapping(
            {"heuristic.n_lower_max": "64", "subsample": "0.1"}
        )
        assert cfg.n_lower_max == 64
        assert cfg.subsample == 0.1

    def test_unknown_key_rejected(self):
        with pytest.raises(KeyError):
            HeuristicConfig.from_mapping({"heuristic.bogus": 1})

    def test_skip_fraction_zero_pairs(self):
        assert JoinStats().skip_fraction == 0.0
