"""Lossless join acceleration for two objectives.

The join of two fronts enumerates |P1| x |P2| candidate sums.  Most of
them are dominated, and whole blocks can be proven dominated ahead of
time: partition each input front into consecutive sections, bound every
section from below by a shifted chord, bound an easily-computed subset
H of achievable join values from above by a staircase of per-section
lines, and skip a section pair whenever the Minkowski sum of its two
lower chords stays strictly above every overlapping upper line.  All
skipped candidates are then strictly dominated by some value in H, so
the surviving enumeration still yields the exact Pareto front
(byte-identical to the plain heap join), witnesses included.

Soundness notes
---------------
* An upper line that dominates (lies on or above) the staircase corner
  points of H over its span also dominates the H staircase boundary
  there, because between consecutive corners the boundary is constant
  at the lower corner height and a line above both corners is above
  that plateau.
* The skip requires the polyline to clear every overlapping upper line
  *strictly* (by a safety margin); candidates equal to an H value are
  therefore never skipped, and no witness pair of an H value can be
  skipped at all (its own polyline passes through or below that value).
* The section pair's area range must be fully covered by upper lines;
  outside the covered span nothing is provably dominated, so no skip.
* Bound geometry runs in floats over fixed-point integers; the strict
  margin (1e-6 in integer units, far above accumulated float error of
  ~1e-8) keeps wrong skips impossible.  Forgone skips only cost time.

The heuristic front H is itself an exact (skip-accelerated) join of
small subsets: per-section lower-convex-hull extremes at the top level,
a ~4% subsample at deeper recursion levels, and a plain heap join below
the base size.  Every H value is achievable, which the bound soundness
relies on.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from math import ceil, inf

from .fronts import Front, PairFront, Vec, heap_join, reduce_entries, vec_add

SKIP_MARGIN = 1e-6


@dataclass
class HeuristicConfig:
    enabled: bool = True
    n_lower_max: int = 500  # heuristic.n_lower_max
    n_h_max: int = 350  # heuristic.n_h_max
    n_upper_max: int = 200  # heuristic.n_upper_max
    subsample: float = 0.04  # heuristic.subsample
    base_case: int = 40  # exact join below this size

    @staticmethod
    def from_mapping(m: dict) -> "HeuristicConfig":
        cfg = HeuristicConfig()
        for key, value in m.items():
            name = key.removeprefix("heuristic.")
            if not hasattr(cfg, name):
                raise KeyError(f"unknown heuristic config key {key!r}")
            setattr(cfg, name, type(getattr(cfg, name))(value))
        return cfg


DEFAULT_CONFIG = HeuristicConfig()


@dataclass
class BoundLine:
    """A line segment over an area interval (floats; y already shifted)."""

    a0: float
    y0: float
    a1: float
    y1: float

    def y_at(self, a: float) -> float:
        if self.a1 == self.a0:
            return min(self.y0, self.y1)
        t = (a - self.a0) / (self.a1 - self.a0)
        return self.y0 + t * (self.y1 - self.y0)


@dataclass
class LowerSection:
    lo: int  # first point index
    hi: int  # one past last point index
    line: BoundLine


@dataclass
class JoinStats:
    pairs_total: int = 0
    pairs_skipped: int = 0
    joins: int = 0

    def merge(self, other: "JoinStats") -> None:
        self.pairs_total += other.pairs_total
        self.pairs_skipped += other.pairs_skipped
        self.joins += other.joins

    @property
    def skip_fraction(self) -> float:
        return self.pairs_skipped / self.pairs_total if self.pairs_total else 0.0


def _section_ranges(n: int, k: int) -> list[tuple[int, int]]:
    """Split ``n`` items into ``k`` consecutive sections; the first
    ``n % k`` sections get one extra item."""
    base, extra = divmod(n, k)
    out = []
    lo = 0
    for i in range(k):
        hi = lo + base + (1 if i < extra else 0)
        out.append((lo, hi))
        lo = hi
    return out


def section_count(n: int, cap: int) -> int:
    return max(1, min(cap, ceil(n / 10)))


def _chord(points: list[Vec], shift_down: bool) -> BoundLine:
    """Chord through the endpoints, shifted by the minimal alpha >= 0 so
    every point ends up on the correct side."""
    (xa, ya), (xb, yb) = points[0], points[-1]
    line = BoundLine(float(xa), float(ya), float(xb), float(yb))
    alpha = 0.0
    for x, y in points:
        gap = line.y_at(x) - y
        if shift_down:
            alpha = max(alpha, gap)
        else:
            alpha = max(alpha, -gap)
    if shift_down:
        line.y0 -= alpha
        line.y1 -= alpha
    else:
        line.y0 += alpha
        line.y1 += alpha
    return line


def section_lower_bounds(
    front: list, cfg: HeuristicConfig = DEFAULT_CONFIG
) -> list[LowerSection]:
    """Per-section lower bound lines for a front (entries or bare vectors)."""
    pts = [e[0] if isinstance(e[0], tuple) else e for e in front]
    k = section_count(len(pts), cfg.n_lower_max)
    out = []
    for lo, hi in _section_ranges(len(pts), k):
        out.append(LowerSection(lo, hi, _chord(pts[lo:hi], shift_down=True)))
    return out


def upper_bounds(
    h_vectors: list[Vec], cfg: HeuristicConfig = DEFAULT_CONFIG
) -> list[BoundLine]:
    """Upper bound lines over the staircase corners of H.

    The corner set B starts at H[0] and adds (area of H[k], second
    objective of H[k-1]) for k >= 1.  B is split into sections that
    overlap at one shared point, at least 4 points per section when
    possible; each section's chord is shifted up minimally.
    """
    if not h_vectors:
        return []
    corners: list[Vec] = [h_vectors[0]]
    for prev, cur in zip(h_vectors, h_vectors[1:]):
        corners.append((cur[0], prev[1]))
    nseg = len(corners) - 1
    k = max(1, min(cfg.n_upper_max, nseg // 3)) if nseg else 1
    out = []
    lo = 0
    base, extra = divmod(nseg, k) if nseg else (0, 0)
    for i in range(k):
        hi = lo + base + (1 if i < extra else 0)
        sec = corners[lo : hi + 1]  # sections share their boundary point
        out.append(_chord(sec, shift_down=False))
        lo = hi
    return out


def _slope_leq(l1: BoundLine, l2: BoundLine) -> bool:
    dx1, dy1 = l1.a1 - l1.a0, l1.y1 - l1.y0
    dx2, dy2 = l2.a1 - l2.a0, l2.y1 - l2.y0
    if dx1 == 0:
        return True  # single-point section: treat as -inf slope
    if dx2 == 0:
        return False
    return dy1 * dx2 <= dy2 * dx1


def _polyline(l1: BoundLine, l2: BoundLine) -> tuple[tuple[float, float], ...]:
    """Lower boundary of the Minkowski sum of two bound segments: three
    points, traversing the steeper segment first."""
    first, second = (l1, l2) if _slope_leq(l1, l2) else (l2, l1)
    p0 = (l1.a0 + l2.a0, l1.y0 + l2.y0)
    p1 = (first.a1 + second.a0, first.y1 + second.y0)
    p2 = (l1.a1 + l2.a1, l1.y1 + l2.y1)
    return p0, p1, p2


def _poly_y(poly, a: float) -> float:
    p0, p1, p2 = poly
    if a <= p1[0]:
        seg = BoundLine(p0[0], p0[1], p1[0], p1[1])
    else:
        seg = BoundLine(p1[0], p1[1], p2[0], p2[1])
    return seg.y_at(a)


def skip_test(
    l1: BoundLine,
    l2: BoundLine,
    uppers: list[BoundLine],
    cursor: int = 0,
) -> tuple[bool, int]:
    """Decide whether the section pair bounded below by ``l1 + l2`` is
    provably dominated.  ``uppers`` must be sorted and contiguous in
    area; ``cursor`` is a resume hint (monotone scans reuse it).
    Returns (skip, advanced_cursor)."""
    poly = _polyline(l1, l2)
    a_lo, a_hi = poly[0][0], poly[2][0]
    if not uppers or a_lo < uppers[0].a0 or a_hi > uppers[-1].a1:
        return False, cursor  # not fully covered: nothing provable outside
    while cursor < len(uppers) and uppers[cursor].a1 < a_lo:
        cursor += 1
    i = cursor
    while i < len(uppers) and uppers[i].a0 <= a_hi:
        u = uppers[i]
        lo = max(a_lo, u.a0)
        hi = min(a_hi, u.a1)
        checks = [lo, hi]
        if lo < poly[1][0] < hi:
            checks.append(poly[1][0])
        for a in checks:
            if _poly_y(poly, a) - u.y_at(a) <= SKIP_MARGIN:
                return False, cursor
        i += 1
    return True, cursor


def _lower_hull(points: list) -> list:
    """Andrew's monotone chain, lower hull, on (vec, id) entries whose
    vectors are strictly increasing in the first coordinate.  Exact
    integer cross products."""
    hull: list = []
    for entry in points:
        x, y = entry[0]
        while len(hull) >= 2:
            (x1, y1) = hull[-2][0]
            (x2, y2) = hull[-1][0]
            if (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(entry)
    return hull


def extreme_subset(front: Front, cfg: HeuristicConfig = DEFAULT_CONFIG) -> Front:
    """Per-section lower-convex-hull extremes (linear-combination
    optimizers), section endpoints included."""
    if not front:
        return []
    k = section_count(len(front), cfg.n_h_max)
    out: Front = []
    for lo, hi in _section_ranges(len(front), k):
        out.extend(_lower_hull(front[lo:hi]))
    return out


def _subsample(front: Front, cfg: HeuristicConfig) -> Front:
    step = ceil(1 / cfg.subsample)
    picked = list(range(0, len(front), step))
    if picked[-1] != len(front) - 1:
        picked.append(len(front) - 1)
    return [front[i] for i in picked]


def _heap_join_skips(
    p1: Front,
    p2: Front,
    secs1: list[LowerSection],
    allowed: list[list[tuple[int, int]]],
) -> PairFront:
    """Heap enumeration restricted to allowed index ranges of p2 per
    section of p1.  Enumeration order is still lexicographic in the
    summed vector with (i, j) tie-breaks, so output and witnesses match
    the unrestricted heap join exactly."""
    sec_of = [0] * len(p1)
    for si, sec in enumerate(secs1):
        for i in range(sec.lo, sec.hi):
            sec_of[i] = si

    heap = []
    for i, (v1, _) in enumerate(p1):
        ranges = allowed[sec_of[i]]
        if not ranges:
            continue
        j = ranges[0][0]
        v = vec_add(v1, p2[j][0])
        heap.append((v, i, j, 0))
    heapq.heapify(heap)
    out: PairFront = []
    last = inf
    while heap:
        v, i, j, ri = heapq.heappop(heap)
        if v[1] < last:
            out.append((v, (p1[i][1], p2[j][1])))
            last = v[1]
        ranges = allowed[sec_of[i]]
        nj = j + 1
        if nj >= ranges[ri][1]:
            ri += 1
            if ri >= len(ranges):
                continue
            nj = ranges[ri][0]
        heapq.heappush(heap, (vec_add(p1[i][0], p2[nj][0]), i, nj, ri))
    return out


def _merge_ranges(sections: list[LowerSection], keep: list[bool]) -> list[tuple[int, int]]:
    ranges: list[tuple[int, int]] = []
    for sec, ok in zip(sections, keep):
        if not ok:
            continue
        if ranges and ranges[-1][1] == sec.lo:
            ranges[-1] = (ranges[-1][0], sec.hi)
        else:
            ranges.append((sec.lo, sec.hi))
    return ranges


def _shift_front(front: Front, offset: Vec | None) -> Front:
    if offset is None:
        return list(front)
    return [(tuple(x - o for x, o in zip(v, offset)), sid) for v, sid in front]


def _h_values(p1: Front, p2: Front, cfg: HeuristicConfig, top: bool) -> list[Vec]:
    """Exact Pareto values of a small achievable subset join: extremes
    at the top level, plain subsampling below."""
    a = extreme_subset(p1, cfg) if top else _subsample(p1, cfg)
    b = extreme_subset(p2, cfg) if top else _subsample(p2, cfg)
    return [v for v, _ in _skip_join(a, b, cfg, None, None)]


def _skip_join(
    p1: Front,
    p2: Front,
    cfg: HeuristicConfig,
    h_override: list[Vec] | None,
    stats: JoinStats | None,
) -> PairFront:
    if not p1 or not p2:
        return []
    if len(p1) <= cfg.base_case and len(p2) <= cfg.base_case:
        return heap_join(p1, p2)
    h_vals = h_override if h_override is not None else _h_values(p1, p2, cfg, top=False)
    uppers = upper_bounds(h_vals, cfg)
    secs1 = section_lower_bounds(p1, cfg)
    secs2 = section_lower_bounds(p2, cfg)
    allowed: list[list[tuple[int, int]]] = []
    skipped_pairs = 0
    for s1 in secs1:
        keep = [True] * len(secs2)
        cursor = 0
        for sj, s2 in enumerate(secs2):
            skip, cursor = skip_test(s1.line, s2.line, uppers, cursor)
            if skip:
                keep[sj] = False
                skipped_pairs += (s1.hi - s1.lo) * (s2.hi - s2.lo)
        allowed.append(_merge_ranges(secs2, keep))
    if stats is not None:
        stats.joins += 1
        stats.pairs_total += len(p1) * len(p2)
        stats.pairs_skipped += skipped_pairs
    return _heap_join_skips(p1, p2, secs1, allowed)


def build_heuristic_front(
    p1: Front,
    p2: Front,
    offset: Vec | None = None,
    cfg: HeuristicConfig = DEFAULT_CONFIG,
) -> list[Vec]:
    """The achievable value subset H used for upper bounds: the exact
    join of the two fronts' per-section extreme subsets."""
    if not p1 or not p2:
        return []
    return _h_values(p1, _shift_front(p2, offset), cfg, top=True)


def heuristic_join(
    p1: Front,
    p2: Front,
    offset: Vec | None = None,
    cfg: HeuristicConfig = DEFAULT_CONFIG,
    h_override: list[Vec] | None = None,
    stats: JoinStats | None = None,
) -> PairFront:
    """Exact join via bound-based section skipping (two objectives).

    Output is byte-identical to ``heap_join(p1, p2, offset)``.  Other
    dimension counts fall back to the plain join.  ``h_override``
    injects a replacement H (test hook: forcing the exact join values
    maximizes skipping and must not change the result)."""
    if not p1 or not p2:
        return []
    if len(p1[0][0]) != 2 or not cfg.enabled:
        return heap_join(p1, p2, offset)
    p2s = _shift_front(p2, offset)
    if h_override is None and not (len(p1) <= cfg.base_case and len(p2) <= cfg.base_case):
        h_override = _h_values(p1, p2s, cfg, top=True)
    return _skip_join(p1, p2s, cfg, h_override, stats)


def family_join(
    subjoins: list[tuple[Front, Front, Vec | None]],
    cfg: HeuristicConfig = DEFAULT_CONFIG,
    stats: JoinStats | None = None,
) -> list[tuple[Vec, tuple]]:
    """Join several (front1, front2, offset) pairs destined for the same
    output key and Pareto-merge the results.

    With the heuristic enabled (two objectives) a single heuristic front
    is shared by all pairs: it merges each pair's extreme-subset join,
    so sections contribute proportionally to their front sizes.  Each
    emitted entry carries (pair_index, left_id, right_id) so the caller
    can materialize provenance for survivors only.
    """
    live = [
        (k, p1, _shift_front(p2, off))
        for k, (p1, p2, off) in enumerate(subjoins)
        if p1 and p2
    ]
    if not live:
        return []
    d = len(live[0][1][0][0])
    use_h = cfg.enabled and d == 2
    shared_h: list[Vec] | None = None
    if use_h and len(live) > 1:
        merged: list[tuple[Vec, int]] = []
        for _, p1, p2s in live:
            merged.extend((v, 0) for v in _h_values(p1, p2s, cfg, top=True))
        shared_h = [v for v, _ in reduce_entries(merged)]
    items: list[tuple[Vec, tuple]] = []
    for k, p1, p2s in live:
        if use_h:
            h = shared_h if shared_h is not None else None
            pairs = heuristic_join(p1, p2s, None, cfg, h_override=h, stats=stats)
        else:
            pairs = heap_join(p1, p2s)
        items.extend((v, (k, s1, s2)) for v, (s1, s2) in pairs)
    return reduce_entries(items)
