"""Pareto front algebra over fixed-point cost vectors (minimization).

A front is a list of ``(vector, solution_id)`` entries kept in strict
lexicographic vector order with no entry dominating another.  For two
objectives that means strictly increasing first coordinate and strictly
decreasing second coordinate.  Equal vectors are collapsed to a single
entry keeping the smallest id.

Two combination operators exist: ``merge_fronts`` (set union, then
filter) and the join ``product_fronts``/``heap_join`` (pairwise sums
minus a constant offset, then filter).  The heap variant enumerates
pairs in lexicographic order of the summed vector and is the workhorse
for two objectives; higher dimensions fall back to the product with a
divide-and-conquer maximal-vector filter.
"""

from __future__ import annotations

import heapq
from bisect import bisect_right

from .fixedpoint import format_vector, parse_vector

Vec = tuple[int, ...]
Entry = tuple[Vec, int]
Front = list[Entry]
# joins report which (left_id, right_id) pair realizes each entry
PairFront = list[tuple[Vec, tuple[int, int]]]

# Sentinel solution id: "no provenance" / the empty solution.
EMPTY_SOLUTION = 2**62 - 1


def dominates(a: Vec, b: Vec) -> bool:
    """True iff ``a`` dominates ``b``: componentwise <= and somewhere <."""
    strict = False
    for x, y in zip(a, b):
        if x > y:
            return False
        if x < y:
            strict = True
    return strict


def vec_add(a: Vec, b: Vec, offset: Vec | None = None) -> Vec:
    if offset is None:
        return tuple(x + y for x, y in zip(a, b))
    return tuple(x + y - o for x, y, o in zip(a, b, offset))


def _sweep2(items: list) -> list:
    """Filter lex-sorted (vec, *rest) items, d == 2.

    One pass: emit an item iff its second coordinate strictly improves
    on the last emitted one.  Handles dominance and duplicate vectors in
    the same sweep (the first of an equal-vector run wins, which is the
    smallest payload because the input is fully sorted).
    """
    out = []
    last = None
    for it in items:
        y = it[0][1]
        if last is None or y < last:
            out.append(it)
            last = y
    return out


def _small_filter(items: list) -> list:
    """Quadratic filter for short lex-sorted, vector-distinct lists."""
    out: list = []
    for it in items:
        v = it[0]
        if not any(dominates(q[0], v) for q in out):
            out.append(it)
    return out


def _filter_by_staircase(kept: list, cands: list) -> list:
    """d == 3 cross filter: drop candidates weakly dominated in the
    projection onto coordinates 1..2 by any kept item (first coordinate
    is already <= by lex order, vectors are distinct)."""
    proj = sorted((q[0][1], q[0][2]) for q in kept)
    ys = []
    minz = []
    best = None
    for y, z in proj:
        if best is None or z < best:
            best = z
        if ys and ys[-1] == y:
            minz[-1] = best
        else:
            ys.append(y)
            minz.append(best)
    out = []
    for it in cands:
        v = it[0]
        k = bisect_right(ys, v[1]) - 1
        if k < 0 or minz[k] > v[2]:
            out.append(it)
    return out


def _filter_pairwise_weak(kept: list, cands: list) -> list:
    """Cross filter for d >= 4: weak componentwise test on coords 1.."""
    out = []
    for it in cands:
        v = it[0]
        dead = False
        for q in kept:
            u = q[0]
            if all(u[k] <= v[k] for k in range(1, len(v))):
                dead = True
                break
        if not dead:
            out.append(it)
    return out


def _kung(items: list, d: int) -> list:
    """Divide-and-conquer maximal-vector filter on lex-sorted,
    vector-distinct items (d >= 3)."""
    if len(items) <= 48:
        return _small_filter(items)
    mid = len(items) // 2
    left = _kung(items[:mid], d)
    right = _kung(items[mid:], d)
    if d == 3:
        right = _filter_by_staircase(left, right)
    else:
        right = _filter_pairwise_weak(left, right)
    return left + right


def _filter_sorted(items: list, d: int) -> list:
    """Nondominated filter over sorted (vec, *payload) items; collapses
    equal vectors to the first (= smallest payload) occurrence."""
    if not items:
        return []
    if d == 2:
        return _sweep2(items)
    distinct = []
    prev = None
    for it in items:
        if it[0] != prev:
            distinct.append(it)
            prev = it[0]
    if d == 1:
        return distinct[:1]
    return _kung(distinct, d)


def reduce_entries(entries: list) -> list:
    """Pareto-filter arbitrary (vec, payload) pairs.

    Payloads must be orderable; among equal vectors the smallest payload
    is retained, which makes results independent of input order.
    """
    if not entries:
        return []
    d = len(entries[0][0])
    return _filter_sorted(sorted(entries), d)


def reduce_front(points: list[Vec]) -> Front:
    """Pareto-filter bare cost vectors into a front (no provenance)."""
    return reduce_entries([(tuple(p), EMPTY_SOLUTION) for p in points])


def merge_fronts(p1: Front, p2: Front) -> Front:
    """Union of two fronts, filtered; equal vectors keep the smaller id."""
    return reduce_entries(list(p1) + list(p2))


def merge_many(fronts: list) -> list:
    out: list = []
    for f in fronts:
        out.extend(f)
    return reduce_entries(out)


def product_fronts(p1: Front, p2: Front, offset: Vec | None = None) -> PairFront:
    """All pairwise sums minus ``offset``, Pareto-filtered.

    Each surviving entry reports the (left_id, right_id) pair that
    realizes it; among equal vectors the pair with the smallest
    (left_index, right_index) position wins, matching ``heap_join``.
    """
    items = []
    for i, (v1, s1) in enumerate(p1):
        for j, (v2, s2) in enumerate(p2):
            items.append((vec_add(v1, v2, offset), i, j, s1, s2))
    if not items:
        return []
    d = len(items[0][0])
    kept = _filter_sorted(sorted(items), d)
    return [(v, (s1, s2)) for v, _i, _j, s1, s2 in kept]


def heap_join(p1: Front, p2: Front, offset: Vec | None = None) -> PairFront:
    """Join two fronts via lexicographic heap enumeration (d == 2).

    One heap node per element of the smaller front cursors through the
    larger one; pairs pop in lexicographic order of the summed vector,
    so a single strict second-coordinate sweep performs dominance
    filtering and duplicate collapsing on the fly.  Ties on equal sums
    are ordered by (left_index, right_index) so the retained witness
    pair matches ``product_fronts`` exactly.  Dimensions other than two
    fall back to ``product_fronts``.
    """
    if not p1 or not p2:
        return []
    if len(p1[0][0]) != 2:
        return product_fronts(p1, p2, offset)
    if offset is not None:
        p2 = [(tuple(x - o for x, o in zip(v, offset)), s) for v, s in p2]
    swap = len(p2) < len(p1)
    rows, cols = (p2, p1) if swap else (p1, p2)

    def key(ri: int, ci: int):
        v = vec_add(rows[ri][0], cols[ci][0])
        return (v, ci, ri) if swap else (v, ri, ci)

    heap = [key(ri, 0) + (ri, 0) for ri in range(len(rows))]
    heapq.heapify(heap)
    out: PairFront = []
    last = None
    ncols = len(cols)
    while heap:
        item = heapq.heappop(heap)
        v, ri, ci = item[0], item[3], item[4]
        if last is None or v[1] < last:
            rs, cs = rows[ri][1], cols[ci][1]
            out.append((v, (cs, rs) if swap else (rs, cs)))
            last = v[1]
        if ci + 1 < ncols:
            heapq.heappush(heap, key(ri, ci + 1) + (ri, ci + 1))
    return out


def front_vectors(front: list) -> list[Vec]:
    return [v for v, _ in front]


def check_front(front: list) -> None:
    """Raise AssertionError unless ``front`` is a valid Pareto front."""
    vecs = front_vectors(front)
    for a, b in zip(vecs, vecs[1:]):
        assert a < b, f"front not strictly lex-sorted: {a} !< {b}"
    if vecs and len(vecs[0]) == 2:
        for a, b in zip(vecs, vecs[1:]):
            assert a[1] > b[1], f"second objective not decreasing: {a}, {b}"
    else:
        refiltered = front_vectors(reduce_front(vecs))
        assert refiltered == vecs, "front contains dominated entries"


def front_to_text(vectors: list[Vec]) -> str:
    """Delimited text form: one vector per line, one decimal digit."""
    return "".join(format_vector(v) + "\n" for v in vectors)


def front_from_text(text: str) -> list[Vec]:
    vecs = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("c "):
            continue
        vecs.append(parse_vector(line.split()))
    return vecs
