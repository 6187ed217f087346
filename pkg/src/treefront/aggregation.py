"""Bicriteria polygon aggregation: instance ingestion, reduction to an
s-t cut graph, and the knapsack-based hard-instance generator.

An instance lists triangles (candidate fill pieces, each with an area),
polygons (the fixed shapes being aggregated, with an area and any outer
perimeter not broken down into segments), and shared boundary segments
between triangles, polygons and the special element ``OUTSIDE``.  All
measures are quantized to one decimal at ingestion.

The reduction keeps only triangles as inner cut vertices.  Choosing the
source side S of a cut corresponds to aggregating the triangles in S:

* triangle-sink edge = (area, boundary to the outside) — paid when the
  triangle is chosen;
* triangle-triangle edge = (0, shared length) — paid when exactly one
  side is chosen;
* source-triangle edge = (0, total boundary to polygons) — paid when
  the triangle is NOT chosen, i.e. the polygon boundary survives.

Cut cost plus the reported constant offset (total polygon area, polygon
boundary not facing triangles) equals (A(S) + polygon area, P(S)), the
aggregate's true area and perimeter.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .fixedpoint import SCALE, format_value
from .fronts import Vec
from .graphs import Graph
from .stcut import CutInstance
from .td import TreeDecomposition

OUTSIDE = "OUTSIDE"


def quantize(value: float) -> int:
    """Fixed-point units at one decimal (round to nearest)."""
    return int(round(float(value) * SCALE))


def round_and_dedupe(vectors) -> list[Vec]:
    """Quantize float cost vectors to fixed-point units and collapse
    exact duplicates; output is lexicographically sorted."""
    seen = sorted({tuple(quantize(x) for x in vec) for vec in vectors})
    return list(seen)


@dataclass(frozen=True)
class AggregationInstance:
    triangles: tuple[tuple[str, int], ...]  # (id, area units)
    polygons: tuple[tuple[str, int, int], ...]  # (id, area units, outer perimeter units)
    segments: tuple[tuple[str, str, int], ...]  # (a, b, length units)


def _positive_units(value, what: str) -> int:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ValueError(f"{what} must be a number, got {value!r}") from None
    if not math.isfinite(x) or x <= 0:
        raise ValueError(f"{what} must be strictly positive, got {value!r}")
    units = quantize(x)
    if units <= 0:
        raise ValueError(f"{what} {value!r} is below the 0.1 resolution")
    return units


def load_instance(source) -> AggregationInstance:
    """Parse and validate the instance JSON (text or mapping)."""
    data = json.loads(source) if isinstance(source, (str, bytes)) else source
    if not isinstance(data, dict):
        raise ValueError("instance must be a JSON object")
    for key in ("triangles", "polygons", "segments"):
        if not isinstance(data.get(key), list):
            raise ValueError(f"instance needs a {key!r} list")
    ids: set[str] = set()
    triangles = []
    for item in data["triangles"]:
        tid = str(item.get("id"))
        if tid in ids or tid == OUTSIDE:
            raise ValueError(f"duplicate or reserved element id {tid!r}")
        ids.add(tid)
        triangles.append((tid, _positive_units(item.get("area"), f"triangle {tid} area")))
    tri_ids = {t for t, _ in triangles}
    polygons = []
    for item in data["polygons"]:
        pid = str(item.get("id"))
        if pid in ids or pid == OUTSIDE:
            raise ValueError(f"duplicate or reserved element id {pid!r}")
        ids.add(pid)
        area = _positive_units(item.get("area"), f"polygon {pid} area")
        perim = item.get("perimeter", 0)
        perim_units = 0
        if perim:
            perim_units = _positive_units(perim, f"polygon {pid} perimeter")
        polygons.append((pid, area, perim_units))
    segments = []
    tri_degree = {t: 0 for t in tri_ids}
    for item in data["segments"]:
        a, b = str(item.get("a")), str(item.get("b"))
        for x in (a, b):
            if x != OUTSIDE and x not in ids:
                raise ValueError(f"segment references unknown element {x!r}")
        if a == b:
            raise ValueError(f"segment from {a!r} to itself")
        if a == OUTSIDE and b == OUTSIDE:
            raise ValueError("segment between OUTSIDE and OUTSIDE")
        length = _positive_units(item.get("length"), f"segment {a}-{b} length")
        for x in (a, b):
            if x in tri_degree:
                tri_degree[x] += 1
        segments.append((a, b, length))
    over = [t for t, c in tri_degree.items() if c > 3]
    if over:
        raise ValueError(f"triangle {over[0]!r} has more than 3 boundary segments")
    return AggregationInstance(tuple(triangles), tuple(polygons), tuple(segments))


def instance_to_json(inst: AggregationInstance) -> str:
    data = {
        "triangles": [
            {"id": t, "area": float(format_value(a))} for t, a in inst.triangles
        ],
        "polygons": [
            {"id": p, "area": float(format_value(a)), "perimeter": float(format_value(r))}
            for p, a, r in inst.polygons
        ],
        "segments": [
            {"a": a, "b": b, "length": float(format_value(ln))}
            for a, b, ln in inst.segments
        ],
    }
    return json.dumps(data, indent=2) + "\n"


@dataclass
class CutReduction:
    graph: Graph
    cut: CutInstance
    offset: Vec  # add to cut costs to obtain (area, perimeter)
    triangle_ids: tuple[str, ...]  # vertex i+1 <-> triangle_ids[i]


def build_cut_graph(inst: AggregationInstance) -> CutReduction:
    """Reduce the instance to an s-t cut graph over its triangles."""
    tri_ids = tuple(t for t, _ in inst.triangles)
    index = {t: i + 1 for i, t in enumerate(tri_ids)}
    poly_ids = {p for p, _, _ in inst.polygons}
    n = len(tri_ids)
    sink = n + 1
    outside_len = {t: 0 for t in tri_ids}
    to_source = {t: 0 for t in tri_ids}
    inner: dict[tuple[int, int], int] = {}
    const_perim = sum(r for _, _, r in inst.polygons)
    for a, b, length in inst.segments:
        kinds = {a, b}
        if kinds <= set(tri_ids):
            u, v = sorted((index[a], index[b]))
            inner[(u, v)] = inner.get((u, v), 0) + length
        elif OUTSIDE in kinds:
            other = a if b == OUTSIDE else b
            if other in index:
                outside_len[other] += length
            else:
                const_perim += length  # polygon-outside boundary is constant
        elif kinds <= (set(tri_ids) | poly_ids):
            if a in index or b in index:
                tri = a if a in index else b
                to_source[tri] += length
            # polygon-polygon boundary can never become perimeter: drop
        else:  # pragma: no cover - load_instance already rejects this
            raise ValueError(f"segment {a}-{b} references unknown elements")
    edges: list[tuple[int, int, Vec]] = []
    for t in tri_ids:
        if to_source[t]:
            edges.append((0, index[t], (0, to_source[t])))
    for (u, v), length in sorted(inner.items()):
        edges.append((u, v, (0, length)))
    for t, area in inst.triangles:
        edges.append((index[t], sink, (area, outside_len[t])))
    graph = Graph(n=n, d=2, edges=edges)
    offset = (sum(a for _, a, _ in inst.polygons), const_perim)
    return CutReduction(graph, CutInstance.from_graph(graph), offset, tri_ids)


def objectives(inst: AggregationInstance, selection) -> Vec:
    """(area, perimeter) of aggregating the chosen triangle ids,
    evaluated directly from the instance measures (test oracle path)."""
    chosen = set(selection)
    unknown = chosen - {t for t, _ in inst.triangles}
    if unknown:
        raise ValueError(f"unknown triangle id {sorted(unknown)[0]!r}")
    poly = {p for p, _, _ in inst.polygons}
    area = sum(a for _, a, _ in inst.polygons)
    area += sum(a for t, a in inst.triangles if t in chosen)
    perim = sum(r for _, _, r in inst.polygons)
    inside = poly | chosen
    for a, b, length in inst.segments:
        in_a = a in inside
        in_b = b in inside
        if a == OUTSIDE:
            in_a = False
        if b == OUTSIDE:
            in_b = False
        if in_a != in_b:
            perim += length
    return (area, perim)


def triangle_sides(p: float, w: float) -> tuple[float, float, float]:
    """Right-triangle sides (a, b, c) for one knapsack item: area
    a*b/2 = w and boundary saving a + c - b = p, both holding to 1e-9."""
    b = (-p * p + 4 * w + math.sqrt(p**4 + 24 * p * p * w + 16 * w * w)) / (4 * p)
    a = 2 * w / b
    c = math.sqrt(a * a + b * b)
    if abs(a * b / 2 - w) > 1e-9 or abs(a + c - b - p) > 1e-9:
        raise ValueError(f"triangle construction failed its identities for p={p}, w={w}")
    return a, b, c


def knapsack_to_triangles(profits, weights) -> AggregationInstance:
    """Encode a knapsack instance as a polygon with one triangular nook
    per item.  A nook triangle touches the polygon along one cathetus
    and the hypotenuse; filling it adds area w_i and straightens the
    boundary, shortening the perimeter by p_i.  Both identities are
    verified to 1e-9 before quantization."""
    profits = [float(p) for p in profits]
    weights = [float(w) for w in weights]
    if len(profits) != len(weights):
        raise ValueError("profits and weights must have equal length")
    if not profits:
        raise ValueError("need at least one item")
    if any(p <= 0 for p in profits) or any(w <= 0 for w in weights):
        raise ValueError("profits and weights must be strictly positive")
    triangles = []
    segments = []
    shared_total = 0.0
    for i, (p, w) in enumerate(zip(profits, weights)):
        a, b, c = triangle_sides(p, w)
        tid = f"t{i + 1}"
        triangles.append((tid, quantize(w)))
        segments.append((tid, "P", quantize(a + c)))
        segments.append((tid, OUTSIDE, quantize(b)))
        shared_total += a + c
    polygon_area = max(quantize(sum(weights)), 1)
    outer = max(quantize(shared_total), 1)  # any positive outer boundary works
    polygons = ((("P"), polygon_area, outer),)
    return AggregationInstance(tuple(triangles), polygons, tuple(segments))


def path_td(n: int) -> TreeDecomposition:
    """Trivial decomposition with singleton bags in a path — valid for
    any graph whose inner vertices share no edges (e.g. knapsack nooks)."""
    if n <= 0:
        return TreeDecomposition(num_vertices=0, bags={1: frozenset()}, edges=[])
    bags = {i: frozenset({i}) for i in range(1, n + 1)}
    edges = [(i, i + 1) for i in range(1, n)]
    return TreeDecomposition(num_vertices=n, bags=bags, edges=edges)
