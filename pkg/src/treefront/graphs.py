"""Multiobjective graph instances and their text format.

Format (one-decimal edge costs, ``d`` objectives)::

    c optional comment
    p mo <n> <m> <d>
    e <u> <v> <c1> ... <cd>

Vertices are 1..n.  For s-t cut instances the source is vertex 0 and
the sink is vertex n+1; both may appear as edge endpoints.  Parallel
edges are allowed (costs accumulate), self-loops are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .fixedpoint import format_value, parse_vector
from .fronts import Vec


@dataclass
class Graph:
    n: int
    d: int
    edges: list[tuple[int, int, Vec]] = field(default_factory=list)

    @property
    def m(self) -> int:
        return len(self.edges)

    def adjacency(self) -> dict[int, list[tuple[int, Vec]]]:
        adj: dict[int, list[tuple[int, Vec]]] = {}
        for u, v, w in self.edges:
            adj.setdefault(u, []).append((v, w))
            adj.setdefault(v, []).append((u, w))
        return adj

    def inner_vertices(self) -> range:
        return range(1, self.n + 1)


class FormatError(ValueError):
    """Raised on malformed instance or decomposition text."""


def parse_graph(text: str) -> Graph:
    n = m = d = None
    edges: list[tuple[int, int, Vec]] = []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        fields = line.split()
        if fields[0] == "p":
            if n is not None:
                raise FormatError(f"line {ln}: duplicate problem line")
            if len(fields) != 5 or fields[1] != "mo":
                raise FormatError(f"line {ln}: expected 'p mo <n> <m> <d>'")
            n, m, d = (int(x) for x in fields[2:])
            if n < 0 or m < 0 or d < 1:
                raise FormatError(f"line {ln}: bad problem parameters")
        elif fields[0] == "e":
            if n is None:
                raise FormatError(f"line {ln}: edge before problem line")
            if len(fields) != 3 + d:
                raise FormatError(
                    f"line {ln}: expected 'e <u> <v>' plus {d} cost values"
                )
            u, v = int(fields[1]), int(fields[2])
            if u == v:
                raise FormatError(f"line {ln}: self-loop at vertex {u}")
            for x in (u, v):
                if not 0 <= x <= n + 1:
                    raise FormatError(f"line {ln}: vertex {x} out of range")
            edges.append((u, v, parse_vector(fields[3:])))
        else:
            raise FormatError(f"line {ln}: unknown record {fields[0]!r}")
    if n is None:
        raise FormatError("missing problem line 'p mo <n> <m> <d>'")
    if len(edges) != m:
        raise FormatError(f"problem line declares {m} edges, found {len(edges)}")
    return Graph(n=n, d=d, edges=edges)


def graph_to_text(g: Graph, comment: str | None = None) -> str:
    lines = []
    if comment:
        for c in comment.splitlines():
            lines.append(f"c {c}")
    lines.append(f"p mo {g.n} {g.m} {g.d}")
    for u, v, w in g.edges:
        lines.append(f"e {u} {v} " + " ".join(format_value(x) for x in w))
    return "\n".join(lines) + "\n"


def require_inner_edges(g: Graph) -> None:
    """Reject s/t endpoints for problems defined on plain graphs."""
    for u, v, _ in g.edges:
        if not (1 <= u <= g.n and 1 <= v <= g.n):
            raise FormatError(
                f"edge {{{u},{v}}} uses a reserved terminal vertex; "
                f"this problem expects endpoints in 1..{g.n}"
            )
