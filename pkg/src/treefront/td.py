"""Tree decompositions: parsing, validation, nice form, node fusion.

The text format is the PACE 2017 ``.td`` layout::

    c optional comment
    s td <numBags> <maxBagSize> <n>
    b <bagId> <v1> <v2> ...
    <i> <j>            (tree edge between bag ids)

``make_nice`` turns an arbitrary decomposition into a *nice* one whose
nodes are leaves, single-vertex introduces, single-vertex forgets and
binary joins with equal child bags, rooted and capped by empty bags.
Optionally one introduce-edge node per graph edge is spliced in at the
topmost bag containing both endpoints.  ``fuse_nodes`` then collapses
join + forget chains into join-forget nodes and absorbs the introduce
chains directly below them, which is what makes skipping introduce
records possible during the cut DP.

Node ids are dense 0-based indices; every rewrite renumbers.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .graphs import FormatError, Graph

LEAF = "leaf"
INTRODUCE = "introduce"
FORGET = "forget"
JOIN = "join"
INTRODUCE_EDGE = "edge"
JOIN_FORGET = "join_forget"
INTRO_JOIN_FORGET = "intro_join_forget"

JOIN_FAMILY = (JOIN, JOIN_FORGET, INTRO_JOIN_FORGET)

MAX_BAG = 32


@dataclass
class TreeDecomposition:
    num_vertices: int
    bags: dict[int, frozenset[int]]
    edges: list[tuple[int, int]]

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags.values()), default=0) - 1

    def neighbors(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {i: set() for i in self.bags}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj


def parse_td(text: str) -> TreeDecomposition:
    header = None
    bags: dict[int, frozenset[int]] = {}
    edges: list[tuple[int, int]] = []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        fields = line.split()
        if fields[0] == "s":
            if header is not None:
                raise FormatError(f"line {ln}: duplicate solution line")
            if len(fields) != 5 or fields[1] != "td":
                raise FormatError(f"line {ln}: expected 's td <bags> <size> <n>'")
            header = tuple(int(x) for x in fields[2:])
        elif fields[0] == "b":
            if header is None:
                raise FormatError(f"line {ln}: bag before solution line")
            bid = int(fields[1])
            if bid in bags:
                raise FormatError(f"line {ln}: duplicate bag {bid}")
            if not 1 <= bid <= header[0]:
                raise FormatError(f"line {ln}: bag id {bid} out of range")
            verts = frozenset(int(v) for v in fields[2:])
            for v in verts:
                if not 1 <= v <= header[2]:
                    raise FormatError(f"line {ln}: vertex {v} out of range")
            if len(verts) > MAX_BAG:
                raise FormatError(
                    f"line {ln}: bag {bid} exceeds the hard cap of {MAX_BAG} vertices"
                )
            bags[bid] = verts
        else:
            if header is None:
                raise FormatError(f"line {ln}: edge before solution line")
            if len(fields) != 2:
                raise FormatError(f"line {ln}: expected tree edge '<i> <j>'")
            a, b = int(fields[0]), int(fields[1])
            for x in (a, b):
                if not 1 <= x <= header[0]:
                    raise FormatError(f"line {ln}: bag id {x} out of range")
            edges.append((a, b))
    if header is None:
        raise FormatError("missing solution line 's td ...'")
    num_bags, _, n = header
    if num_bags == 0:
        if n != 0:
            raise FormatError("decomposition with no bags cannot cover vertices")
        return TreeDecomposition(0, {1: frozenset()}, [])
    for bid in range(1, num_bags + 1):
        bags.setdefault(bid, frozenset())
    # tree check
    adj: dict[int, set[int]] = {i: set() for i in bags}
    for a, b in edges:
        if b in adj[a]:
            raise FormatError(f"duplicate tree edge {a}-{b}")
        adj[a].add(b)
        adj[b].add(a)
    if len(edges) != num_bags - 1:
        raise FormatError(
            f"{num_bags} bags need {num_bags - 1} tree edges, found {len(edges)}"
        )
    seen = {1}
    queue = deque([1])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                queue.append(y)
    if len(seen) != num_bags:
        raise FormatError("tree edges do not connect all bags")
    # vertex coverage
    covered: set[int] = set()
    for b in bags.values():
        covered |= b
    missing = set(range(1, n + 1)) - covered
    if missing:
        raise FormatError(f"coverage violation: vertices {sorted(missing)} in no bag")
    td = TreeDecomposition(n, bags, edges)
    _check_subtree_connectivity(td, adj)
    return td


def _check_subtree_connectivity(td: TreeDecomposition, adj) -> None:
    holding: dict[int, list[int]] = {}
    for bid, bag in td.bags.items():
        for v in bag:
            holding.setdefault(v, []).append(bid)
    for v, nodes in holding.items():
        member = set(nodes)
        seen = {nodes[0]}
        queue = deque([nodes[0]])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y in member and y not in seen:
                    seen.add(y)
                    queue.append(y)
        if len(seen) != len(member):
            raise FormatError(
                f"vertex {v} appears in disconnected bags {sorted(member)}"
            )


def validate_for_graph(td: TreeDecomposition, g: Graph) -> None:
    """Check the edge-coverage property for all inner edges of ``g``."""
    if td.num_vertices != g.n:
        raise FormatError(
            f"decomposition covers {td.num_vertices} vertices, graph has {g.n}"
        )
    for u, v, _ in g.edges:
        if not (1 <= u <= g.n and 1 <= v <= g.n):
            continue  # terminal edges need no bag
        if not any(u in b and v in b for b in td.bags.values()):
            raise FormatError(f"edge {{{u},{v}}} not contained in any bag")


def td_to_text(td: TreeDecomposition, comment: str | None = None) -> str:
    lines = []
    if comment:
        for c in comment.splitlines():
            lines.append(f"c {c}")
    size = max((len(b) for b in td.bags.values()), default=0)
    ids = sorted(td.bags)
    renum = {bid: i + 1 for i, bid in enumerate(ids)}
    lines.append(f"s td {len(ids)} {size} {td.num_vertices}")
    for bid in ids:
        lines.append(f"b {renum[bid]} " + " ".join(str(v) for v in sorted(td.bags[bid])))
    for a, b in td.edges:
        lines.append(f"{renum[a]} {renum[b]}")
    return "\n".join(lines) + "\n"


@dataclass
class NiceNode:
    id: int
    kind: str
    bag: tuple[int, ...]  # the bag the parent sees (table key domain)
    children: list[int] = field(default_factory=list)
    vertex: int | None = None  # introduce / forget payload
    edge: tuple[int, int, int] | None = None  # (u, v, edge_index)
    forgotten: tuple[int, ...] = ()  # join-forget: F
    skipped: tuple[tuple[int, ...], tuple[int, ...]] = ((), ())  # per-side I

    def join_bag(self) -> tuple[int, ...]:
        """The working bag at a join-family node (bag plus forgotten)."""
        return tuple(sorted(set(self.bag) | set(self.forgotten)))


@dataclass
class NiceTD:
    nodes: list[NiceNode]
    root: int
    num_vertices: int
    width: int
    parent: list[int | None] = field(default_factory=list)
    postorder: list[int] = field(default_factory=list)
    subtree_mask: list[int] = field(default_factory=list)
    depth: list[int] = field(default_factory=list)

    @property
    def full_mask(self) -> int:
        mask = 0
        for v in range(1, self.num_vertices + 1):
            mask |= 1 << v
        return mask

    def finalize(self) -> None:
        """Recompute parent, postorder, depth and subtree vertex masks."""
        n = len(self.nodes)
        self.parent = [None] * n
        self.depth = [0] * n
        self.subtree_mask = [0] * n
        order: list[int] = []
        stack: list[tuple[int, bool]] = [(self.root, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            stack.append((node, True))
            for c in self.nodes[node].children:
                self.parent[c] = node
                self.depth[c] = self.depth[node] + 1
                stack.append((c, False))
        self.postorder = order
        for t in order:
            nd = self.nodes[t]
            mask = 0
            for v in nd.bag:
                mask |= 1 << v
            for v in nd.forgotten:
                mask |= 1 << v
            for c in nd.children:
                mask |= self.subtree_mask[c]
            self.subtree_mask[t] = mask


def _contract_subset_bags(
    bags: dict[int, set[int]], adj: dict[int, set[int]]
) -> dict[int, int]:
    """Merge every bag contained in a neighbor into that neighbor.

    Keeps the overall node count at most the vertex count, which the
    size bound of the nice form relies on.  Returns a map from removed
    node to its surviving representative.
    """
    rep: dict[int, int] = {}

    def find(x: int) -> int:
        while x in rep:
            x = rep[x]
        return x

    work = deque((a, b) for a in adj for b in adj[a] if a < b)
    while work:
        a, b = work.popleft()
        a, b = find(a), find(b)
        if a == b or b not in adj.get(a, ()):
            continue
        if bags[a] <= bags[b]:
            small, big = a, b
        elif bags[b] <= bags[a]:
            small, big = b, a
        else:
            continue
        for nb in adj[small] - {big}:
            adj[nb].discard(small)
            adj[nb].add(big)
            adj[big].add(nb)
            work.append((big, nb))
        adj[big].discard(small)
        del adj[small]
        del bags[small]
        rep[small] = big
    return rep


def make_nice(
    td: TreeDecomposition,
    root: int | None = None,
    with_edge_nodes: bool = False,
    edges: list[tuple[int, int]] | None = None,
) -> NiceTD:
    """Convert ``td`` into a nice decomposition rooted at original bag
    ``root`` (smallest bag id when omitted).

    With ``with_edge_nodes`` an introduce-edge node is spliced in for
    every entry of ``edges`` just below the topmost nice node whose bag
    contains both endpoints (its parent is necessarily the forget of one
    endpoint).  Multiple edges landing at the same spot stack in sorted
    order.
    """
    for b in td.bags.values():
        if len(b) > MAX_BAG:
            raise FormatError(f"bag exceeds the hard cap of {MAX_BAG} vertices")
    bags = {i: set(b) for i, b in td.bags.items()}
    adj = td.neighbors()
    rep = _contract_subset_bags(bags, adj)

    def find(x: int) -> int:
        while x in rep:
            x = rep[x]
        return x

    if root is None:
        root = min(td.bags)
    if root not in td.bags:
        raise FormatError(f"root bag {root} does not exist")
    root = find(root)

    # orient the contracted tree
    children: dict[int, list[int]] = {i: [] for i in bags}
    parent: dict[int, int | None] = {root: None}
    order = [root]
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y in sorted(adj[x]):
            if y not in parent:
                parent[y] = x
                children[x].append(y)
                order.append(y)
                queue.append(y)

    nodes: list[NiceNode] = []

    def new_node(kind: str, bag: set[int], kids: list[int], **kw) -> int:
        nid = len(nodes)
        nodes.append(NiceNode(nid, kind, tuple(sorted(bag)), list(kids), **kw))
        return nid

    top: dict[int, int] = {}
    for x in reversed(order):  # postorder of the contracted tree
        target = bags[x]
        tops: list[int] = []
        for c in children[x]:
            t = top[c]
            cur = set(bags[c])
            for v in sorted(cur - target):
                cur.discard(v)
                t = new_node(FORGET, cur, [t], vertex=v)
            for v in sorted(target - set(bags[c])):
                cur.add(v)
                t = new_node(INTRODUCE, cur, [t], vertex=v)
            tops.append(t)
        if not tops:
            t = new_node(LEAF, set(), [])
            cur: set[int] = set()
            for v in sorted(target):
                cur.add(v)
                t = new_node(INTRODUCE, cur, [t], vertex=v)
        else:
            t = tops[0]
            for other in tops[1:]:
                t = new_node(JOIN, target, [t, other])
        top[x] = t

    t = top[root]
    cur = set(bags[root])
    for v in sorted(cur):
        cur = cur - {v}
        t = new_node(FORGET, cur, [t], vertex=v)
    ntd = NiceTD(
        nodes=nodes,
        root=t,
        num_vertices=td.num_vertices,
        width=max((len(nd.bag) for nd in nodes), default=1) - 1,
    )
    ntd.finalize()

    if with_edge_nodes:
        if edges is None:
            raise ValueError("with_edge_nodes requires the graph edge list")
        _insert_edge_nodes(ntd, edges)
        ntd.finalize()
    return ntd


def _insert_edge_nodes(ntd: NiceTD, edges: list[tuple[int, int]]) -> None:
    stack_top: dict[int, int] = {}
    indexed = sorted(
        (min(u, v), max(u, v), idx) for idx, (u, v) in enumerate(edges)
    )
    for u, v, idx in indexed:
        best = None
        for nd in ntd.nodes:
            if nd.kind == INTRODUCE_EDGE:
                continue
            if u in nd.bag and v in nd.bag:
                if best is None or ntd.depth[nd.id] < ntd.depth[best]:
                    best = nd.id
        if best is None:
            raise FormatError(f"edge {{{u},{v}}} not contained in any bag")
        child = stack_top.get(best, best)  # stack further edges above earlier ones
        par = ntd.parent[child]
        assert par is not None and ntd.nodes[par].kind == FORGET, (
            "topmost bag holding an edge must hang below a forget node"
        )
        eid = len(ntd.nodes)
        ntd.nodes.append(
            NiceNode(eid, INTRODUCE_EDGE, ntd.nodes[best].bag, [child], edge=(u, v, idx))
        )
        kids = ntd.nodes[par].children
        kids[kids.index(child)] = eid
        ntd.parent[child] = eid
        ntd.parent.append(par)
        ntd.depth.append(0)
        ntd.subtree_mask.append(0)
        stack_top[best] = eid


def fuse_nodes(ntd: NiceTD) -> NiceTD:
    """Collapse join nodes followed by forget chains into join-forget
    nodes, then absorb each side's introduce chain (introduce-join-forget).

    Only defined for decompositions without introduce-edge nodes.
    """
    if any(nd.kind == INTRODUCE_EDGE for nd in ntd.nodes):
        raise ValueError("fusion is defined for decompositions without edge nodes")
    nodes = {nd.id: NiceNode(nd.id, nd.kind, nd.bag, list(nd.children)) for nd in ntd.nodes}
    for nd in ntd.nodes:
        nodes[nd.id].vertex = nd.vertex
    parent = {nd.id: ntd.parent[nd.id] for nd in ntd.nodes}
    root = ntd.root
    dead: set[int] = set()

    for jid in [nd.id for nd in ntd.nodes if nd.kind == JOIN]:
        forgot: list[int] = []
        topmost = jid
        p = parent[jid]
        while p is not None and nodes[p].kind == FORGET:
            forgot.append(nodes[p].vertex)
            topmost = p
            p = parent[p]
        if not forgot:
            continue
        jf = nodes[jid]
        jf.kind = JOIN_FORGET
        jf.bag = nodes[topmost].bag
        jf.forgotten = tuple(sorted(forgot))
        walk = parent[jid]
        while walk != p:
            dead.add(walk)
            nxt = parent[walk]
            walk = nxt
        parent[jid] = p
        if p is None:
            root = jid
        else:
            kids = nodes[p].children
            kids[kids.index(topmost)] = jid

    for nd in list(nodes.values()):
        if nd.id in dead or nd.kind != JOIN_FORGET:
            continue
        absorbed = []
        for side in (0, 1):
            intro: list[int] = []
            c = nd.children[side]
            while nodes[c].kind == INTRODUCE:
                intro.append(nodes[c].vertex)
                dead.add(c)
                c = nodes[c].children[0]
            nd.children[side] = c
            parent[c] = nd.id
            absorbed.append(tuple(sorted(intro)))
        if absorbed[0] or absorbed[1]:
            nd.kind = INTRO_JOIN_FORGET
            nd.skipped = (absorbed[0], absorbed[1])

    # renumber live nodes reachable from the root
    live: list[int] = []
    stack = [root]
    while stack:
        x = stack.pop()
        live.append(x)
        stack.extend(nodes[x].children)
    live.sort()
    renum = {old: i for i, old in enumerate(live)}
    out_nodes = []
    for old in live:
        nd = nodes[old]
        out_nodes.append(
            NiceNode(
                renum[old],
                nd.kind,
                nd.bag,
                [renum[c] for c in nd.children],
                vertex=nd.vertex,
                edge=nd.edge,
                forgotten=nd.forgotten,
                skipped=nd.skipped,
            )
        )
    fused = NiceTD(out_nodes, renum[root], ntd.num_vertices, ntd.width)
    fused.finalize()
    return fused


def check_nice(ntd: NiceTD) -> None:
    """Structural validator used by the test-suite."""
    assert ntd.nodes[ntd.root].bag == (), "root bag must be empty"
    for nd in ntd.nodes:
        kids = [ntd.nodes[c] for c in nd.children]
        if nd.kind == LEAF:
            assert not kids and nd.bag == ()
        elif nd.kind == INTRODUCE:
            assert len(kids) == 1 and nd.vertex is not None
            assert set(nd.bag) == set(kids[0].bag) | {nd.vertex}
            assert nd.vertex not in kids[0].bag
        elif nd.kind == FORGET:
            assert len(kids) == 1 and nd.vertex is not None
            assert set(nd.bag) == set(kids[0].bag) - {nd.vertex}
            assert nd.vertex in kids[0].bag
        elif nd.kind == JOIN:
            assert len(kids) == 2
            assert kids[0].bag == nd.bag and kids[1].bag == nd.bag
        elif nd.kind == INTRODUCE_EDGE:
            assert len(kids) == 1 and nd.edge is not None
            assert kids[0].bag == nd.bag
            assert nd.edge[0] in nd.bag and nd.edge[1] in nd.bag
        elif nd.kind == JOIN_FORGET:
            assert len(kids) == 2 and nd.forgotten
            jb = nd.join_bag()
            assert kids[0].bag == jb and kids[1].bag == jb
        elif nd.kind == INTRO_JOIN_FORGET:
            assert len(kids) == 2
            jb = set(nd.join_bag())
            for side in (0, 1):
                intro = set(nd.skipped[side])
                assert set(kids[side].bag) == jb - intro
        else:
            raise AssertionError(f"unknown node kind {nd.kind}")
        if nd.id != ntd.root:
            assert ntd.parent[nd.id] is not None


def count_plain_nodes(ntd: NiceTD) -> int:
    return sum(1 for nd in ntd.nodes if nd.kind != INTRODUCE_EDGE)


def count_edge_nodes(ntd: NiceTD) -> int:
    return sum(1 for nd in ntd.nodes if nd.kind == INTRODUCE_EDGE)


def join_bag_edge_conflicts(ntd: NiceTD) -> list[tuple[int, int, int]]:
    """Return (join_node, u, v) triples where an edge introduced in the
    join's subtree has both endpoints inside the join bag.  Always empty
    for decompositions produced by ``make_nice`` (checked by tests)."""
    conflicts = []
    for nd in ntd.nodes:
        if nd.kind not in JOIN_FAMILY:
            continue
        jb = set(nd.join_bag())
        stack = list(nd.children)
        while stack:
            x = stack.pop()
            xn = ntd.nodes[x]
            if xn.kind == INTRODUCE_EDGE and xn.edge[0] in jb and xn.edge[1] in jb:
                conflicts.append((nd.id, xn.edge[0], xn.edge[1]))
            stack.extend(xn.children)
    return conflicts
