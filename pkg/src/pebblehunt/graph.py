"""Port-labeled anonymous graphs, instance generators and the text format.

Node ids are internal bookkeeping for the oracle and the harness. Agents
never see them; see :mod:`pebblehunt.agent`.
"""
from __future__ import annotations

import random
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

FAMILIES = ("tree", "bipartite", "general", "complete-tree")


class GraphError(ValueError):
    """Structural or parameter problem with a graph or instance."""


class GraphFormatError(GraphError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class PortLabeledGraph:
    """Undirected simple graph with local port numbers.

    ``adj[u][p] == (v, q)`` means port ``p`` at ``u`` leads to ``v`` and the
    edge enters ``v`` through port ``q``.
    """

    adj: tuple[tuple[tuple[int, int], ...], ...]

    @property
    def n(self) -> int:
        return len(self.adj)

    def degree(self, u: int) -> int:
        return len(self.adj[u])

    @property
    def max_degree(self) -> int:
        return max((len(ports) for ports in self.adj), default=0)

    def neighbor(self, u: int, p: int) -> tuple[int, int]:
        return self.adj[u][p]

    def port_to(self, u: int, v: int) -> int:
        for p, (w, _) in enumerate(self.adj[u]):
            if w == v:
                return p
        raise GraphError(f"{u} and {v} are not adjacent")

    def neighbors(self, u: int) -> list[int]:
        return [v for v, _ in self.adj[u]]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> PortLabeledGraph:
        """Build a graph, numbering ports at each node in edge insertion order."""
        lists: list[list[list[int]]] = [[] for _ in range(n)]
        for u, v in edges:
            pu, pv = len(lists[u]), len(lists[v])
            lists[u].append([v, pv])
            lists[v].append([u, pu])
        return cls(tuple(tuple((v, q) for v, q in ports) for ports in lists))

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v, _ in self.adj[u] if u < v]


@dataclass(frozen=True)
class InstanceSpec:
    graph: PortLabeledGraph
    s: int
    t: int
    D: int
    delta: int
    family: str
    seed: int = 0


@dataclass(frozen=True)
class PathP:
    """A shortest s-t path with the ports used on each hop."""

    nodes: tuple[int, ...]
    # out_ports[i] is the port at nodes[i] leading to nodes[i+1];
    # in_ports[i] is the port at nodes[i+1] the hop arrives through.
    out_ports: tuple[int, ...]
    in_ports: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.nodes) - 1

    def index(self, node: int) -> int:
        return self.nodes.index(node)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_graph(g: PortLabeledGraph) -> ValidationReport:
    report = ValidationReport()
    n = g.n
    if n == 0:
        report.violations.append("empty graph")
        return report
    for u in range(n):
        seen: set[int] = set()
        for p, (v, q) in enumerate(g.adj[u]):
            if not 0 <= v < n:
                report.violations.append(f"dangling neighbor {v} at ({u},{p})")
                continue
            if v == u:
                report.violations.append(f"self-loop at ({u},{p})")
            if v in seen:
                report.violations.append(f"multi-edge {u}-{v} at ({u},{p})")
            seen.add(v)
            if not 0 <= q < len(g.adj[v]) or g.adj[v][q] != (u, p):
                report.violations.append(f"symmetry violation at ({u},{p})")
    if report.ok and len(bfs_distances(g, 0)) != n:
        report.violations.append("graph is not connected")
    return report


def bfs_distances(g: PortLabeledGraph, src: int) -> dict[int, int]:
    dist = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v, _ in g.adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def two_coloring(g: PortLabeledGraph) -> list[int] | None:
    """Proper 2-coloring of a connected graph, or None if it has an odd cycle."""
    color = [-1] * g.n
    color[0] = 0
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v, _ in g.adj[u]:
            if color[v] < 0:
                color[v] = 1 - color[u]
                queue.append(v)
            elif color[v] == color[u]:
                return None
    return color


def is_bipartite(g: PortLabeledGraph) -> bool:
    return two_coloring(g) is not None


def shortest_path(g: PortLabeledGraph, s: int, t: int) -> PathP:
    """Shortest s-t path; ties go to the smallest outgoing port.

    Walks forward from ``s`` and at each node takes the smallest port whose
    neighbor is one step closer to ``t``.
    """
    to_t = bfs_distances(g, t)
    if s not in to_t:
        raise GraphError(f"{t} unreachable from {s}")
    nodes, outs, ins = [s], [], []
    u = s
    while u != t:
        for p, (v, q) in enumerate(g.adj[u]):
            if to_t.get(v) == to_t[u] - 1:
                nodes.append(v)
                outs.append(p)
                ins.append(q)
                u = v
                break
    return PathP(tuple(nodes), tuple(outs), tuple(ins))


def gen_complete_tree(delta: int, D: int) -> tuple[PortLabeledGraph, int]:
    """Complete tree of height D, root degree delta, internal degree delta.

    Port 0 of every non-root node leads to its parent; children follow in
    creation order. Returns ``(graph, root)`` with root id 0.
    """
    if delta < 3 or D < 1:
        raise GraphError(f"complete tree needs delta >= 3 and D >= 1, got {delta}, {D}")
    edges: list[tuple[int, int]] = []
    frontier = [0]
    n = 1
    for depth in range(D):
        nxt = []
        for u in frontier:
            for _ in range(delta if depth == 0 else delta - 1):
                edges.append((u, n))
                nxt.append(n)
                n += 1
        frontier = nxt
    # from_edges numbers a child's parent edge first, so port 0 is the parent.
    return PortLabeledGraph.from_edges(n, edges), 0


def complete_tree_leaves(g: PortLabeledGraph, root: int = 0) -> list[int]:
    """Leaves in lexicographic order of their root paths."""
    leaves = []

    def walk(u: int, parent: int | None) -> None:
        kids = [v for v, _ in g.adj[u] if v != parent]
        if not kids:
            leaves.append(u)
        for v in kids:
            walk(v, u)

    walk(root, None)
    return leaves


def _shuffle_ports(n: int, nbrs: Sequence[Sequence[int]], rng: random.Random) -> PortLabeledGraph:
    order = []
    for u in range(n):
        vs = list(nbrs[u])
        rng.shuffle(vs)
        order.append(vs)
    pos = [{v: p for p, v in enumerate(order[u])} for u in range(n)]
    return PortLabeledGraph(
        tuple(tuple((v, pos[v][u]) for v in order[u]) for u in range(n))
    )


def gen_instance(
    family: str,
    delta: int,
    D: int,
    seed: int = 0,
    *,
    extra_nodes: int | None = None,
    extra_edges: int | None = None,
    hubs: int = 0,
    max_tries: int = 20,
) -> InstanceSpec:
    """Random instance: a backbone path of length D decorated up to degree delta.

    ``hubs`` backbone nodes (excluding t) are padded with fresh neighbors up
    to degree ``delta``; the milestone regime needs such fat nodes.
    Deterministic in all arguments.
    """
    if family == "complete-tree":
        g, root = gen_complete_tree(delta, D)
        leaves = complete_tree_leaves(g, root)
        rng = random.Random(f"complete-tree:{delta}:{D}:{seed}")
        t = rng.choice(leaves)
        return InstanceSpec(g, root, t, D, g.max_degree, family, seed)
    if family not in FAMILIES:
        raise GraphError(f"unknown family {family!r}")
    if delta < 2 or D < 1:
        raise GraphError(f"need delta >= 2 and D >= 1, got {delta}, {D}")
    last = "no attempt"
    for attempt in range(max_tries):
        rng = random.Random(f"{family}:{delta}:{D}:{seed}:{attempt}")
        try:
            return _try_instance(family, delta, D, seed, rng, extra_nodes, extra_edges, hubs)
        except GraphError as exc:
            last = str(exc)
    raise GraphError(f"could not generate {family} instance after {max_tries} tries: {last}")


def _try_instance(family, delta, D, seed, rng, extra_nodes, extra_edges, hubs) -> InstanceSpec:
    n = D + 1
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for i in range(D):
        nbrs[i].add(i + 1)
        nbrs[i + 1].add(i)
    color = [i % 2 for i in range(n)]

    def add_node(parent: int) -> int:
        nbrs.append({parent})
        nbrs[parent].add(len(nbrs) - 1)
        color.append(1 - color[parent])
        return len(nbrs) - 1

    if hubs:
        if delta < 3:
            raise GraphError("hubs need delta >= 3")
        for u in sorted(rng.sample(range(D), min(hubs, D))):
            while len(nbrs[u]) < delta:
                add_node(u)

    if extra_nodes is None:
        extra_nodes = 0 if delta == 2 else rng.randint(D, 2 * D + 4) * (delta - 1) // 2
    open_nodes = [u for u in range(len(nbrs)) if len(nbrs[u]) < delta]
    for _ in range(extra_nodes):
        if not open_nodes:
            break
        parent = rng.choice(open_nodes)
        add_node(parent)
        if len(nbrs[parent]) >= delta:
            open_nodes.remove(parent)
        open_nodes.append(len(nbrs) - 1)

    if family != "tree":
        if extra_edges is None:
            extra_edges = len(nbrs) // 2
        dist_s = _dists(nbrs, 0)
        dist_t = _dists(nbrs, D)
        attempts = 0
        added = 0
        while added < extra_edges and attempts < 40 * (extra_edges + 1):
            attempts += 1
            a, b = rng.randrange(len(nbrs)), rng.randrange(len(nbrs))
            if a == b or b in nbrs[a] or len(nbrs[a]) >= delta or len(nbrs[b]) >= delta:
                continue
            if family == "bipartite" and color[a] == color[b]:
                continue
            if min(dist_s[a] + 1 + dist_t[b], dist_s[b] + 1 + dist_t[a]) < D:
                continue
            nbrs[a].add(b)
            nbrs[b].add(a)
            added += 1
            _relax(nbrs, dist_s, a, b)
            _relax(nbrs, dist_t, a, b)

    # relabel so node ids don't reveal the backbone
    n = len(nbrs)
    perm = list(range(n))
    rng.shuffle(perm)
    new_nbrs: list[list[int]] = [[] for _ in range(n)]
    for u in range(n):
        new_nbrs[perm[u]] = sorted(perm[v] for v in nbrs[u])
    g = _shuffle_ports(n, new_nbrs, rng)
    inst = InstanceSpec(g, perm[0], perm[D], D, g.max_degree, family, seed)
    check_instance(inst)
    return inst


def _relax(nbrs: Sequence[set[int]], dist: list[int], a: int, b: int) -> None:
    """Update BFS distances in place after adding the edge (a, b)."""
    queue: deque[int] = deque()
    for u, v in ((a, b), (b, a)):
        if dist[u] + 1 < dist[v]:
            dist[v] = dist[u] + 1
            queue.append(v)
    while queue:
        u = queue.popleft()
        for w in nbrs[u]:
            if dist[u] + 1 < dist[w]:
                dist[w] = dist[u] + 1
                queue.append(w)


def _dists(nbrs: Sequence[set[int]], src: int) -> list[int]:
    dist = [-1] * len(nbrs)
    dist[src] = 0
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v in nbrs[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def check_instance(inst: InstanceSpec) -> None:
    report = validate_graph(inst.graph)
    if not report.ok:
        raise GraphError("; ".join(report.violations))
    if inst.s == inst.t or inst.D < 1:
        raise GraphError("instance needs s != t")
    if bfs_distances(inst.graph, inst.s).get(inst.t) != inst.D:
        raise GraphError("declared D differs from dist(s, t)")
    if inst.graph.max_degree != inst.delta:
        raise GraphError("declared delta differs from max degree")
    if inst.family == "bipartite" and not is_bipartite(inst.graph):
        raise GraphError("bipartite instance has an odd cycle")
    if inst.family in ("tree", "complete-tree") and len(inst.graph.edges()) != inst.graph.n - 1:
        raise GraphError("tree instance has a cycle")


def make_instance(g: PortLabeledGraph, s: int, t: int, family: str = "general", seed: int = 0) -> InstanceSpec:
    """Wrap a hand-built graph as an instance, deriving D and delta."""
    dist = bfs_distances(g, s)
    if t not in dist:
        raise GraphError(f"{t} unreachable from {s}")
    inst = InstanceSpec(g, s, t, dist[t], g.max_degree, family, seed)
    check_instance(inst)
    return inst


# --- text format ------------------------------------------------------------

_INT = re.compile(r"^-?\d+$")


def write_graph(g: PortLabeledGraph, s: int | None = None, t: int | None = None) -> str:
    lines = [f"graph {g.n}"]
    for u in range(g.n):
        lines.append(f"node {u} {g.degree(u)}")
        for p, (v, q) in enumerate(g.adj[u]):
            lines.append(f"port {p} -> {v} {q}")
    if s is not None:
        lines.append(f"start {s}")
    if t is not None:
        lines.append(f"treasure {t}")
    return "\n".join(lines) + "\n"


def write_instance(inst: InstanceSpec) -> str:
    return write_graph(inst.graph, inst.s, inst.t)


def parse_graph_document(text: str) -> tuple[PortLabeledGraph, int | None, int | None]:
    """Parse the text format; returns ``(graph, start, treasure)``."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line.split()))
    if not rows:
        raise GraphFormatError("empty document")

    def ints(lineno: int, toks: list[str]) -> list[int]:
        for tok in toks:
            if not _INT.match(tok):
                raise GraphFormatError(f"expected integer, got {tok!r}", lineno)
        return [int(tok) for tok in toks]

    lineno, toks = rows[0]
    if toks[0] != "graph" or len(toks) != 2:
        raise GraphFormatError("expected 'graph <n>'", lineno)
    (n,) = ints(lineno, toks[1:])
    adj: list[list[tuple[int, int]]] = []
    start = treasure = None
    i = 1
    while i < len(rows):
        lineno, toks = rows[i]
        kind = toks[0]
        if kind == "node":
            if len(toks) != 3:
                raise GraphFormatError("expected 'node <u> <deg>'", lineno)
            u, deg = ints(lineno, toks[1:])
            if u != len(adj):
                raise GraphFormatError(f"expected node {len(adj)}, got {u}", lineno)
            ports = []
            for p in range(deg):
                i += 1
                if i >= len(rows):
                    raise GraphFormatError(f"node {u}: missing port {p}", lineno)
                lineno, toks = rows[i]
                if toks[0] != "port" or len(toks) != 5 or toks[2] != "->":
                    raise GraphFormatError("expected 'port <p> -> <v> <q>'", lineno)
                pp, v, q = ints(lineno, [toks[1], toks[3], toks[4]])
                if pp != p:
                    raise GraphFormatError(f"expected port {p}, got {pp}", lineno)
                ports.append((v, q))
            adj.append(ports)
        elif kind in ("start", "treasure"):
            if len(toks) != 2:
                raise GraphFormatError(f"expected '{kind} <node>'", lineno)
            (value,) = ints(lineno, toks[1:])
            if kind == "start":
                start = value
            else:
                treasure = value
        else:
            raise GraphFormatError(f"unknown directive {kind!r}", lineno)
        i += 1
    if len(adj) != n:
        raise GraphFormatError(f"declared {n} nodes, found {len(adj)}")
    g = PortLabeledGraph(tuple(tuple(ports) for ports in adj))
    report = validate_graph(g)
    if not report.ok:
        raise GraphError("invalid graph: " + "; ".join(report.violations))
    for name, value in (("start", start), ("treasure", treasure)):
        if value is not None and not 0 <= value < n:
            raise GraphError(f"{name} node {value} out of range")
    return g, start, treasure


def parse_graph(text: str) -> PortLabeledGraph:
    return parse_graph_document(text)[0]


def read_instance(text: str, family: str = "general") -> InstanceSpec:
    g, s, t = parse_graph_document(text)
    if s is None or t is None:
        raise GraphFormatError("instance documents need 'start' and 'treasure' lines")
    if family == "general" and is_bipartite(g):
        family = "bipartite" if len(g.edges()) != g.n - 1 else "tree"
    return make_instance(g, s, t, family)
