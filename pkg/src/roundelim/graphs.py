"""Ported graphs: generation, diagnostics, balls and ball-to-tree extension.

Ports are 0-indexed. ``ports[v][i]`` is ``(u, j)`` when port ``i`` of ``v``
leads to ``u`` and arrives there on port ``j``; it is ``None`` when the edge
behind that port is not part of this (sub)graph, which happens on the
boundary of a ball.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np

from . import _kernels

Port = Optional[tuple[int, int]]


class GraphError(ValueError):
    pass


class ParityError(GraphError):
    pass


class ExhaustedAttempts(GraphError):
    pass


class NotAcyclic(GraphError):
    pass


class CannotReach(GraphError):
    pass


@dataclass(frozen=True, eq=False)
class PortedGraph:
    ports: tuple[tuple[Port, ...], ...]
    delta: int
    center: Optional[int] = None
    origin: Optional[tuple[int, ...]] = None
    names: Optional[tuple[str, ...]] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.ports)

    def degree(self, v: int) -> int:
        return sum(p is not None for p in self.ports[v])

    def neighbors(self, v: int) -> list[int]:
        return [p[0] for p in self.ports[v] if p is not None]

    def edges(self) -> Iterator[tuple[int, int, int, int]]:
        """Each edge once as ``(v, i, u, j)`` with ``(v, i) < (u, j)``."""
        for v, row in enumerate(self.ports):
            for i, p in enumerate(row):
                if p is not None and (v, i) < p:
                    yield v, i, p[0], p[1]

    @property
    def num_edges(self) -> int:
        return sum(1 for _ in self.edges())

    def is_regular(self) -> bool:
        return all(len(row) == self.delta and None not in row for row in self.ports)

    def signature(self) -> tuple:
        return (self.ports, self.delta, self.center)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PortedGraph):
            return NotImplemented
        return self.signature() == other.signature()

    def __hash__(self) -> int:
        return hash(self.signature())

    @cached_property
    def ball_cache(self) -> dict:
        return {}

    @cached_property
    def nbr_array(self) -> np.ndarray:
        width = max([self.delta, *(len(r) for r in self.ports)]) if self.ports else self.delta
        out = np.full((self.n, width), -1, dtype=np.int64)
        for v, row in enumerate(self.ports):
            for i, p in enumerate(row):
                if p is not None:
                    out[v, i] = p[0]
        return out

    @cached_property
    def rev_array(self) -> np.ndarray:
        out = np.full(self.nbr_array.shape, -1, dtype=np.int64)
        for v, row in enumerate(self.ports):
            for i, p in enumerate(row):
                if p is not None:
                    out[v, i] = p[1]
        return out

    def distances_from(self, v: int, limit: Optional[int] = None) -> dict[int, int]:
        dist = {v: 0}
        queue = deque([v])
        while queue:
            x = queue.popleft()
            if limit is not None and dist[x] >= limit:
                continue
            for p in self.ports[x]:
                if p is not None and p[0] not in dist:
                    dist[p[0]] = dist[x] + 1
                    queue.append(p[0])
        return dist

    def check(self) -> None:
        """Raise ``GraphError`` unless simple, port-consistent and degree-capped."""
        for v, row in enumerate(self.ports):
            if len(row) > self.delta:
                raise GraphError(f"node {v} has {len(row)} ports > delta={self.delta}")
            seen = set()
            for i, p in enumerate(row):
                if p is None:
                    continue
                u, j = p
                if u == v:
                    raise GraphError(f"self-loop at node {v}")
                if u in seen:
                    raise GraphError(f"parallel edges between {v} and {u}")
                seen.add(u)
                if not (0 <= u < self.n and 0 <= j < len(self.ports[u])):
                    raise GraphError(f"port {i} of node {v} points outside the graph")
                if self.ports[u][j] != (v, i):
                    raise GraphError(f"port {i} of node {v} is not mirrored by port {j} of node {u}")


def from_adjacency(adj: Sequence[Sequence[int]], delta: Optional[int] = None) -> PortedGraph:
    """Build a ported graph whose port order follows the neighbor lists."""
    index = [{u: i for i, u in enumerate(row)} for row in adj]
    ports = tuple(tuple((u, index[u][v]) for u in row) for v, row in enumerate(adj))
    g = PortedGraph(ports, delta if delta is not None else max((len(r) for r in adj), default=0))
    g.check()
    return g


def from_edges(n: int, edges: Sequence[tuple[int, int]], delta: Optional[int] = None) -> PortedGraph:
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    return from_adjacency(adj, delta)


def complete_graph(n: int) -> PortedGraph:
    return from_adjacency([[u for u in range(n) if u != v] for v in range(n)])


def cycle_graph(n: int) -> PortedGraph:
    # port 0 goes forward, port 1 backward, everywhere
    return from_adjacency([[(v + 1) % n, (v - 1) % n] for v in range(n)])


def path_graph(n: int, delta: Optional[int] = None) -> PortedGraph:
    return from_edges(n, [(v, v + 1) for v in range(n - 1)], delta)


def petersen_graph() -> PortedGraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return from_edges(10, outer + spokes + inner)


def heawood_graph() -> PortedGraph:
    # LCF notation [5, -5]^7
    edges = [(i, (i + 1) % 14) for i in range(14)]
    for i in range(0, 14, 2):
        edges.append((i, (i + 5) % 14))
    return from_edges(14, edges)


def cube_graph() -> PortedGraph:
    return from_adjacency([[v ^ 1, v ^ 2, v ^ 4] for v in range(8)])


def complete_bipartite(a: int, b: int) -> PortedGraph:
    return from_edges(a + b, [(i, a + j) for i in range(a) for j in range(b)])


NAMED = {
    "k4": lambda: complete_graph(4),
    "petersen": petersen_graph,
    "heawood": heawood_graph,
    "cube": cube_graph,
    "c6": lambda: cycle_graph(6),
    "k44": lambda: complete_bipartite(4, 4),
}


def named_graph(name: str) -> PortedGraph:
    try:
        return NAMED[name]()
    except KeyError:
        raise GraphError(f"unknown graph {name!r}; known: {sorted(NAMED)}") from None


# ---------------------------------------------------------------------------
# random regular graphs


def generate_regular_graph(n: int, delta: int, seed: int, max_attempts: int = 1000) -> PortedGraph:
    """Sample a simple ``delta``-regular graph with uniformly random ports.

    Stubs are paired as in the configuration model; pairs that would create a
    loop or a repeated edge go back into the pool and are re-shuffled. An
    attempt fails when the leftover stubs admit no valid pair.
    """
    if (n * delta) % 2:
        raise ParityError(f"n*delta must be even, got n={n}, delta={delta}")
    if not 2 <= delta <= n - 1:
        raise GraphError(f"need 2 <= delta <= n-1, got n={n}, delta={delta}")
    if max_attempts < 1:
        raise GraphError("max_attempts must be >= 1")
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        edges = _try_pairing(n, delta, rng)
        if edges is not None:
            break
    else:
        raise ExhaustedAttempts(f"no simple graph after {max_attempts} attempts")

    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in sorted(edges):
        adj[u].append(v)
        adj[v].append(u)
    for v in range(n):
        adj[v] = [adj[v][k] for k in rng.permutation(delta)]
    return from_adjacency(adj, delta)


def _try_pairing(n: int, delta: int, rng: np.random.Generator) -> Optional[set]:
    edges: set[tuple[int, int]] = set()
    stubs = np.repeat(np.arange(n), delta)
    while stubs.size:
        rng.shuffle(stubs)
        left = []
        for a, b in zip(stubs[0::2].tolist(), stubs[1::2].tolist()):
            e = (a, b) if a < b else (b, a)
            if a != b and e not in edges:
                edges.add(e)
            else:
                left.extend((a, b))
        if len(left) == stubs.size and not _has_valid_pair(left, edges):
            return None
        stubs = np.array(left, dtype=np.int64)
    return edges


def _has_valid_pair(stubs: list[int], edges: set) -> bool:
    nodes = sorted(set(stubs))
    for x in range(len(nodes)):
        for y in range(x + 1, len(nodes)):
            if (nodes[x], nodes[y]) not in edges:
                return True
    return False


# ---------------------------------------------------------------------------
# diagnostics


def compute_girth(g: PortedGraph) -> float:
    """Exact shortest-cycle length, ``math.inf`` for forests."""
    length, *_ = _kernels.girth(g.nbr_array)
    return math.inf if length < 0 else length


def shortest_cycle(g: PortedGraph) -> Optional[list[int]]:
    """A cycle of length ``compute_girth(g)`` as a node list, or None."""
    length, root, u, w = _kernels.girth(g.nbr_array)
    if length < 0:
        return None
    parent = {root: None}
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y in g.neighbors(x):
            if y not in parent:
                parent[y] = x
                queue.append(y)

    def path(x):
        out = []
        while x is not None:
            out.append(x)
            x = parent[x]
        return out[::-1]

    pu, pw = path(u), path(w)
    k = 0
    while k < min(len(pu), len(pw)) and pu[k] == pw[k]:
        k += 1
    cycle = pu[k - 1 :] + pw[k:][::-1]
    if len(cycle) != length:
        # the BFS trees of the two kernels can differ; fall back to a search
        return _cycle_through(g, length)
    return cycle


def _cycle_through(g: PortedGraph, length: int) -> list[int]:
    for r in range(g.n):
        stack = [(r, [r])]
        while stack:
            x, walk = stack.pop()
            for y in g.neighbors(x):
                if y == r and len(walk) == length:
                    return walk
                if y not in walk and len(walk) < length:
                    stack.append((y, walk + [y]))
    raise AssertionError("girth reported but no cycle found")


def is_cycle(g: PortedGraph, cycle: Sequence[int]) -> bool:
    if len(cycle) < 3 or len(set(cycle)) != len(cycle):
        return False
    return all(cycle[(k + 1) % len(cycle)] in g.neighbors(cycle[k]) for k in range(len(cycle)))


@dataclass
class IndependenceResult:
    lower: int
    exact: Optional[int]
    witness: list[int]


def greedy_independent_set(g: PortedGraph) -> list[int]:
    alive = set(range(g.n))
    nbrs = [set(g.neighbors(v)) for v in range(g.n)]
    chosen = []
    while alive:
        v = min(alive, key=lambda x: (len(nbrs[x] & alive), x))
        chosen.append(v)
        alive -= nbrs[v] | {v}
    return sorted(chosen)


def max_independent_set(g: PortedGraph) -> list[int]:
    """Exact maximum independent set by branch and bound over bitmasks."""
    masks = [0] * g.n
    for v in range(g.n):
        for u in g.neighbors(v):
            masks[v] |= 1 << u
    best = greedy_independent_set(g)
    best_bits = sum(1 << v for v in best)
    best_size = len(best)

    def solve(avail: int, chosen: int, size: int) -> None:
        nonlocal best_bits, best_size
        # forced picks: nodes of degree <= 1 in the remaining graph
        while True:
            pick = -1
            bits = avail
            while bits:
                v = (bits & -bits).bit_length() - 1
                bits &= bits - 1
                if (masks[v] & avail).bit_count() <= 1:
                    pick = v
                    break
            if pick < 0:
                break
            chosen |= 1 << pick
            size += 1
            avail &= ~(masks[pick] | (1 << pick))
        remaining = avail.bit_count()
        if size + _cover_bound(avail, masks) <= best_size:
            return
        if remaining == 0:
            best_bits, best_size = chosen, size
            return
        # branch on the highest-degree node
        v, vdeg = -1, -1
        bits = avail
        while bits:
            x = (bits & -bits).bit_length() - 1
            bits &= bits - 1
            d = (masks[x] & avail).bit_count()
            if d > vdeg:
                v, vdeg = x, d
        solve(avail & ~(masks[v] | (1 << v)), chosen | (1 << v), size + 1)
        solve(avail & ~(1 << v), chosen, size)

    solve((1 << g.n) - 1, 0, 0)
    return [v for v in range(g.n) if best_bits >> v & 1]


def _cover_bound(avail: int, masks: list[int]) -> int:
    # greedy clique cover of the remaining nodes: an independent set takes
    # at most one node per clique
    bound = 0
    rest = avail
    while rest:
        v = (rest & -rest).bit_length() - 1
        clique = 1 << v
        cand = masks[v] & rest
        while cand:
            u = (cand & -cand).bit_length() - 1
            clique |= 1 << u
            cand &= masks[u]
        rest &= ~clique
        bound += 1
    return bound


def independence_number(g: PortedGraph, exact_threshold: int = 40) -> IndependenceResult:
    greedy = greedy_independent_set(g)
    if g.n <= exact_threshold:
        exact = max_independent_set(g)
        return IndependenceResult(len(greedy), len(exact), exact)
    return IndependenceResult(len(greedy), None, greedy)


@dataclass
class GraphDiagnostics:
    girth: float
    independence_lower: int
    independence_exact: Optional[int]
    girth_floor: float
    independence_ceiling: float

    def as_dict(self) -> dict:
        return {
            "girth": None if math.isinf(self.girth) else int(self.girth),
            "independence_lower": self.independence_lower,
            "independence_exact": self.independence_exact,
            "girth_floor": self.girth_floor,
            "independence_ceiling": self.independence_ceiling,
        }


def diagnose(g: PortedGraph, rho: float = 2.0, epsilon: float = 0.25, exact_threshold: int = 40) -> GraphDiagnostics:
    ind = independence_number(g, exact_threshold)
    delta = g.delta
    floor = epsilon * math.log(g.n) / math.log(delta) if delta > 1 else math.inf
    ceiling = rho * g.n * math.log(delta) / delta if delta > 0 else math.inf
    return GraphDiagnostics(compute_girth(g), ind.lower, ind.exact, floor, ceiling)


# ---------------------------------------------------------------------------
# balls and trees


def extract_ball(g: PortedGraph, v: int, r: int) -> PortedGraph:
    """Radius-``r`` ball around ``v`` under the view edge rule.

    Nodes are relabeled in BFS order following port numbers, so the center is
    node 0 and two port-isomorphic balls come out with identical ``ports``.
    An edge survives iff one endpoint is within distance ``r - 1``.
    """
    if r < 0:
        raise ValueError("radius must be >= 0")
    cached = g.ball_cache.get((v, r))
    if cached is not None:
        return cached
    dist = {v: 0}
    order = [v]
    head = 0
    while head < len(order):
        x = order[head]
        head += 1
        if dist[x] >= r:
            continue
        for p in g.ports[x]:
            if p is not None and p[0] not in dist:
                dist[p[0]] = dist[x] + 1
                order.append(p[0])
    idx = {h: k for k, h in enumerate(order)}
    ports = []
    for h in order:
        row = []
        for p in g.ports[h]:
            if p is not None and p[0] in idx and min(dist[h], dist[p[0]]) <= r - 1:
                row.append((idx[p[0]], p[1]))
            else:
                row.append(None)
        ports.append(tuple(row))
    origin = tuple(h if g.origin is None else g.origin[h] for h in order)
    ball = PortedGraph(tuple(ports), g.delta, center=0, origin=origin)
    g.ball_cache[(v, r)] = ball
    return ball


def canonical_ball(ball: PortedGraph) -> tuple[tuple[Port, ...], ...]:
    """Port tables relabeled in port-order BFS from the center.

    Two balls are center- and port-preserving isomorphic iff their canonical
    tables are equal.
    """
    return _canonical_order(ball)[1]


def _canonical_order(ball: PortedGraph) -> tuple[list[int], tuple]:
    c = 0 if ball.center is None else ball.center
    order = [c]
    seen = {c}
    head = 0
    while head < len(order):
        x = order[head]
        head += 1
        for p in ball.ports[x]:
            if p is not None and p[0] not in seen:
                seen.add(p[0])
                order.append(p[0])
    idx = {h: k for k, h in enumerate(order)}
    table = tuple(
        tuple(None if p is None else (idx[p[0]], p[1]) for p in ball.ports[h]) for h in order
    )
    return order, table


def balls_isomorphic(a: PortedGraph, b: PortedGraph) -> bool:
    return a.n == b.n and canonical_ball(a) == canonical_ball(b)


def is_tree(g: PortedGraph) -> bool:
    if g.n == 0:
        return False
    return g.num_edges == g.n - 1 and len(g.distances_from(0)) == g.n


def extend_ball_to_tree(ball: PortedGraph, n_target: int, delta: int) -> PortedGraph:
    """Grow an acyclic ball into a tree on exactly ``n_target`` nodes.

    Padding only hangs off open ports of the ball (ports marked ``None``) and
    off earlier padding nodes, so the ball around the center is unchanged.
    Padding nodes use fresh ports 0, 1, ... and never exceed ``delta`` ports.
    """
    if not is_tree(ball):
        raise NotAcyclic("ball contains a cycle or is disconnected")
    if n_target < ball.n:
        raise CannotReach(f"n_target={n_target} is below the ball size {ball.n}")
    rows = [list(r) for r in ball.ports]
    slots: deque = deque((v, i) for v, row in enumerate(rows) for i, p in enumerate(row) if p is None)
    while len(rows) < n_target:
        if not slots:
            raise CannotReach("no open port left to attach padding")
        v, i = slots.popleft()
        if i is None:
            i = len(rows[v])
            rows[v].append(None)
        p = len(rows)
        rows[v][i] = (p, 0)
        rows.append([(v, i)])
        slots.extend((p, None) for _ in range(delta - 1))
    tree = PortedGraph(tuple(tuple(r) for r in rows), max(delta, ball.delta), center=ball.center)
    tree.check()
    return tree


# ---------------------------------------------------------------------------
# file format: "n delta", then "v: u0/p0 u1/p1 ..." with "-" for open ports


def dumps_graph(g: PortedGraph) -> str:
    lines = [f"{g.n} {g.delta}"]
    for v, row in enumerate(g.ports):
        toks = ["-" if p is None else f"{p[0]}/{p[1]}" for p in row]
        lines.append(f"{v}: {' '.join(toks)}".rstrip())
    return "\n".join(lines) + "\n"


def loads_graph(text: str) -> PortedGraph:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    n, delta = (int(t) for t in lines[0].split())
    if len(lines) - 1 != n:
        raise GraphError(f"header says {n} nodes, found {len(lines) - 1} rows")
    ports = []
    for k, line in enumerate(lines[1:]):
        head, _, rest = line.partition(":")
        if int(head) != k:
            raise GraphError(f"row {k} is labeled {head.strip()}")
        row = []
        for tok in rest.split():
            if tok == "-":
                row.append(None)
            else:
                u, j = tok.split("/")
                row.append((int(u), int(j)))
        ports.append(tuple(row))
    g = PortedGraph(tuple(ports), delta)
    g.check()
    return g


def write_graph(g: PortedGraph, path) -> None:
    Path(path).write_text(dumps_graph(g))


def read_graph(path) -> PortedGraph:
    return loads_graph(Path(path).read_text())


def load_fixture(name: str) -> PortedGraph:
    """A graph shipped in the package data directory (``petersen``, ``heawood``)."""
    from importlib.resources import files

    res = files("roundelim") / "data" / f"{name}.txt"
    if not res.is_file():
        raise GraphError(f"no shipped fixture {name!r}")
    return loads_graph(res.read_text())
