"""LOCAL-model substrate: node inputs, views, algorithm descriptors, execution.

A T-round algorithm is represented by the map it induces from radius-T views
to outputs on the center's ports. Private randomness is a finite bit string
per node so that expectations can be computed by enumeration.
"""

from __future__ import annotations

import functools
import hashlib
import math
import random
import zlib
from dataclasses import dataclass, replace
from itertools import product
from pathlib import Path
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

from . import _kernels
from .graphs import PortedGraph, _canonical_order, extract_ball


class RuleViolation(RuntimeError):
    pass


class BudgetTooLarge(RuntimeError):
    pass


@dataclass(frozen=True)
class NodeInputs:
    id: int
    port_perm: tuple[int, ...]  # port_perm[i] = local label of graph port i
    bits: int  # private bit string, R bits, bit k = (bits >> k) & 1


@dataclass(frozen=True)
class Inputs:
    nodes: tuple[NodeInputs, ...]
    shared: int
    R: int
    R_shared: int
    id_max: int

    def with_nodes(self, updates: dict[int, NodeInputs]) -> "Inputs":
        nodes = list(self.nodes)
        for v, inp in updates.items():
            nodes[v] = inp
        return replace(self, nodes=tuple(nodes))

    @property
    def id_bits(self) -> int:
        return max(0, math.ceil(math.log2(self.id_max))) if self.id_max > 1 else 0


def _stream(seed: int, word2: int, word3: int) -> np.random.Generator:
    # counter-based substream: the key is the seed, the high counter words
    # name the stream, so streams never overlap
    bitgen = np.random.Philox(key=seed & (2**64 - 1), counter=[0, 0, word2, word3])
    return np.random.Generator(bitgen)


def _draw_bits(rng: np.random.Generator, nbits: int) -> int:
    value = 0
    for k in range(0, nbits, 32):
        chunk = int(rng.integers(0, 2**32, dtype=np.uint64))
        value |= chunk << k
    return value & ((1 << nbits) - 1) if nbits else 0


def assign_inputs(
    g: PortedGraph,
    seed: int,
    c: int = 1,
    R: int = 64,
    R_shared: int = 0,
    port_mode: str = "random",
) -> Inputs:
    """Draw ids, port permutations and bits; node ``v`` uses its own substream."""
    if c < 1 or R < 0 or R_shared < 0:
        raise ValueError("need c >= 1, R >= 0, R_shared >= 0")
    if port_mode not in ("random", "fixed"):
        raise ValueError("port_mode must be 'random' or 'fixed'")
    id_max = g.n**c
    nodes = []
    for v in range(g.n):
        rng = _stream(seed, 0, v)
        ident = int(rng.integers(1, id_max + 1))
        slots = len(g.ports[v])
        perm = tuple(int(k) for k in rng.permutation(slots)) if port_mode == "random" else tuple(range(slots))
        nodes.append(NodeInputs(ident, perm, _draw_bits(rng, R)))
    shared = _draw_bits(_stream(seed, 1, 0), R_shared)
    return Inputs(tuple(nodes), shared, R, R_shared, id_max)


def _draw_bits_many(rng: np.random.Generator, count: int, nbits: int) -> list[int]:
    if nbits == 0:
        return [0] * count
    words = rng.integers(0, 2**32, size=(count, -(-nbits // 32)), dtype=np.uint64)
    mask = (1 << nbits) - 1
    return [sum(int(w) << (32 * k) for k, w in enumerate(row)) & mask for row in words]


def redraw(base: Inputs, seed: int) -> Inputs:
    """Fresh ids and bits (private and shared); port permutations kept.

    One substream per call, drawn in bulk: this is the Monte-Carlo hot path.
    """
    rng = _stream(seed, 2, 0)
    n = len(base.nodes)
    ids = rng.integers(1, base.id_max + 1, size=n)
    bits = _draw_bits_many(rng, n, base.R)
    nodes = tuple(NodeInputs(int(i), old.port_perm, b) for i, old, b in zip(ids, base.nodes, bits))
    shared = _draw_bits(rng, base.R_shared)
    return replace(base, nodes=nodes, shared=shared)


def enumeration_cost(base: Inputs, n_nodes: int, reads_ids: bool, with_shared: bool = False) -> int:
    per_node = base.R + (base.id_bits if reads_ids else 0)
    return n_nodes * per_node + (base.R_shared if with_shared else 0)


def enumerate_inputs(
    base: Inputs,
    nodes: Sequence[int],
    reads_ids: bool,
    with_shared: bool = False,
    cap: Optional[int] = None,
) -> Iterator[Inputs]:
    """All assignments of bits (and ids, when read) to ``nodes``; uniform weight."""
    cost = enumeration_cost(base, len(nodes), reads_ids, with_shared)
    if cap is not None and cost > cap:
        raise BudgetTooLarge(f"enumeration needs {cost} bits, cap is {cap}")
    bit_range = range(1 << base.R)
    id_range = range(1, base.id_max + 1) if reads_ids else None
    shared_range = range(1 << base.R_shared) if with_shared else (base.shared,)
    per_node = [
        [(i, bits) for i in (id_range or (base.nodes[v].id,)) for bits in bit_range] for v in nodes
    ]
    for shared in shared_range:
        for combo in product(*per_node):
            upd = {
                v: NodeInputs(ident, base.nodes[v].port_perm, bits) for v, (ident, bits) in zip(nodes, combo)
            }
            yield replace(base.with_nodes(upd), shared=shared)


# ---------------------------------------------------------------------------
# views


@dataclass(frozen=True, eq=False)
class View:
    ball: PortedGraph
    nodes: tuple[NodeInputs, ...]
    shared: int
    radius: int
    R: int = 64  # private bit budget per node

    @property
    def center(self) -> int:
        return 0 if self.ball.center is None else self.ball.center

    @property
    def center_inputs(self) -> NodeInputs:
        return self.nodes[self.center]

    @property
    def degree(self) -> int:
        return len(self.ball.ports[self.center])

    @property
    def host(self) -> Optional[int]:
        return None if self.ball.origin is None else self.ball.origin[self.center]

    def depth(self) -> dict[int, int]:
        return self.ball.distances_from(self.center)

    def rng(self, node: Optional[int] = None, salt: str = "") -> random.Random:
        """Deterministic generator driven only by a node's private bits."""
        x = self.center if node is None else node
        return random.Random((_salt_word(salt) << self.R) | self.nodes[x].bits)

    def canonical(self) -> tuple:
        order, table = _canonical_order(self.ball)
        inputs = tuple(self.nodes[h] for h in order)
        return (self.radius, table, inputs, self.shared)


@functools.lru_cache(maxsize=None)
def _salt_word(salt: str) -> int:
    return zlib.crc32(salt.encode()) + 1


def extract_view(g: PortedGraph, inputs: Inputs, v: int, T: int) -> View:
    ball = extract_ball(g, v, T)
    nodes = tuple(inputs.nodes[h] for h in ball.origin)
    return View(ball, nodes, inputs.shared, T, inputs.R)


def views_isomorphic(a: View, b: View) -> bool:
    return a.ball.n == b.ball.n and a.canonical() == b.canonical()


def local_to_graph_port(inp: NodeInputs, label: int) -> int:
    return inp.port_perm.index(label)


# ---------------------------------------------------------------------------
# algorithms and labelings

GRABBING = "grabbing"
MATCHING = "matching"
EDGE_COLORING = "edge_coloring"


@dataclass(frozen=True)
class AlgorithmDescriptor:
    """A ``radius``-round algorithm given as a pure rule on views.

    ``rule`` returns the b grabbed ports (grabbing), the claimed port set
    (matching) or one color per port (edge_coloring). ``reads_ids`` tells
    exact enumeration whether ids have to be marginalized as well.
    """

    radius: int
    kind: str
    param: int  # b for grabbing/matching, palette size for edge coloring
    rule: Callable[[View], object]
    name: str = ""
    reads_ids: bool = False

    @property
    def b(self) -> int:
        if self.kind == EDGE_COLORING:
            raise AttributeError("edge coloring has a palette, not b")
        return self.param


@dataclass(eq=False)
class HalfEdgeLabeling:
    """One label per half-edge: 1 = M, 0 = U (or a color); -1 on open ports."""

    labels: np.ndarray
    kind: str = GRABBING

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, HalfEdgeLabeling)
            and self.kind == other.kind
            and np.array_equal(self.labels, other.labels)
        )

    def grabbed(self, v: int) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.labels[v] == 1)]

    def half_edges_m(self) -> np.ndarray:
        return (self.labels == 1).sum(axis=1)

    def edge_classes(self, g: PortedGraph) -> dict[str, int]:
        mm, mu, uu = _kernels.edge_classes(self.labels, g.nbr_array, g.rev_array)
        return {"MM": mm, "MU": mu, "UU": uu}

    def matched_edges(self, g: PortedGraph) -> list[tuple[int, int, int, int]]:
        return [e for e in g.edges() if self.labels[e[0], e[1]] == 1 and self.labels[e[2], e[3]] == 1]

    def dumps(self) -> str:
        lines = []
        for v, row in enumerate(self.labels):
            toks = []
            for lab in row:
                if lab < 0:
                    toks.append("-")
                elif self.kind == EDGE_COLORING:
                    toks.append(str(int(lab)))
                else:
                    toks.append("M" if lab == 1 else "U")
            lines.append(f"{v}: {' '.join(toks)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str, kind: str = GRABBING) -> "HalfEdgeLabeling":
        rows = []
        for line in text.splitlines():
            if not line.strip():
                continue
            _, _, rest = line.partition(":")
            row = []
            for tok in rest.split():
                if tok == "-":
                    row.append(-1)
                elif kind == EDGE_COLORING:
                    row.append(int(tok))
                else:
                    row.append({"M": 1, "U": 0}[tok])
            rows.append(row)
        width = max((len(r) for r in rows), default=0)
        arr = np.full((len(rows), width), -1, dtype=np.int64)
        for v, r in enumerate(rows):
            arr[v, : len(r)] = r
        return cls(arr, kind)


def empty_labels(g: PortedGraph) -> np.ndarray:
    arr = np.full(g.nbr_array.shape, -1, dtype=np.int64)
    for v, row in enumerate(g.ports):
        for i, p in enumerate(row):
            if p is not None:
                arr[v, i] = 0
    return arr


def labels_from_port_sets(g: PortedGraph, sets: Sequence[Iterable[int]]) -> HalfEdgeLabeling:
    arr = empty_labels(g)
    for v, ports in enumerate(sets):
        for i in ports:
            arr[v, i] = 1
    return HalfEdgeLabeling(arr, GRABBING)


def node_output(alg: AlgorithmDescriptor, view: View):
    """Evaluate ``alg`` on one view, validating the output shape."""
    out = list(alg.rule(view))
    deg = view.degree
    if alg.kind == EDGE_COLORING:
        colors = tuple(int(c) for c in out)
        if len(colors) != deg:
            raise RuleViolation(f"{alg.name or 'rule'} gave {len(colors)} colors for {deg} ports")
        return colors
    ports = sorted({int(i) for i in out})
    if len(ports) != len(out) or any(not 0 <= i < deg for i in ports):
        raise RuleViolation(f"{alg.name or 'rule'} produced invalid ports {out}")
    if alg.kind == GRABBING and len(ports) != alg.param:
        raise RuleViolation(f"{alg.name or 'rule'} grabbed {len(ports)} ports, expected b={alg.param}")
    return tuple(ports)


def run_algorithm(g: PortedGraph, inputs: Inputs, alg: AlgorithmDescriptor) -> HalfEdgeLabeling:
    """Evaluate the rule on every node's radius-T view and collect the labels."""
    if alg.radius < 0:
        raise ValueError("radius must be >= 0")
    arr = empty_labels(g)
    for v in range(g.n):
        out = node_output(alg, extract_view(g, inputs, v, alg.radius))
        if alg.kind == EDGE_COLORING:
            arr[v, : len(out)] = out
        else:
            for i in out:
                arr[v, i] = 1
    kind = EDGE_COLORING if alg.kind == EDGE_COLORING else GRABBING
    return HalfEdgeLabeling(arr, kind)


def port_sets(g: PortedGraph, inputs: Inputs, alg: AlgorithmDescriptor) -> list[tuple[int, ...]]:
    """Raw per-node outputs (port sets) without building a labeling."""
    return [node_output(alg, extract_view(g, inputs, v, alg.radius)) for v in range(g.n)]


# ---------------------------------------------------------------------------
# sidecar format


def dumps_inputs(inputs: Inputs) -> str:
    def bitstr(value: int, width: int) -> str:
        return format(value, f"0{width}b")[::-1] if width else "-"

    lines = [f"{inputs.R} {inputs.R_shared} {inputs.id_max}", f"shared: {bitstr(inputs.shared, inputs.R_shared)}"]
    for v, inp in enumerate(inputs.nodes):
        perm = ",".join(map(str, inp.port_perm)) or "-"
        lines.append(f"{v}: {inp.id} {perm} {bitstr(inp.bits, inputs.R)}")
    return "\n".join(lines) + "\n"


def loads_inputs(text: str) -> Inputs:
    def parse_bits(tok: str) -> int:
        return 0 if tok == "-" else int(tok[::-1], 2)

    lines = [ln for ln in text.splitlines() if ln.strip()]
    R, R_shared, id_max = (int(t) for t in lines[0].split())
    shared = parse_bits(lines[1].partition(":")[2].strip())
    nodes = []
    for line in lines[2:]:
        _, _, rest = line.partition(":")
        ident, perm, bits = rest.split()
        perm_t = () if perm == "-" else tuple(int(t) for t in perm.split(","))
        nodes.append(NodeInputs(int(ident), perm_t, parse_bits(bits)))
    return Inputs(tuple(nodes), shared, R, R_shared, id_max)


def write_inputs(inputs: Inputs, path) -> None:
    Path(path).write_text(dumps_inputs(inputs))


def read_inputs(path) -> Inputs:
    return loads_inputs(Path(path).read_text())


def stable_digest(obj) -> int:
    return int.from_bytes(hashlib.blake2b(repr(obj).encode(), digest_size=8).digest(), "little")
