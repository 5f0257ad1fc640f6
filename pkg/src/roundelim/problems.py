"""Verifiers and scores for b-grabbing, maximal b-matching and edge coloring."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .graphs import PortedGraph
from .local import HalfEdgeLabeling


class Check(NamedTuple):
    ok: bool
    witness: object = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_b_grabbing(lab: HalfEdgeLabeling, b: int) -> Check:
    counts = lab.half_edges_m()
    bad = np.flatnonzero(counts != b)
    if bad.size:
        v = int(bad[0])
        return Check(False, v, f"node {v} grabs {int(counts[v])} half-edges, expected {b}")
    return Check(True)


@dataclass
class GrabbingScore:
    q: int
    p: float
    b: int
    n: int
    saturated: np.ndarray = field(repr=False)

    @property
    def p_exact(self) -> Fraction:
        return Fraction(self.b * self.n - 2 * self.q, self.b * self.n)

    @property
    def saturated_count(self) -> int:
        return int(self.saturated.sum())

    def to_json(self) -> str:
        return json.dumps({"q": self.q, "p": self.p, "saturated_count": self.saturated_count})


def score_grabbing(lab: HalfEdgeLabeling, g: PortedGraph, b: int) -> GrabbingScore:
    """Matched edges ``q`` and badness ``p = 1 - 2q/(bn)``."""
    matched = np.zeros(g.n, dtype=np.int64)
    q = 0
    for v, _, u, _ in lab.matched_edges(g):
        q += 1
        matched[v] += 1
        matched[u] += 1
    p_exact = Fraction(b * g.n - 2 * q, b * g.n)
    return GrabbingScore(q, float(p_exact), b, g.n, matched == b)


OVERFULL = "Overfull"
DISAGREEMENT = "Disagreement"
NOT_MAXIMAL = "NotMaximal"


@dataclass
class MatchingVerdict:
    ok: bool
    failures: list[tuple[str, object]]
    matching: list[tuple[int, int, int, int]]
    unsaturated: list[int]

    def __bool__(self) -> bool:
        return self.ok


def agreed_matching(g: PortedGraph, P: Mapping[int, Sequence[int]] | Sequence[Sequence[int]]) -> list:
    sets = [set(P[v]) for v in range(g.n)]
    return [e for e in g.edges() if e[1] in sets[e[0]] and e[3] in sets[e[2]]]


def verify_maximal_b_matching(g: PortedGraph, P, b: int) -> MatchingVerdict:
    """Check the three failure modes; witnesses come in node-index order."""
    sets = [set(P[v]) for v in range(g.n)]
    failures: list[tuple[str, object]] = []
    for v in range(g.n):
        if len(sets[v]) > b:
            failures.append((OVERFULL, v))
    for v, i, u, j in g.edges():
        if (i in sets[v]) != (j in sets[u]):
            failures.append((DISAGREEMENT, (v, i, u, j)))
    matching = agreed_matching(g, P)
    load = np.zeros(g.n, dtype=np.int64)
    for v, _, u, _ in matching:
        load[v] += 1
        load[u] += 1
    in_m = {(e[0], e[1]) for e in matching}
    for v, i, u, j in g.edges():
        if (v, i) not in in_m and load[v] < b and load[u] < b:
            failures.append((NOT_MAXIMAL, (v, i, u, j)))
    unsaturated = [v for v in range(g.n) if load[v] != b]
    return MatchingVerdict(not failures, failures, matching, unsaturated)


def unsaturated_max_degree(g: PortedGraph, unsaturated: Sequence[int]) -> int:
    """Maximum degree of the subgraph induced by ``unsaturated``."""
    inside = set(unsaturated)
    return max((sum(u in inside for u in g.neighbors(v)) for v in inside), default=0)


def verify_edge_coloring(g: PortedGraph, coloring: HalfEdgeLabeling, palette: int) -> Check:
    labels = coloring.labels
    for v, i, u, j in g.edges():
        cv, cu = int(labels[v, i]), int(labels[u, j])
        if cv != cu:
            return Check(False, (v, i, u, j), f"half-edges of edge {v}-{u} disagree ({cv} vs {cu})")
        if not 0 <= cv < palette:
            return Check(False, (v, i, u, j), f"color {cv} outside palette of size {palette}")
    for v, row in enumerate(g.ports):
        seen = set()
        for i, p in enumerate(row):
            if p is None:
                continue
            c = int(labels[v, i])
            if c in seen:
                return Check(False, v, f"node {v} sees color {c} twice")
            seen.add(c)
    return Check(True)


def greedy_maximal_b_matching(g: PortedGraph, b: int, seed: Optional[int] = None) -> list[set[int]]:
    """Centrally computed maximal b-matching as per-node port sets."""
    edges = list(g.edges())
    if seed is not None:
        order = np.random.default_rng(seed).permutation(len(edges))
        edges = [edges[k] for k in order]
    load = [0] * g.n
    P: list[set[int]] = [set() for _ in range(g.n)]
    for v, i, u, j in edges:
        if load[v] < b and load[u] < b:
            P[v].add(i)
            P[u].add(j)
            load[v] += 1
            load[u] += 1
    return P
