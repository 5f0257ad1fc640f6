"""Concrete T-round grabbing algorithms to feed the self-reduction.

All rules choose in terms of the node's local port labels (``port_perm``)
and translate back to graph ports.
"""

from __future__ import annotations

from itertools import combinations
from math import comb

from .graphs import _canonical_order
from .local import GRABBING, MATCHING, AlgorithmDescriptor, View
from .reductions import matching_to_grabbing


def _to_ports(view: View, labels) -> list[int]:
    perm = view.center_inputs.port_perm
    return sorted(perm.index(lab) for lab in labels)


def uniform_grab(b: int, radius: int = 0) -> AlgorithmDescriptor:
    """b local labels sampled from the center's own bits; ignores the rest."""

    def rule(view: View):
        return _to_ports(view, view.rng(salt="uniform").sample(range(view.degree), b))

    return AlgorithmDescriptor(radius, GRABBING, b, rule, name="uniform")


def constant_grab(b: int, radius: int = 0) -> AlgorithmDescriptor:
    """Always the ports with local labels 0..b-1."""

    def rule(view: View):
        return _to_ports(view, range(b))

    return AlgorithmDescriptor(radius, GRABBING, b, rule, name="port1")


def frontier_grab(b: int, radius: int) -> AlgorithmDescriptor:
    """b-subset indexed by the bits of the nodes at distance exactly ``radius``.

    Frontier nodes are read in port-order BFS order and their bit strings
    concatenated; the resulting integer, taken modulo C(deg, b), indexes the
    lexicographic list of label subsets.
    """

    def rule(view: View):
        order, _ = _canonical_order(view.ball)
        depth = view.depth()
        value = 0
        for x in order:
            if depth[x] == view.radius:
                value = (value << view.R) | view.nodes[x].bits
        k = value % comb(view.degree, b)
        subset = next(s for t, s in enumerate(combinations(range(view.degree), b)) if t == k)
        return _to_ports(view, subset)

    return AlgorithmDescriptor(radius, GRABBING, b, rule, name="frontier")


def xor_grab(b: int, radius: int = 1) -> AlgorithmDescriptor:
    """Start label = own bit xor parity of neighbors with bit 1; grab b consecutive labels."""

    def rule(view: View):
        c = view.center
        own = view.center_inputs.bits & 1
        parity = 0
        for p in view.ball.ports[c]:
            if p is not None:
                parity ^= view.nodes[p[0]].bits & 1
        start = own ^ parity
        return _to_ports(view, [(start + k) % view.degree for k in range(b)])

    return AlgorithmDescriptor(radius, GRABBING, b, rule, name="xor")


def proposal_matching(b: int, radius: int) -> AlgorithmDescriptor:
    """``radius`` rounds of random mutual proposals, as a b-matching rule.

    Each round every node with spare capacity proposes to that many random
    unmatched ports; an edge joins the matching when both ends propose to it.
    The run is replayed on the view itself: states that depend on nodes
    outside the view never reach the center within ``radius`` rounds.
    """

    def rule(view: View):
        ball = view.ball
        rngs = [view.rng(x, salt="proposal") for x in range(ball.n)]
        matched = [set() for _ in range(ball.n)]
        for _ in range(view.radius):
            props = []
            for x in range(ball.n):
                perm = view.nodes[x].port_perm
                spare = b - len(matched[x])
                free = sorted(perm[i] for i in range(len(ball.ports[x])) if i not in matched[x])
                labels = rngs[x].sample(free, min(spare, len(free))) if spare > 0 else []
                props.append({perm.index(lab) for lab in labels})
            for x in range(ball.n):
                for i in props[x]:
                    p = ball.ports[x][i]
                    if p is not None and p[1] in props[p[0]]:
                        matched[x].add(i)
        return sorted(matched[view.center])

    return AlgorithmDescriptor(radius, MATCHING, b, rule, name="proposal-matching")


def proposal_grab(b: int, radius: int) -> AlgorithmDescriptor:
    alg = matching_to_grabbing(proposal_matching(b, radius))
    return AlgorithmDescriptor(alg.radius, alg.kind, alg.param, alg.rule, name="proposal")


ZOO = {
    "uniform": uniform_grab,
    "port1": constant_grab,
    "frontier": frontier_grab,
    "xor": xor_grab,
    "proposal": proposal_grab,
}


def baseline(name: str, b: int, radius: int) -> AlgorithmDescriptor:
    try:
        factory = ZOO[name]
    except KeyError:
        raise KeyError(f"unknown baseline {name!r}; known: {sorted(ZOO)}") from None
    return factory(b, radius)
