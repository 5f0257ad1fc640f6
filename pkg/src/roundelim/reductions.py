"""Black-box conversions into grabbing algorithms. Neither adds rounds."""

from __future__ import annotations

from typing import Sequence

from .local import EDGE_COLORING, GRABBING, MATCHING, AlgorithmDescriptor, View


def matching_to_grabbing(alg: AlgorithmDescriptor) -> AlgorithmDescriptor:
    """No-error b-grabbing from any (possibly failing) b-matching rule.

    Excess claimed ports are dropped from the top (largest indices first) and
    the set is topped up to exactly b with ports drawn without replacement
    using the center's private bits.
    """
    if alg.kind != MATCHING:
        raise TypeError(f"expected a matching algorithm, got {alg.kind}")
    b = alg.param

    def rule(view: View):
        claimed = sorted({int(i) for i in alg.rule(view) if 0 <= int(i) < view.degree})[:b]
        if len(claimed) < b:
            free = [i for i in range(view.degree) if i not in claimed]
            claimed += view.rng(salt="topup").sample(free, b - len(claimed))
        return claimed

    return AlgorithmDescriptor(
        alg.radius, GRABBING, b, rule, name=f"grab({alg.name or 'matching'})", reads_ids=alg.reads_ids
    )


def chosen_color(shared: int, palette: int) -> int:
    return shared % palette


def coloring_to_grabbing(alg: AlgorithmDescriptor) -> AlgorithmDescriptor:
    """1-grabbing from an edge coloring: grab the edge of a shared random color.

    A node with no incident edge of that color grabs a uniformly random port.
    If a faulty coloring gives it several, it grabs the lowest one.
    """
    if alg.kind != EDGE_COLORING:
        raise TypeError(f"expected an edge-coloring algorithm, got {alg.kind}")
    palette = alg.param

    def rule(view: View):
        chi = chosen_color(view.shared, palette)
        colors = list(alg.rule(view))
        hits = [i for i, c in enumerate(colors) if c == chi]
        if hits:
            return [hits[0]]
        return [view.rng(salt="fallback").randrange(view.degree)]

    return AlgorithmDescriptor(
        alg.radius, GRABBING, 1, rule, name=f"grab({alg.name or 'coloring'})", reads_ids=alg.reads_ids
    )


def table_rule(
    table: Sequence, kind: str, param: int, name: str = "table", radius: int = 0
) -> AlgorithmDescriptor:
    """Wrap a centrally computed per-node output table as a descriptor.

    The rule looks the answer up by the view's host node; it stands in for
    "some correct algorithm" when only its output matters.
    """

    def rule(view: View):
        out = table[view.host]
        return list(out) if kind == EDGE_COLORING else sorted(out)

    return AlgorithmDescriptor(radius, kind, param, rule, name=name)
