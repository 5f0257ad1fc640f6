from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roundelim.graphs import complete_bipartite, complete_graph, cycle_graph, generate_regular_graph, independence_number, path_graph
from roundelim.local import (
    EDGE_COLORING,
    GRABBING,
    MATCHING,
    AlgorithmDescriptor,
    assign_inputs,
    enumerate_inputs,
    labels_from_port_sets,
    run_algorithm,
)
from roundelim.problems import greedy_maximal_b_matching, score_grabbing, verify_b_grabbing, verify_edge_coloring
from roundelim.reductions import chosen_color, coloring_to_grabbing, matching_to_grabbing, table_rule
from roundelim.local import HalfEdgeLabeling


def c6_perfect():
    return [{0} if v % 2 == 0 else {1} for v in range(6)]


def test_perfect_matching_passes_through():
    g = cycle_graph(6)
    alg = matching_to_grabbing(table_rule(c6_perfect(), MATCHING, 1))
    lab = run_algorithm(g, assign_inputs(g, 0, R=8), alg)
    assert lab == labels_from_port_sets(g, c6_perfect())
    assert score_grabbing(lab, g, 1).p == 0


def test_overfull_keeps_smallest_ports():
    g = complete_graph(5)
    alg = matching_to_grabbing(AlgorithmDescriptor(0, MATCHING, 1, lambda view: range(view.degree)))
    lab = run_algorithm(g, assign_inputs(g, 0, R=8), alg)
    assert verify_b_grabbing(lab, 1)
    assert all(lab.grabbed(v) == [0] for v in range(g.n))
    alg2 = matching_to_grabbing(AlgorithmDescriptor(0, MATCHING, 2, lambda view: range(view.degree)))
    assert all(run_algorithm(g, assign_inputs(g, 0, R=8), alg2).grabbed(v) == [0, 1] for v in range(g.n))


def test_matching_reduction_radius_and_kind():
    m = AlgorithmDescriptor(3, MATCHING, 2, lambda view: [])
    out = matching_to_grabbing(m)
    assert (out.radius, out.kind, out.param) == (3, GRABBING, 2)
    with pytest.raises(TypeError):
        matching_to_grabbing(out)
    col = AlgorithmDescriptor(2, EDGE_COLORING, 5, lambda view: [0] * view.degree)
    assert coloring_to_grabbing(col).radius == 2


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_no_error_on_arbitrary_matchings(seed, b):
    g = generate_regular_graph(16, 6, seed % 30)
    rng = np.random.default_rng(seed)
    # adversarial claims: random subsets of any size, some out of range
    table = [set(rng.choice(8, size=rng.integers(0, 8), replace=False).tolist()) for _ in range(g.n)]
    alg = matching_to_grabbing(table_rule(table, MATCHING, b))
    lab = run_algorithm(g, assign_inputs(g, seed, R=16), alg)
    assert verify_b_grabbing(lab, b)
    for v in range(g.n):
        kept = sorted(i for i in table[v] if i < 6)[:b]
        assert set(kept) <= set(lab.grabbed(v))


def test_reduction_badness_bound_n40():
    g = generate_regular_graph(40, 6, 3)
    alpha = independence_number(g).exact
    P = greedy_maximal_b_matching(g, 1, seed=3)
    lab = run_algorithm(g, assign_inputs(g, 3, R=8), matching_to_grabbing(table_rule(P, MATCHING, 1)))
    assert score_grabbing(lab, g, 1).p_exact <= Fraction(alpha, 40)


def latin_k44(k=0):
    """Proper coloring of K_{4,4} by (i + j) mod 4; for k > 0 colors k of
    the classes' first edges recolored into the spare colors 4..3+k."""
    g = complete_bipartite(4, 4)
    arr = np.full((8, 4), -1)
    for v, i, u, j in g.edges():
        a, b = (v, u) if v < 4 else (u, v)
        arr[v, i] = arr[u, j] = (a + (b - 4)) % 4
    # move one perfect matching's edges (color 0) to spare colors, spread out
    moved = 0
    for v, i, u, j in sorted(g.edges()):
        if k and arr[v, i] == 0:
            arr[v, i] = arr[u, j] = 4 + moved % k
            moved += 1
    return g, arr


def coloring_expectation(g, arr, palette, R=1):
    alg = coloring_to_grabbing(table_rule(arr.tolist(), EDGE_COLORING, palette))
    base = assign_inputs(g, 0, R=R, R_shared=3)
    total = Fraction(0)
    count = 0
    for chi in range(palette):
        for w in enumerate_inputs(base, range(g.n), reads_ids=False):
            w = replace(w, shared=chi)  # enumerate the sampled color directly
            lab = run_algorithm(g, w, alg)
            assert verify_b_grabbing(lab, 1)
            total += score_grabbing(lab, g, 1).p_exact
            count += 1
    return total / count


@pytest.mark.parametrize("k", [0, 1, 2])
def test_coloring_reduction_bound(k):
    g, arr = latin_k44(k)
    palette = 4 + k
    assert verify_edge_coloring(g, HalfEdgeLabeling(arr, EDGE_COLORING), palette)
    p = coloring_expectation(g, arr, palette)
    assert p <= Fraction(k, 4 + k)
    if k == 0:
        assert p == 0


def test_k4_coloring_every_color_perfect():
    g = complete_graph(4)
    arr = np.full((4, 3), -1)
    color = {frozenset(e): c for c, pair in enumerate([((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))]) for e in pair}
    for v, i, u, j in g.edges():
        arr[v, i] = arr[u, j] = color[frozenset((v, u))]
    alg = coloring_to_grabbing(table_rule(arr.tolist(), EDGE_COLORING, 3))
    base = assign_inputs(g, 0, R=4, R_shared=2)
    for chi in range(3):
        w = replace(base, shared=chi)
        assert score_grabbing(run_algorithm(g, w, alg), g, 1).p == 0


def test_improper_coloring_grabs_lower_port():
    g = path_graph(3)
    arr = np.full((3, g.delta), -1)
    for v, i, u, j in g.edges():
        arr[v, i] = arr[u, j] = 0
    alg = coloring_to_grabbing(table_rule(arr.tolist(), EDGE_COLORING, 2))
    base = assign_inputs(g, 0, R=4, R_shared=1)
    w = replace(base, shared=0)
    lab = run_algorithm(g, w, alg)
    assert verify_b_grabbing(lab, 1)
    mid = next(v for v in range(3) if g.degree(v) == 2)
    ports = [i for i, p in enumerate(g.ports[mid]) if p is not None]
    assert lab.grabbed(mid) == [min(ports)]


def test_chosen_color_is_shared_function():
    assert [chosen_color(s, 5) for s in range(7)] == [0, 1, 2, 3, 4, 0, 1]
