"""Round elimination by self-reduction for b-grabbing in the LOCAL model."""

from .graphs import (
    PortedGraph,
    compute_girth,
    extract_ball,
    extend_ball_to_tree,
    generate_regular_graph,
    independence_number,
    named_graph,
)
from .local import AlgorithmDescriptor, Inputs, View, assign_inputs, extract_view, run_algorithm
from .problems import score_grabbing, verify_b_grabbing, verify_edge_coloring, verify_maximal_b_matching
from .reductions import coloring_to_grabbing, matching_to_grabbing
from .selfreduction import (
    DomainError,
    derive_one_round_faster,
    estimate_direction_profile,
    iterate_self_reduction,
    measure_badness,
    preferred_directions,
    round_bound,
    wrong_half_edge_audit,
)

__version__ = "0.1.0"
