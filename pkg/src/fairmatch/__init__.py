"""Proportionally fair maximum-weight bipartite matching.

Solve the fairness-constrained matching LP, round it with a proposal and
contention-resolution scheme, and certify the result's color proportions.
"""

from .baseline import PeelingConfig, peel_matching
from .exact import (
    ExactModeResult,
    brute_force_opt,
    brute_force_size_bound,
    solve_beta_fair,
    solve_exact_beta,
)
from .fairness import (
    FairnessReport,
    check_delta_fair,
    empirical_concentration,
    failure_bound_one_sided,
    failure_bound_two_sided,
)
from .graph import (
    ColoredBipartiteGraph,
    Edge,
    FairnessSpec,
    Matching,
    generate_erdos_renyi,
    generate_star_fixture,
    read_graph,
    validate,
    write_graph,
)
from .lp import (
    FractionalMatching,
    InfeasibleError,
    LinearProgram,
    NumericalFailure,
    build_lp_fair,
    build_matching_lp,
    export_lp,
    read_solution,
    solve,
    solve_lp_fair,
)
from .rounding import RoundingTrace, acceptance_prob, estimate_selectability, round_ocrs

__version__ = "0.1.0"
