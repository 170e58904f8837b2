"""Exact, cross-checked computations around left and right convergence of bounded-degree graphs."""

from .budget import Budget, BudgetExceeded
from .catalog import build_matrices, enumerate_catalog, verify_rank
from .convergence import (
    dependency_graph,
    direction_cumulants,
    fmn_bound,
    radius,
    sequence_report,
    spanning_tree_cumulant_check,
    taylor_eval,
    taylor_model,
)
from .counting import (
    ball_distribution,
    hom_count,
    i_profile,
    ind_count,
    inj_count,
    log_t_density,
    t_density,
    weighted_hom,
)
from .cumulants import (
    ColorPattern,
    LambdaVector,
    cgf_value,
    color_statistics,
    enumerate_partitions,
    f_pi,
    joint_cumulant,
    kappa_fj,
    kappa_gj,
    moments_to_cumulants,
    target_from_lambda,
    x_value,
)
from .graphs import (
    EdgeLabeledMultigraph,
    SimpleGraph,
    WeightedTarget,
    canonical_form,
    canonical_rooted,
    generate,
    induced_pattern,
    parse_graph,
    spanning_tree_count,
)
from .verify import verify_all

__version__ = "0.1.0"
