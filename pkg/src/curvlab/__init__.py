"""Curvature lower bounds for finite weighted graphs and quantum Markov semigroups."""

from .errors import CertificationError, ValidationError
from .graph_core import WeightedGraph, build_graph, carre_du_champ, gamma2, graph_from_json, graph_to_json, heat_semigroup, laplacian
from .graph_curvature import (
    GeSearchConfig,
    bakry_emery_curvature,
    ge_curvature_search,
    ge_falsify,
    idle_hodge,
    intertwining_curvature,
    splitting_hodge,
    two_point_entropic_exact,
    universal_bound,
)
from .instances import (
    complete_graph,
    epsilon_graph,
    path_graph,
    random_graph,
    random_subunit_degree_graph,
    two_point_graph,
    uniform_complete_graph,
)
from .mapping_rep import (
    build_mapping_rep,
    cyclic_shifts,
    guaranteed_bound,
    hypercube,
    intertwining_curvature_mapping,
    mapping_from_json,
    mapping_hodge,
)
from .means import MEAN_NAMES, MeanFunction, builtin_mean, custom_mean
from .optimize import SearchConfig, pencil_min_eig
from .qms_core import (
    Fodc,
    QmsGenerator,
    build_qms,
    commuting_projections,
    conditional_expectation,
    density_matrix,
    dephasing,
    depolarizing,
    fodc,
    lambda_norm,
    pimsner_popa,
    qms_from_json,
    semigroup,
)
from .qms_curvature import (
    be_curvature_qms,
    ge_check_qms,
    ge_derivative_estimate,
    ge_derivative_infimum,
    ge_falsify_qms,
    intertwining_curvature_qms,
    mlsi_decay_check,
    mlsi_falsify,
    product_hodge,
    splitting_hodge_qms,
    witness_upper_bound,
)
from .report import SCHEMA, CurvatureReport

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
