"""Identification of node, edge and path interventions on causal graphs."""

from .errors import *  # noqa: F401,F403
from .functional import Functional, Sym, Term, evaluate, marginalize, parse_functional, render, simplify
from .graph import (
    CausalGraph,
    SplitGraph,
    ancestors,
    build_graph,
    d_separated,
    descendants,
    district_of,
    districts,
    edge_subgraph,
    latent_project,
    topological_order,
    vertex_subgraph,
)
from .identify import (
    IdentificationResult,
    Verdict,
    dag_dagger,
    edge_g_formula,
    extended_g_formula,
    g_functional_admg,
    g_functional_context,
    identify,
)
from .interventions import (
    NATURAL,
    EdgeIntervention,
    NodeIntervention,
    PathIntervention,
    build_shatter,
    build_swig,
    check_edge_consistency,
    check_node_consistency,
    defined_response,
    embed_edge_as_path,
    embed_node_as_path,
    induce_edge_intervention,
    induce_node_intervention,
    is_natural_for,
    live_intervention,
    reduce_natural,
    render_expr,
)
from .joint import DiscreteJoint, random_joint
from .paths import enumerate_paths, funnel, is_proper, live_subset, relevant_paths
from .targets import TargetKind, TargetSpec, alpha_set, ett_intervention, pse_avg, pse_fixed

__version__ = "0.1.0"
