"""Incremental compilation of Bayesian-network structure.

Builds and maintains the moral graph, a minimal triangulation, a junction
tree and the maximal-prime-subgraph tree of a directed acyclic network,
recompiling only the subtrees affected by structural edits.
"""

from .clustertree import ClusterTree
from .engine import (
    AddArc,
    AddNode,
    BatchTrace,
    CompiledModel,
    Modification,
    RemoveArc,
    RemoveNode,
    absorb_non_maximal,
    apply_modification,
    connect,
    expand_remove_node,
    incremental_compile,
    mark_add_link,
    mark_remove_link,
    mark_remove_node,
    modify_moral_graph,
)
from .errors import (
    BnicError,
    CycleError,
    InconsistencyError,
    InvalidEditError,
    NotChordalError,
    ParseError,
    UnknownVariableError,
)
from .graph import Dag, Link, UndirectedGraph, VariableTable, is_chordal, moralize
from .mpd import MpdIndex, aggregate_cliques
from .oracle import (
    ValidityReport,
    full_recompile,
    mpd_equal,
    random_dag,
    random_script,
    stability,
    validate,
)
from .pipeline import (
    Triangulation,
    assign_families,
    build_join_tree,
    construct_join_tree,
    extract_cliques,
    recursive_thinning,
    triangulate_min_fill,
)

__version__ = "0.1.0"

__all__ = [
    "AddArc",
    "AddNode",
    "BatchTrace",
    "BnicError",
    "ClusterTree",
    "CompiledModel",
    "CycleError",
    "Dag",
    "InconsistencyError",
    "InvalidEditError",
    "Link",
    "Modification",
    "MpdIndex",
    "NotChordalError",
    "ParseError",
    "RemoveArc",
    "RemoveNode",
    "Triangulation",
    "UndirectedGraph",
    "UnknownVariableError",
    "ValidityReport",
    "VariableTable",
    "absorb_non_maximal",
    "aggregate_cliques",
    "apply_modification",
    "assign_families",
    "build_join_tree",
    "connect",
    "construct_join_tree",
    "expand_remove_node",
    "extract_cliques",
    "full_recompile",
    "incremental_compile",
    "is_chordal",
    "mark_add_link",
    "mark_remove_link",
    "mark_remove_node",
    "modify_moral_graph",
    "moralize",
    "mpd_equal",
    "random_dag",
    "random_script",
    "recursive_thinning",
    "stability",
    "triangulate_min_fill",
    "validate",
]
