"""Cut sparsification by edge sampling, with connectivity estimators,
generalized random contraction and brute-force cut verification."""

from .graph import (
    Edge,
    GraphError,
    InvariantError,
    Multigraph,
    ParseError,
    Sparsifier,
    WeightedEdge,
    cut_weight,
    generate,
    parse_graph,
    parse_sparsifier,
    serialize_graph,
)
from .connectivity import KappaAssignment, estimate_kappa
from .sampling import SamplingConfig, sparsify, sparsify_by_trees, sparsify_pipeline
from .verify import max_cut_error

__version__ = "0.1.0"
