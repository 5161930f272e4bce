"""Stochastic Kronecker Graph (SKG) and Poisson SKG generation.

The top-level namespace re-exports the pieces most scripts need; the
submodules hold the rest.
"""

from .initiator import (
    GraphSpec,
    InitiatorMatrix,
    Marginals,
    derive_marginals,
    kron_power_dense,
    kron_power_vector,
    parse_initiator,
)
from .generator import (
    EdgeList,
    pskg_vertex_edges,
    sample_poisson,
    skg_equiv_generate,
    skg_generate,
    vertex_load,
)
from .streams import derive_stream, derive_vertex_stream
from .partition import (
    ImbalanceBound,
    PartitionTable,
    compute_partition,
    cumulative_load,
    imbalance_bound,
    locate_boundary,
)
from .runner import merge_edge_outputs, run_generation

__version__ = "0.1.0"

__all__ = [
    "EdgeList",
    "GraphSpec",
    "ImbalanceBound",
    "InitiatorMatrix",
    "Marginals",
    "PartitionTable",
    "compute_partition",
    "cumulative_load",
    "derive_marginals",
    "derive_stream",
    "derive_vertex_stream",
    "imbalance_bound",
    "kron_power_dense",
    "kron_power_vector",
    "locate_boundary",
    "merge_edge_outputs",
    "parse_initiator",
    "pskg_vertex_edges",
    "run_generation",
    "sample_poisson",
    "skg_equiv_generate",
    "skg_generate",
    "vertex_load",
]
