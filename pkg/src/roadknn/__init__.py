"""Top-k nearest-neighbor indexing for weighted road networks.

Build a distance-preserving pruned graph over an elimination order,
derive per-vertex top-k object lists from it (two builders: bottom-up
with per-vertex shortest-path passes, or bidirectional with none),
answer queries in O(k) by direct retrieval, and maintain the lists
incrementally as candidate objects come and go. A Dijkstra brute-force
oracle verifies everything.
"""

from .bngraph import (
    AugmentedGraph,
    BnGraph,
    BuildStats,
    VertexOrder,
    build_bn_graph,
    compute_order,
    eliminate_and_augment,
    prune_to_bn_graph,
)
from .builders import (
    IncreasingSubgraph,
    IndexBuildStats,
    KnnIndex,
    PartialKnn,
    build_increasing_subgraph,
    build_index_bidirectional,
    build_index_bottom_up,
    compute_partial_knn,
    sssp_on_subgraph,
)
from .bundle import (
    Bundle,
    build_bundle,
    graph_fingerprint,
    index_payload_bytes,
    load_bundle,
    predicted_size,
    save_bundle,
)
from .errors import (
    BundleFormatError,
    BundleIntegrityError,
    FingerprintMismatchError,
    GraphParseError,
    GraphStructureError,
    ObjectSetError,
    QueryParameterError,
    RoadKnnError,
    UnknownVertexError,
    UpdateError,
)
from .graph import (
    INFINITY,
    ObjectSet,
    RoadNetwork,
    generate_grid,
    generate_random_connected,
    load_objects,
    parse_dimacs_gr,
    sample_objects,
    serialize_dimacs_gr,
    serialize_objects,
)
from .maintenance import UpdateReport, delete_object, insert_object
from .oracle import (
    VerificationReport,
    Violation,
    descending_distance_table,
    dijkstra_knn,
    dijkstra_sssp,
    floyd_warshall,
    oracle_knn_all,
    verify_bn_graph,
    verify_index,
)
from .query import knn_query, progressive_query

__version__ = "0.1.0"
