"""Extended Weisfeiler-Lehman graph kernels over shortest-path DAG decompositions."""

from .decomposition import (
    Interner,
    ShortestPathDAG,
    bfs_levels,
    canonical_encode,
    extract_dag,
    materialize_tree,
)
from .graph import Dataset, FormatError, Graph, LabelInterner, parse_gtx, parse_sparse_dir, validate
from .kernels import (
    ConfigError,
    FeatureVector,
    GramMatrix,
    KernelConfig,
    KernelKind,
    delta_base_kernel,
    framework_kernel,
    gram,
    normalize,
    st_base_kernel,
    st_feature_vector,
)
from .relabeling import (
    RelabelledGraph,
    WLTestResult,
    dag_signature,
    neighbor_signature,
    wl_isomorphism_test,
    wl_iterate,
)

__version__ = "0.1.0"
