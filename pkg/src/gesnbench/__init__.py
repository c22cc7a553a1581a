"""Graph echo state networks for node classification, with an experiment
harness and over-squashing sensitivity diagnostics."""

from .graph import (
    SparseGraph,
    GraphStats,
    spectral_radius,
    edge_homophily,
    largest_connected_component,
    to_undirected,
    normalized_adjacency,
    graph_stats,
)
from .linalg import ConvergenceError
from .reservoir import (
    ReservoirConfig,
    ReservoirWeights,
    EmbeddingMatrix,
    init_reservoir,
    compute_embeddings,
    state_trajectory,
)
from .readout import (
    ReadoutModel,
    BootstrapResult,
    RidgeSolveError,
    fit_ridge,
    predict,
    accuracy,
    bootstrap_ci,
)
from .sensitivity import (
    GcnStack,
    SensitivityReport,
    gcn_forward,
    adjacency_power_entry,
    empirical_jacobian_norm,
    sensitivity_report,
)
from .datasets import (
    CanonicalDataset,
    SplitSet,
    DatasetFormatError,
    load_dataset,
    save_dataset,
    make_splits,
    load_splits,
    save_splits,
)
from .bench import (
    ExperimentSpec,
    RunResult,
    GridSearchResult,
    PipelineError,
    run_single,
    grid_search,
    export_heatmap,
    export_embeddings,
)

__version__ = "0.1.0"
