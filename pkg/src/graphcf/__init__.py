"""Counterfactual search and explanations for black-box graph classifiers.

Given any binary classifier over graphs that share one identity-aware
vertex set, this package finds counterfactual graphs of small edit distance
under an oracle-call budget, evaluates the search against a transparent
linear white-box with a known geometric optimum, and aggregates many
counterfactuals into local and global post-hoc explanations.
"""

__version__ = "0.1.0"

from .datasets import (
    DatasetError,
    DatasetItem,
    LabeledDataset,
    dataset_from_json,
    dataset_to_json,
    generate_synthetic,
    graph_from_json,
    graph_to_json,
    induced_pair_mask,
    load_correlation_csv,
    load_dataset,
    save_dataset,
    threshold_matrix,
)
from .explain import (
    ContrastiveExplanation,
    GlobalCounters,
    LocalExplanation,
    RegionMatrix,
    RoiImportance,
    contrastive_explanation,
    counter_mass_split,
    global_counters,
    local_explanation,
    region_heatmap,
    roi_importance,
)
from .graphs import (
    EdgeSet,
    Graph,
    GraphError,
    UniverseMismatchError,
    VertexUniverse,
    all_pairs,
    edit_distance,
    pair_from_index,
    pair_index,
    symmetric_difference,
    toggle_edges,
)
from .oracles import (
    BackendFailureError,
    BudgetExhaustedError,
    EdgeCountThresholdClassifier,
    KnnEditDistanceClassifier,
    LinearContrastClassifier,
    NondeterministicBackendError,
    OracleError,
    OracleSession,
    audit_determinism,
    embed_contrast,
    induced_edge_count,
)
from .remote import ExternalOracle, OracleTimeoutError, ProtocolError, connect_oracle
from .search import (
    CounterfactualResult,
    EdgeWeighting,
    SearchConfig,
    TraceStep,
    backward_search,
    backward_weights,
    dataset_search,
    forward_search,
    forward_weights,
    pick_weighted,
    run_many,
    run_pipeline,
    summarize_results,
)
from .whitebox import (
    InfeasibleTargetError,
    RealizedOptimum,
    SeparatorFit,
    WhiteboxReport,
    embedding_table,
    fit_linear_separator,
    geometric_optimum,
    geometric_optimum_vertical,
    realize_optimal_graph,
    whitebox_error,
)

__all__ = [name for name in dir() if not name.startswith("_")]
