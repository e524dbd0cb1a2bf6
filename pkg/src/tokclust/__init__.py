"""Batched agglomerative token clustering and merging for transformer sequences."""

from .attention import (
    BlockWeights,
    StackResult,
    attention_weights,
    block_forward,
    load_block_weights,
    proportional_attention,
    random_block_weights,
    run_stack,
    save_block_weights,
)
from .clusterer import (
    ClusterAssignment,
    Dendrogram,
    DistanceThreshold,
    Merge,
    StoppingRule,
    TargetClusters,
    cluster_mst_single,
    cluster_naive,
    cluster_nn_chain,
    cut_dendrogram,
)
from .errors import (
    BlockOutOfRange,
    InvalidStop,
    KeepRateTooLow,
    MisalignedAssignment,
    NonPositiveSize,
    OverlappingClusters,
    ShapeMismatch,
    TensorFileError,
    ZeroNormVector,
)
from .geometry import CondensedDistanceMatrix, cosine_distance, pairwise_distances
from .linkage import LinkageKind, merged_distance, set_distance
from .reducer import (
    ConstantSchedule,
    LinearSchedule,
    MergeRecord,
    ReductionSchedule,
    StageSchedule,
    TokenBatch,
    identity_assignment,
    merge_tokens,
    reduce_block,
    round_half_up,
    schedule_from_mapping,
    schedule_removals,
    tome_bipartite_merge,
    unmerge,
)
from .tensorio import read_tensor, write_tensor

__version__ = "0.1.0"

__all__ = [
    "BlockOutOfRange",
    "BlockWeights",
    "ClusterAssignment",
    "CondensedDistanceMatrix",
    "ConstantSchedule",
    "Dendrogram",
    "DistanceThreshold",
    "InvalidStop",
    "KeepRateTooLow",
    "LinearSchedule",
    "LinkageKind",
    "Merge",
    "MergeRecord",
    "MisalignedAssignment",
    "NonPositiveSize",
    "OverlappingClusters",
    "ReductionSchedule",
    "ShapeMismatch",
    "StackResult",
    "StageSchedule",
    "StoppingRule",
    "TargetClusters",
    "TensorFileError",
    "TokenBatch",
    "ZeroNormVector",
    "attention_weights",
    "block_forward",
    "cluster_mst_single",
    "cluster_naive",
    "cluster_nn_chain",
    "cosine_distance",
    "cut_dendrogram",
    "identity_assignment",
    "load_block_weights",
    "merge_tokens",
    "merged_distance",
    "pairwise_distances",
    "proportional_attention",
    "random_block_weights",
    "read_tensor",
    "reduce_block",
    "round_half_up",
    "run_stack",
    "save_block_weights",
    "schedule_from_mapping",
    "schedule_removals",
    "set_distance",
    "tome_bipartite_merge",
    "unmerge",
    "write_tensor",
]
