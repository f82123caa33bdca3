"""Hypersphere-boundary anomaly detection for high-dimensional embeddings.

Fit an ensemble of adaptive hypersphere partitionings, map points to compact
binary features (one bit per partitioning), and score anomalies by how often
a point falls outside every sphere.  Includes the assignment-level feature
map and a kernel-mean distributional baseline for comparison, plus an
evaluation harness (AUROC, synthetic data, sweeps, scaling benchmarks).
"""

from .errors import (
    EmptyReferenceError,
    FormatError,
    HyperparameterError,
    InternalInvariantError,
    ParameterError,
    ShapeError,
    SikError,
    UndefinedMetricError,
)
from .evaluation import (
    BenchRow,
    ExperimentReport,
    LabeledDataset,
    auroc,
    bench_scaling,
    contamination_sweep,
    detection_split,
    gen_blobs_with_outliers,
    run_detector,
    sensitivity_sweep,
)
from .features import (
    NO_SPHERE,
    IkFeature,
    IkFeatureBatch,
    SikFeature,
    SikFeatureBatch,
    ik_dense_bits_per_point,
    ik_map,
    ik_map_batch,
    ik_store_bytes_per_point,
    sik_map,
    sik_map_batch,
    sik_store_bits_per_point,
    sik_store_bytes_per_point,
)
from .formats import (
    load_ensemble,
    read_dataset,
    read_dataset_binary,
    read_dataset_csv,
    read_scores_csv,
    save_ensemble,
    write_dataset,
    write_dataset_binary,
    write_dataset_csv,
    write_scores_csv,
)
from .partitioning import (
    Partitioning,
    SphereEnsemble,
    as_embedding_matrix,
    assign_batch,
    build_partitioning,
    fit_ensemble,
    locate,
    sample_subset,
)
from .scoring import (
    KernelMean,
    gram_matrix,
    idk_fit,
    idk_score,
    idk_score_batch,
    ik_kernel,
    ik_score,
    ik_score_batch,
    sik_kernel,
    sik_score,
    sik_score_batch,
)

__version__ = "0.1.0"

__all__ = [
    "SikError",
    "HyperparameterError",
    "ShapeError",
    "ParameterError",
    "UndefinedMetricError",
    "EmptyReferenceError",
    "InternalInvariantError",
    "FormatError",
    "Partitioning",
    "SphereEnsemble",
    "as_embedding_matrix",
    "sample_subset",
    "build_partitioning",
    "fit_ensemble",
    "locate",
    "assign_batch",
    "NO_SPHERE",
    "SikFeature",
    "IkFeature",
    "SikFeatureBatch",
    "IkFeatureBatch",
    "sik_map",
    "ik_map",
    "sik_map_batch",
    "ik_map_batch",
    "sik_store_bits_per_point",
    "sik_store_bytes_per_point",
    "ik_store_bytes_per_point",
    "ik_dense_bits_per_point",
    "KernelMean",
    "sik_kernel",
    "ik_kernel",
    "sik_score",
    "sik_score_batch",
    "ik_score",
    "ik_score_batch",
    "idk_fit",
    "idk_score",
    "idk_score_batch",
    "gram_matrix",
    "LabeledDataset",
    "ExperimentReport",
    "BenchRow",
    "auroc",
    "gen_blobs_with_outliers",
    "detection_split",
    "run_detector",
    "contamination_sweep",
    "sensitivity_sweep",
    "bench_scaling",
    "save_ensemble",
    "load_ensemble",
    "read_dataset",
    "write_dataset",
    "read_dataset_csv",
    "write_dataset_csv",
    "read_dataset_binary",
    "write_dataset_binary",
    "write_scores_csv",
    "read_scores_csv",
]
