"""Reconstruction-error anomaly detection for transaction data.

Two unsupervised detectors built from first principles: a dense autoencoder
scored by per-row reconstruction loss, and a PCA detector scored by squared
reconstruction residual.  Both are fitted on normal rows only and flag rows
whose score exceeds a derived threshold.
"""

from .autoencoder import (
    Autoencoder,
    AutoencoderDetector,
    TrainConfig,
    TrainHistory,
    build_autoencoder,
    train,
)
from .data import (
    GeneratorSpec,
    LabeledDataset,
    concat_datasets,
    generate_synthetic,
    load_csv,
    save_csv,
)
from .detector import (
    ComparisonSummary,
    EvaluationReport,
    Threshold,
    compare,
    count_above,
    count_below,
    derive_threshold,
    evaluate,
    format_comparison,
    format_report,
    threshold_manual,
    threshold_mean_std,
    threshold_percentile,
)
from .errors import FraudDetectError
from .linalg import EigenDecomposition, covariance_matrix, eigh_symmetric
from .modelio import (
    AutoencoderArtifact,
    PcaArtifact,
    load_model,
    save_autoencoder_model,
    save_pca_model,
)
from .pca import PcaDetector
from .preprocess import (
    MinMaxScaler,
    StandardScaler,
    split_by_class,
    train_test_split,
)

__version__ = "0.1.0"

__all__ = [
    "Autoencoder",
    "AutoencoderArtifact",
    "AutoencoderDetector",
    "ComparisonSummary",
    "EigenDecomposition",
    "EvaluationReport",
    "FraudDetectError",
    "GeneratorSpec",
    "LabeledDataset",
    "MinMaxScaler",
    "PcaArtifact",
    "PcaDetector",
    "StandardScaler",
    "Threshold",
    "TrainConfig",
    "TrainHistory",
    "build_autoencoder",
    "compare",
    "concat_datasets",
    "count_above",
    "count_below",
    "covariance_matrix",
    "derive_threshold",
    "eigh_symmetric",
    "evaluate",
    "format_comparison",
    "format_report",
    "generate_synthetic",
    "load_csv",
    "load_model",
    "save_autoencoder_model",
    "save_csv",
    "save_pca_model",
    "split_by_class",
    "threshold_manual",
    "threshold_mean_std",
    "threshold_percentile",
    "train",
    "train_test_split",
]
