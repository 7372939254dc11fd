"""Class-geometry complexity scoring for labeled embedding datasets.

Given N labeled d-dimensional vectors, this package estimates per-class
geometry (centroid, covariance, correlation, precision), scores how hard
each sample is to assign to its own class relative to the others, derives a
distance-based baseline classifier and its accuracy from the same geometry,
and mines feature ranges where misclassifications concentrate.
"""

from .analysis import (
    AnalysisTable,
    DatasetStats,
    Slice,
    dataset_stats,
    default_min_support,
    find_slices_1d,
    find_slices_2d,
    make_slice,
    median_class_size,
    normalized_entropy,
    rank_slices,
    slice_rank,
)
from .dataset import EmbeddedDataset
from .errors import (
    CplxError,
    DegenerateVector,
    DimensionMismatch,
    EmptyClass,
    EmptyDataset,
    InsufficientSamples,
    InvalidSpec,
    JoinError,
    NumericalError,
    ParseError,
    SingularMatrix,
    StratificationError,
    UndefinedEntropy,
    UnknownClass,
    ValidationError,
)
from .geometry import (
    ClassGeometry,
    GeometryConfig,
    GeometryModel,
    centroid,
    correlation_matrix,
    covariance_mle,
    fit,
    model_from_parameters,
    precision,
    shrink_ledoit_wolf,
)
from .io import (
    PredictionsFile,
    Report,
    SplitSpec,
    build_analysis_table,
    emit_report,
    load_model,
    read_dataset,
    read_dataset_binary,
    read_predictions,
    read_records_csv,
    read_report,
    save_model,
    split,
    write_dataset,
    write_dataset_binary,
    write_heatmap_csv,
    write_records_csv,
    write_slices_csv,
)
from .scoring import (
    ComplexityRecord,
    DistanceKind,
    FEATURE_COLUMNS,
    baseline_accuracy,
    baseline_predict,
    complexity,
    complexity_from_distances,
    distance,
    distance_matrix,
    ood_score,
    score_dataset,
)
from .synth import (
    DEFAULT_SEED,
    GaussianSpec,
    HeatmapGrid,
    exact_model,
    generate,
    heatmap,
    preset,
)

__version__ = "0.1.0"
