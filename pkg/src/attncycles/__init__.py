"""Attention-cycle features and two-stage factuality classification."""

__version__ = "0.1.0"

from .types import (
    ACTIONS,
    ChannelRecord,
    DatasetSplit,
    FactualityLabel,
    HourlyCumulativeSeries,
    PredictionDistribution,
    RawFactualityLabel,
    Snapshot,
    VideoObservation,
    merge_factuality_labels,
)
from .matrix import FeatureMatrix, FeatureVector
from .ingest import (
    build_hourly_series,
    filter_and_cap_channels,
    assign_distant_labels,
    parse_snapshot_log,
    prepare_corpus,
    split_dataset,
)
from .video_features import (
    AttentionConfig,
    FirstDayPeriods,
    attention_feature_names,
    extract_attention_matrix,
    extract_video_attention_vector,
    extract_video_full_vector,
    safediv,
)
from .channel_features import (
    aggregate_predictions,
    average_video_features,
    channel_statistics,
    gini,
)
from .selection import SelectionReport, anova_f, pearson_r, select_top_union, spearman_rho
from .metrics import EvaluationReport, accuracy, balanced_accuracy, evaluate, mae
from .experiments import (
    ExperimentSpec,
    LeakageError,
    audit_no_test_leakage,
    ensemble_combine,
    run_ablation,
    run_channel_stage,
    run_video_stage,
)

__all__ = [name for name in dir() if not name.startswith("_")]
