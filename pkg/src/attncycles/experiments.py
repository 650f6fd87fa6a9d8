"""Two-stage experiment orchestration.

A video-stage run fits a classifier on distant-labeled videos of the
training channels (feature selection and oversampling are fitted there
too) and emits a prediction distribution for every video in the corpus.
A channel-stage run assembles per-channel features from the requested
groups, optionally consuming the video-stage distributions, and evaluates
on the held-out test channels.

Every fitting step records the channel ids that influenced it; the
leakage audit refuses any run where a non-training channel slipped into
selection, oversampling, or model fitting.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from . import learners
from .channel_features import (
    AGG_FEATURE_NAMES,
    STATS_FEATURE_NAMES,
    aggregate_predictions,
    channel_statistics,
)
from .matrix import FeatureMatrix
from .metrics import EvaluationReport, evaluate, majority_baseline
from .selection import SelectionReport, select_top_union
from .types import ACTIONS, ChannelRecord, DatasetSplit
from .video_features import (
    AttentionConfig,
    extract_attention_matrix,
    extract_text_matrix,
)

log = logging.getLogger(__name__)

VIDEO_FEATURE_BLOCKS = ("text", "attention")
CHANNEL_FEATURE_GROUPS = (
    "text_avg",
    "text_agg_pred",
    "attention_avg",
    "attention_stats",
    "attention_agg_pred",
)


class LeakageError(RuntimeError):
    """A non-training channel influenced a fitted artifact."""


@dataclass
class ExperimentSpec:
    """Fully determines one run given the corpus and the split."""

    stage: str = "video"
    features: tuple = ("attention",)
    learner: str = "gbdt"
    learner_params: dict = field(default_factory=dict)
    smote: bool = True
    smote_k: int = 5
    selection_k: int = 100
    oof_folds: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        self.features = tuple(self.features)
        if self.stage not in ("video", "channel"):
            raise ValueError(f"unknown stage: {self.stage!r}")
        allowed = VIDEO_FEATURE_BLOCKS if self.stage == "video" else CHANNEL_FEATURE_GROUPS
        unknown = [f for f in self.features if f not in allowed]
        if unknown or not self.features:
            raise ValueError(
                f"invalid feature groups for {self.stage} stage: {self.features}"
            )
        if self.learner not in learners.LEARNER_KINDS:
            raise ValueError(f"unknown learner kind: {self.learner!r}")

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "features": list(self.features),
            "learner": self.learner,
            "learner_params": dict(self.learner_params),
            "smote": self.smote,
            "smote_k": self.smote_k,
            "selection_k": self.selection_k,
            "oof_folds": self.oof_folds,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        known = {f.name for f in cls.__dataclass_fields__.values()}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown experiment spec keys: {sorted(unknown)}")
        return cls(**data)


# ---------------------------------------------------------------------------
# Corpus-wide feature assembly.
# ---------------------------------------------------------------------------


@dataclass
class VideoFeatureBundle:
    """Extracted per-video matrices plus label/ownership alignment."""

    attention: FeatureMatrix
    text: Optional[FeatureMatrix]
    ids: list
    labels: np.ndarray
    channel_of: dict

    def labels_for(self, ids: Sequence[str]) -> np.ndarray:
        index = {vid: i for i, vid in enumerate(self.ids)}
        return self.labels[[index[v] for v in ids]]


def assemble_video_features(
    channels: Sequence[ChannelRecord],
    config: AttentionConfig = AttentionConfig(),
    jobs: int = 1,
) -> VideoFeatureBundle:
    videos = [v for c in channels for v in c.videos]
    if not videos:
        raise ValueError("corpus has no videos")
    missing = [v.video_id for v in videos if v.distant_label is None]
    if missing:
        raise ValueError(f"videos without distant labels: {missing[:5]}")
    attention = extract_attention_matrix(videos, config, jobs=jobs)
    text = extract_text_matrix(videos) if all(v.has_embeddings for v in videos) else None
    return VideoFeatureBundle(
        attention=attention,
        text=text,
        ids=[v.video_id for v in videos],
        labels=np.array([int(v.distant_label) for v in videos], dtype=np.int64),
        channel_of={v.video_id: v.channel_id for v in videos},
    )


def channel_labels(channels: Sequence[ChannelRecord]) -> dict:
    return {c.channel_id: int(c.label) for c in channels}


# ---------------------------------------------------------------------------
# Video stage.
# ---------------------------------------------------------------------------


@dataclass
class VideoStageResult:
    spec: ExperimentSpec
    report: EvaluationReport
    distributions: dict  # video_id -> (3,) probabilities, for ALL videos
    model: learners.TrainedModel
    selection: Optional[SelectionReport]
    provenance: dict  # fitted-artifact name -> frozenset of channel ids
    feature_names: list


def _part_video_ids(bundle: VideoFeatureBundle, channel_ids) -> list:
    wanted = set(channel_ids)
    return [vid for vid in bundle.ids if bundle.channel_of[vid] in wanted]


def run_video_stage(
    channels: Sequence[ChannelRecord],
    split: DatasetSplit,
    spec: ExperimentSpec,
    bundle: Optional[VideoFeatureBundle] = None,
    config: AttentionConfig = AttentionConfig(),
) -> VideoStageResult:
    if spec.stage != "video":
        raise ValueError("spec is not a video-stage spec")
    if bundle is None:
        bundle = assemble_video_features(channels, config)
    split.validate(all_channel_ids=[c.channel_id for c in channels])

    train_ids = _part_video_ids(bundle, split.train)
    test_ids = _part_video_ids(bundle, split.test)
    channels_of = lambda ids: frozenset(bundle.channel_of[v] for v in ids)
    provenance: Dict[str, frozenset] = {}

    blocks = []
    selection_report = None
    if "text" in spec.features:
        if bundle.text is None:
            raise ValueError("text features requested but the corpus has no embeddings")
        blocks.append(bundle.text)
    if "attention" in spec.features:
        train_matrix = bundle.attention.select_rows(train_ids)
        selection_report = select_top_union(
            train_matrix, bundle.labels_for(train_ids), spec.selection_k
        )
        provenance["video_selection"] = channels_of(train_ids)
        blocks.append(bundle.attention.select_columns(selection_report.selected))
        log.info("selected %d attention features", len(selection_report.selected))
    X = FeatureMatrix.hstack(blocks)

    ytr = bundle.labels_for(train_ids)
    values, labels_tr = X.select_rows(train_ids).values, ytr
    if spec.smote:
        values, labels_tr = learners.smote_oversample(
            values, labels_tr, k_neighbors=_safe_smote_k(spec.smote_k, ytr), seed=spec.seed
        )
        provenance["video_smote"] = channels_of(train_ids)
    model = learners.train(
        spec.learner, values, labels_tr, X.names, spec.learner_params, n_classes=3
    )
    provenance["video_fit"] = channels_of(train_ids)
    probs = model.predict_proba(X)

    if spec.oof_folds > 1:
        probs = _replace_with_oof(probs, X, bundle, split, spec, train_ids)

    id_index = {vid: i for i, vid in enumerate(X.ids)}
    distributions = {vid: probs[id_index[vid]] for vid in X.ids}
    y_test = bundle.labels_for(test_ids)
    pred_test = np.array([int(np.argmax(distributions[v])) for v in test_ids])
    report = evaluate(
        y_test,
        pred_test,
        split_sizes={"train": len(train_ids), "dev": len(_part_video_ids(bundle, split.dev)),
                     "test": len(test_ids)},
    )
    return VideoStageResult(
        spec=spec,
        report=report,
        distributions=distributions,
        model=model,
        selection=selection_report,
        provenance=provenance,
        feature_names=list(X.names),
    )


def _safe_smote_k(k: int, y: np.ndarray) -> int:
    counts = np.bincount(y, minlength=1)
    smallest = counts[counts > 0].min()
    return max(1, min(k, int(smallest) - 1))


def _replace_with_oof(probs, X, bundle, split, spec, train_ids):
    """Out-of-fold predictions for training videos: the train channels are
    folded, a model refit without each fold predicts that fold's videos.
    Selection stays as fitted on the full training split."""
    probs = probs.copy()
    rng = np.random.default_rng(spec.seed)
    fold_channels = sorted(split.train)
    rng.shuffle(fold_channels)
    folds = np.array_split(np.array(fold_channels, dtype=object), spec.oof_folds)
    index = {vid: i for i, vid in enumerate(X.ids)}
    for fold in folds:
        fold_set = set(fold.tolist())
        inner_train = [v for v in train_ids if bundle.channel_of[v] not in fold_set]
        fold_videos = [v for v in train_ids if bundle.channel_of[v] in fold_set]
        if not inner_train or not fold_videos:
            continue
        Xtr = X.select_rows(inner_train)
        ytr = bundle.labels_for(inner_train)
        values, labels = Xtr.values, ytr
        if spec.smote and np.unique(ytr).size > 1:
            values, labels = learners.smote_oversample(
                values, labels, k_neighbors=_safe_smote_k(spec.smote_k, ytr), seed=spec.seed
            )
        model = learners.train(
            spec.learner, values, labels, X.names, spec.learner_params, n_classes=3
        )
        fold_probs = model.predict_proba(X.select_rows(fold_videos))
        for vid, row in zip(fold_videos, fold_probs):
            probs[index[vid]] = row
    return probs


# ---------------------------------------------------------------------------
# Channel stage.
# ---------------------------------------------------------------------------


@dataclass
class ChannelStageResult:
    spec: ExperimentSpec
    report: EvaluationReport
    distributions: dict  # channel_id -> (3,) probabilities, ALL channels
    model: learners.TrainedModel
    provenance: dict
    feature_names: list

    @property
    def dim(self) -> int:
        return len(self.feature_names)


def _avg_matrix(channels, matrix: FeatureMatrix, prefix: str) -> FeatureMatrix:
    rows = []
    for channel in channels:
        sub = matrix.select_rows([v.video_id for v in channel.videos])
        rows.append(sub.values.mean(axis=0))
    return FeatureMatrix(
        [c.channel_id for c in channels],
        [prefix + n for n in matrix.names],
        np.stack(rows),
    )


def _agg_pred_matrix(channels, distributions: dict, source: str) -> FeatureMatrix:
    rows = []
    for channel in channels:
        probs = np.stack([distributions[v.video_id] for v in channel.videos])
        rows.append(aggregate_predictions(probs))
    names = [n.replace("agg.", f"agg.{source}.", 1) for n in AGG_FEATURE_NAMES]
    return FeatureMatrix([c.channel_id for c in channels], names, np.stack(rows))


def build_channel_matrix(
    channels: Sequence[ChannelRecord],
    groups: Sequence[str],
    bundle: Optional[VideoFeatureBundle] = None,
    selected_names: Optional[Sequence[str]] = None,
    video_results: Optional[dict] = None,
) -> FeatureMatrix:
    """Concatenate the requested channel feature groups, in given order."""
    video_results = video_results or {}
    parts = []
    for group in groups:
        if group == "attention_stats":
            stats = np.stack([channel_statistics(c) for c in channels])
            parts.append(
                FeatureMatrix([c.channel_id for c in channels], STATS_FEATURE_NAMES, stats)
            )
        elif group == "text_avg":
            if bundle is None or bundle.text is None:
                raise ValueError("text_avg requires a corpus with embeddings")
            parts.append(_avg_matrix(channels, bundle.text, "avg."))
        elif group == "attention_avg":
            if bundle is None:
                raise ValueError("attention_avg requires extracted video features")
            if selected_names is None:
                raise ValueError("attention_avg requires a fitted selection")
            matrix = bundle.attention.select_columns(list(selected_names))
            parts.append(_avg_matrix(channels, matrix, "avg."))
        elif group in ("text_agg_pred", "attention_agg_pred"):
            source = group.split("_")[0]
            result = video_results.get(source)
            if result is None:
                raise ValueError(
                    f"{group} requires upstream {source} video-stage distributions"
                )
            parts.append(_agg_pred_matrix(channels, result.distributions, source))
        else:
            raise ValueError(f"unknown channel feature group: {group!r}")
    return FeatureMatrix.hstack(parts)


def run_channel_stage(
    channels: Sequence[ChannelRecord],
    split: DatasetSplit,
    spec: ExperimentSpec,
    video_results: Optional[dict] = None,
    bundle: Optional[VideoFeatureBundle] = None,
    config: AttentionConfig = AttentionConfig(),
) -> ChannelStageResult:
    if spec.stage != "channel":
        raise ValueError("spec is not a channel-stage spec")
    video_results = video_results or {}
    needs_bundle = any(g in ("text_avg", "attention_avg") for g in spec.features)
    if bundle is None and needs_bundle:
        bundle = assemble_video_features(channels, config)
    split.validate(all_channel_ids=[c.channel_id for c in channels])

    selected = None
    if "attention_avg" in spec.features:
        att = video_results.get("attention")
        if att is None or att.selection is None:
            raise ValueError("attention_avg requires an attention video-stage run")
        selected = att.selection.selected

    X = build_channel_matrix(channels, spec.features, bundle, selected, video_results)
    labels = channel_labels(channels)
    y = np.array([labels[cid] for cid in X.ids], dtype=np.int64)

    # Fold the upstream fitted artifacts into this run's provenance so the
    # leakage audit sees the whole chain.
    provenance: Dict[str, frozenset] = {}
    uses_upstream = {
        "attention": ("attention_avg" in spec.features
                      or "attention_agg_pred" in spec.features),
        "text": "text_agg_pred" in spec.features,
    }
    for source, used in uses_upstream.items():
        upstream = video_results.get(source)
        if used and upstream is not None:
            for key, ids in upstream.provenance.items():
                provenance[f"{source}.{key}"] = ids

    train_ids = [cid for cid in X.ids if cid in set(split.train)]
    test_ids = [cid for cid in X.ids if cid in set(split.test)]
    index = {cid: i for i, cid in enumerate(X.ids)}

    Xtr = X.select_rows(train_ids)
    ytr = y[[index[c] for c in train_ids]]
    values, labels_tr = Xtr.values, ytr
    if spec.smote:
        values, labels_tr = learners.smote_oversample(
            values, labels_tr, k_neighbors=_safe_smote_k(spec.smote_k, ytr), seed=spec.seed
        )
        provenance["channel_smote"] = frozenset(train_ids)
    model = learners.train(
        spec.learner, values, labels_tr, X.names, spec.learner_params, n_classes=3
    )
    provenance["channel_fit"] = frozenset(train_ids)

    probs = model.predict_proba(X)
    distributions = {cid: probs[index[cid]] for cid in X.ids}
    y_test = y[[index[c] for c in test_ids]]
    pred_test = np.array([int(np.argmax(distributions[c])) for c in test_ids])
    report = evaluate(
        y_test,
        pred_test,
        split_sizes={"train": len(train_ids), "dev": len(split.dev), "test": len(test_ids)},
    )
    return ChannelStageResult(
        spec=spec,
        report=report,
        distributions=distributions,
        model=model,
        provenance=provenance,
        feature_names=list(X.names),
    )


# ---------------------------------------------------------------------------
# Leakage audit.
# ---------------------------------------------------------------------------


def audit_no_test_leakage(provenance: dict, split: DatasetSplit) -> None:
    """Raise LeakageError unless every fitted artifact saw training
    channels only."""
    train = set(split.train)
    for artifact, channel_ids in sorted(provenance.items()):
        outside = set(channel_ids) - train
        if outside:
            raise LeakageError(
                f"{artifact} was influenced by non-training channel(s): "
                f"{sorted(outside)[:5]}"
            )


# ---------------------------------------------------------------------------
# Ensembles.
# ---------------------------------------------------------------------------

ENSEMBLE_MODES = ("mean", "max", "min")


def ensemble_combine(distributions, mode: str) -> np.ndarray:
    """Combine one item's distributions from several models into one,
    componentwise, renormalized to the simplex."""
    probs = np.asarray(distributions, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[0] == 0:
        raise ValueError("need at least one model distribution")
    if mode == "mean":
        combined = probs.mean(axis=0)
    elif mode == "max":
        combined = probs.max(axis=0)
    elif mode == "min":
        combined = probs.min(axis=0)
    else:
        raise ValueError(f"unknown ensemble mode: {mode!r}")
    total = combined.sum()
    if total <= 0:
        return np.full(probs.shape[1], 1.0 / probs.shape[1])
    return combined / total


def combine_prediction_maps(maps: Sequence[dict], mode: str) -> dict:
    """Apply ensemble_combine per item across several id -> (3,) maps."""
    if not maps:
        raise ValueError("no prediction maps to combine")
    ids = set(maps[0])
    for m in maps[1:]:
        if set(m) != ids:
            raise ValueError("prediction maps cover different items")
    return {
        item: ensemble_combine(np.stack([m[item] for m in maps]), mode)
        for item in maps[0]
    }


# ---------------------------------------------------------------------------
# Ablation grid.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AblationRow:
    """One ablation entry: which slices of the combined channel model to keep."""

    name: str
    actions: tuple = ()
    ratios: tuple = ()
    include_stats: bool = False
    include_agg: bool = False
    everything: bool = False


DEFAULT_ABLATION_GRID = (
    AblationRow("Views (V)", actions=("views",)),
    AblationRow("Dislikes (D)", actions=("dislikes",)),
    AblationRow("Comments (C)", actions=("comments",)),
    AblationRow("Likes (L)", actions=("likes",)),
    AblationRow("V + L + C", actions=("views", "likes", "comments")),
    AblationRow("V + L + D + C", actions=ACTIONS),
    AblationRow("Engagement", ratios=("engagement",)),
    AblationRow("Controversiality", ratios=("controversiality",)),
    AblationRow("Positive reactions", ratios=("positive",)),
    AblationRow("Controversiality + Engagement", ratios=("controversiality", "engagement")),
    AblationRow("Controversiality + Positive", ratios=("controversiality", "positive")),
    AblationRow("Positive + Engagement", ratios=("positive", "engagement")),
    AblationRow("Channel statistics", include_stats=True),
    AblationRow("Aggregated predictions", include_agg=True),
    AblationRow("All", everything=True),
)


def _row_feature_filter(row: AblationRow, names: Sequence[str]) -> list:
    """Subset of a combined channel dictionary matching the ablation row."""
    if row.everything:
        return list(names)
    keep = []
    action_prefixes = tuple(f"avg.{a}." for a in row.actions)
    ratio_prefixes = tuple(f"avg.ratio.{r}." for r in row.ratios)
    for name in names:
        if action_prefixes and name.startswith(action_prefixes):
            keep.append(name)
        elif ratio_prefixes and name.startswith(ratio_prefixes):
            keep.append(name)
        elif row.include_stats and name.startswith("stats."):
            keep.append(name)
        elif row.include_agg and name.startswith("agg."):
            keep.append(name)
    return keep


def run_ablation(
    channels: Sequence[ChannelRecord],
    split: DatasetSplit,
    base_spec: ExperimentSpec,
    video_results: dict,
    bundle: VideoFeatureBundle,
    grid: Sequence[AblationRow] = DEFAULT_ABLATION_GRID,
) -> list:
    """Evaluate every grid row against the combined attention channel model.

    Returns [(row, dim, EvaluationReport)] plus implicitly comparable
    majority-baseline numbers via :func:`metrics.majority_baseline`.
    """
    if not grid:
        raise ValueError("empty ablation grid")
    att = video_results.get("attention")
    if att is None or att.selection is None:
        raise ValueError("ablation requires an attention video-stage run")

    full = build_channel_matrix(
        channels,
        ("attention_avg", "attention_stats", "attention_agg_pred"),
        bundle,
        att.selection.selected,
        video_results,
    )
    labels = channel_labels(channels)
    y = np.array([labels[cid] for cid in full.ids], dtype=np.int64)
    index = {cid: i for i, cid in enumerate(full.ids)}
    train_ids = [cid for cid in full.ids if cid in set(split.train)]
    test_ids = [cid for cid in full.ids if cid in set(split.test)]

    results = []
    for row in grid:
        names = _row_feature_filter(row, full.names)
        if not names:
            raise ValueError(f"ablation row {row.name!r} selects no features")
        X = full.select_columns(names)
        ytr = y[[index[c] for c in train_ids]]
        values, labels_tr = X.select_rows(train_ids).values, ytr
        if base_spec.smote:
            values, labels_tr = learners.smote_oversample(
                values, labels_tr,
                k_neighbors=_safe_smote_k(base_spec.smote_k, ytr),
                seed=base_spec.seed,
            )
        model = learners.train(
            base_spec.learner, values, labels_tr, X.names,
            base_spec.learner_params, n_classes=3,
        )
        pred = model.predict(X.select_rows(test_ids))
        report = evaluate(y[[index[c] for c in test_ids]], pred,
                          split_sizes={"train": len(train_ids), "test": len(test_ids)})
        results.append((row, len(names), report))
    return results


# ---------------------------------------------------------------------------
# Report rendering.
# ---------------------------------------------------------------------------


def format_experiment_table(rows: Sequence[dict], title: str = "") -> str:
    """Aligned text table; each row dict carries index, name, dim, and an
    EvaluationReport (or plain metric fields)."""
    header = f"{'#':>3}  {'Experiment':<42} {'Dim':>6} {'Acc.':>7} {'Bal.Acc.':>9} {'MAE':>7}"
    lines = [title, header, "-" * len(header)] if title else [header, "-" * len(header)]
    for row in rows:
        report = row.get("report")
        if isinstance(report, EvaluationReport):
            acc, bal, err = report.accuracy, report.balanced_accuracy, report.mae
        else:
            acc, bal, err = row["accuracy"], row.get("balanced_accuracy"), row["mae"]
        dim = row.get("dim")
        bal_text = f"{100 * bal:9.2f}" if bal is not None else " " * 9
        lines.append(
            f"{row.get('index', ''):>3}  {row['name']:<42} "
            f"{dim if dim is not None else '-':>6} {100 * acc:7.2f} {bal_text} {err:7.4f}"
        )
    return "\n".join(lines) + "\n"


def baseline_row(train_labels, eval_labels, name: str = "Majority class") -> dict:
    report = majority_baseline(train_labels, eval_labels)
    return {"index": 0, "name": name, "dim": None, "report": report}
