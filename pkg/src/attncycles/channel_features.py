"""Channel-level representations.

Three groups: 13 platform statistics, per-feature averages of the owned
videos' feature vectors, and 9 aggregates of the video-level classifier's
prediction distributions.
"""
from __future__ import annotations

from datetime import timedelta
from typing import Sequence

import numpy as np

from .matrix import FeatureMatrix
from .types import ChannelRecord
from .video_features import safediv

#: Ordinal class-name order used by prediction aggregates.
CLASS_NAMES = ("low", "mixed", "high")

STATS_FEATURE_NAMES = [
    "stats.subscribers",
    "stats.views.hourly",
    "stats.views.daily",
    "stats.views.weekly",
    "stats.comments.hourly",
    "stats.comments.daily",
    "stats.comments.weekly",
    "stats.videos.count",
    "stats.videos.hourly",
    "stats.videos.daily",
    "stats.videos.weekly",
    "stats.videos.per_subscriber",
    "stats.views.gini",
]

AGG_FEATURE_NAMES = [
    f"agg.{kind}.{cls}" for kind in ("max", "mean", "share") for cls in CLASS_NAMES
]

OBSERVATION_TAIL = timedelta(days=7)
MIN_SPAN = timedelta(days=7)


def gini(values) -> float:
    """Concentration index in [0, 1) of non-negative values.

    Computed from the sorted values as 2*sum(k*x_k)/(n*sum(x)) - (n+1)/n;
    an all-zero input yields 0.
    """
    x = np.sort(np.asarray(values, dtype=np.float64))
    if x.size == 0:
        raise ValueError("gini of empty input")
    if np.any(x < 0):
        raise ValueError("gini requires non-negative values")
    total = x.sum()
    if total == 0:
        return 0.0
    n = x.size
    ranks = np.arange(1, n + 1, dtype=np.float64)
    return float(2.0 * np.sum(ranks * x) / (n * total) - (n + 1) / n)


def channel_observation_span(channel: ChannelRecord) -> timedelta:
    """First publication to last publication plus the 7-day tail, floored
    at 7 days so rate features stay well-defined for burst channels."""
    published = [v.published_at for v in channel.videos]
    span = max(published) + OBSERVATION_TAIL - min(published)
    return max(span, MIN_SPAN)


def channel_statistics(channel: ChannelRecord) -> np.ndarray:
    """The 13 platform statistics, in STATS_FEATURE_NAMES order."""
    if not channel.videos:
        raise ValueError(f"channel {channel.channel_id} has no videos")
    span_hours = channel_observation_span(channel).total_seconds() / 3600.0
    span_days = span_hours / 24.0
    span_weeks = span_days / 7.0

    final_views = np.array([v.series["views"].total for v in channel.videos])
    final_comments = np.array([v.series["comments"].total for v in channel.videos])
    total_views = final_views.sum()
    total_comments = final_comments.sum()
    n_videos = len(channel.videos)

    return np.array(
        [
            channel.subscriber_count,
            total_views / span_hours,
            total_views / span_days,
            total_views / span_weeks,
            total_comments / span_hours,
            total_comments / span_days,
            total_comments / span_weeks,
            n_videos,
            n_videos / span_hours,
            n_videos / span_days,
            n_videos / span_weeks,
            float(safediv(n_videos, channel.subscriber_count)),
            gini(final_views),
        ],
        dtype=np.float64,
    )


def average_video_features(video_matrix: FeatureMatrix) -> np.ndarray:
    """Arithmetic mean of each feature over the matrix rows."""
    if video_matrix.shape[0] == 0:
        raise ValueError("cannot average an empty feature matrix")
    return video_matrix.values.mean(axis=0)


def aggregate_predictions(distributions: np.ndarray) -> np.ndarray:
    """9 features from per-video (n, 3) prediction distributions:
    per-class max, per-class mean, and the share of videos whose argmax
    (ties toward the lower ordinal class) lands on each class."""
    probs = np.asarray(distributions, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[1] != len(CLASS_NAMES):
        raise ValueError(f"expected (n, 3) distributions, got {probs.shape}")
    if probs.shape[0] == 0:
        raise ValueError("no distributions to aggregate")
    sums = probs.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-9):
        raise ValueError("distributions must sum to 1")
    winners = np.argmax(probs, axis=1)
    shares = np.bincount(winners, minlength=len(CLASS_NAMES)) / probs.shape[0]
    return np.concatenate([probs.max(axis=0), probs.mean(axis=0), shares])


def channel_feature_groups(
    channels: Sequence[ChannelRecord],
    video_matrix: FeatureMatrix = None,
    distributions_by_video: dict = None,
    avg_prefix: str = "avg.",
) -> dict:
    """Build the per-group channel matrices available from the inputs.

    Always includes ``stats``; adds ``avg`` when a video feature matrix is
    given and ``agg_pred`` when per-video prediction distributions are
    given. Keys of ``distributions_by_video`` are video ids.
    """
    ids = [c.channel_id for c in channels]
    groups = {}

    stats = np.stack([channel_statistics(c) for c in channels])
    groups["stats"] = FeatureMatrix(ids, STATS_FEATURE_NAMES, stats)

    if video_matrix is not None:
        rows = []
        for channel in channels:
            sub = video_matrix.select_rows([v.video_id for v in channel.videos])
            rows.append(average_video_features(sub))
        names = [avg_prefix + n for n in video_matrix.names]
        groups["avg"] = FeatureMatrix(ids, names, np.stack(rows))

    if distributions_by_video is not None:
        rows = []
        for channel in channels:
            probs = np.stack([distributions_by_video[v.video_id] for v in channel.videos])
            rows.append(aggregate_predictions(probs))
        groups["agg_pred"] = FeatureMatrix(ids, AGG_FEATURE_NAMES, np.stack(rows))

    return groups
