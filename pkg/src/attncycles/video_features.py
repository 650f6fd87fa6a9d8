"""Video-level attention-cycle features.

Every feature is derived from the four hourly cumulative series of one
video. Feature families, with the compact codes used in the wire names:

* ``D``   daily share: fraction of the weekly total arriving on each day.
* ``DC``  daily cumulative share by the end of each day.
* ``DI``  day-over-day increase of the daily cumulative count.
* ``HI``  hourly increase: hour increment relative to the cumulative count
          one hour earlier.
* ``AHI`` per-day average of ``HI`` (day 1 averages its 23 available terms).
* ``MI``  minimal window length (hours) capturing a given share of the
          weekly total (shares 0.5 / 0.7 / 0.9).
* ``PDI`` earliest hour with the largest single-hour increment.
* ``AI``  last hour with any activity.
* ``PS``  largest single-hour increment as a fraction of the weekly total.
* ``period.*`` the same share / increase / average-increase ideas applied
          to six configurable sub-periods of the first day.
* ``ratio.*`` reaction ratios (likes/views, dislikes/views, comments/views,
          likes/(likes+dislikes)) tracked daily, cumulatively through day 6,
          and per first-day period.

All divisions use :func:`safediv`, which maps a zero denominator to 0 so
degenerate videos produce inert (all-zero) features instead of infinities.

Per action there are 27 + 167 + 6 + 18 = 218 features; with four actions
and 4 x 19 ratio features the full dictionary holds 948 names.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .matrix import FeatureMatrix, FeatureVector
from .types import ACTIONS, HOURS_PER_WEEK, VideoObservation

log = logging.getLogger(__name__)

MI_THRESHOLDS = (0.5, 0.7, 0.9)

#: (numerator action, denominator actions) per reaction ratio, in dictionary order.
RATIO_DEFS = (
    ("positive", "likes", ("views",)),
    ("negative", "dislikes", ("views",)),
    ("engagement", "comments", ("views",)),
    ("controversiality", "likes", ("likes", "dislikes")),
)

PER_ACTION_FEATURES = 218
RATIO_FEATURES = 19 * len(RATIO_DEFS)
ATTENTION_FEATURES = len(ACTIONS) * PER_ACTION_FEATURES + RATIO_FEATURES
TEXT_FEATURES = 2 * 768

_DAY_END_COLS = np.arange(23, HOURS_PER_WEEK, 24)  # hours 24, 48, ..., 168


def safediv(a, b):
    """Elementwise a/b with 0 wherever b == 0."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = np.zeros(np.broadcast(a, b).shape, dtype=np.float64)
    np.divide(a, b, out=out, where=(b != 0))
    return out


@dataclass(frozen=True)
class FirstDayPeriods:
    """Six half-open hour intervals ``(start, end]`` partitioning (0, 24]."""

    bounds: tuple = ((0, 1), (1, 3), (3, 6), (6, 12), (12, 18), (18, 24))

    def __post_init__(self) -> None:
        if len(self.bounds) != 6:
            raise ValueError("expected exactly six periods")
        prev_end = 0
        for start, end in self.bounds:
            if start != prev_end or end <= start:
                raise ValueError(f"periods must be ordered and contiguous: {self.bounds}")
            prev_end = end
        if prev_end != 24:
            raise ValueError("periods must cover (0, 24]")


@dataclass(frozen=True)
class AttentionConfig:
    """Knobs for the extraction; defaults match the documented dictionary."""

    periods: FirstDayPeriods = field(default_factory=FirstDayPeriods)
    #: When true, hour 1 is eligible for the peak-hour features (PDI / PS).
    include_first_hour: bool = False


# ---------------------------------------------------------------------------
# Feature families. Each takes (..., 168) cumulative series and vectorizes
# over leading axes; single-series callers get a 1D result back.
# ---------------------------------------------------------------------------


def _as_batch(values) -> tuple:
    arr = np.asarray(values, dtype=np.float64)
    single = arr.ndim == 1
    return np.atleast_2d(arr), single


def hourly_increases(values) -> np.ndarray:
    """HI for hours 2..168: hour increment over the prior cumulative count."""
    arr, single = _as_batch(values)
    out = safediv(arr[:, 1:] - arr[:, :-1], arr[:, :-1])
    return out[0] if single else out


def daily_block(values) -> np.ndarray:
    """27 features per series: D (7), DC (7), DI (6), AHI (7)."""
    arr, single = _as_batch(values)
    day = arr[:, _DAY_END_COLS]  # (n, 7) cumulative by end of each day
    total = day[:, -1:]
    prev = np.concatenate([np.zeros_like(total), day[:, :-1]], axis=1)
    d_share = safediv(day - prev, total)
    dc_share = safediv(day, total)
    di = safediv(day[:, 1:] - day[:, :-1], day[:, :-1])

    hi = hourly_increases(arr)  # (n, 167), column j-2 holds hour j
    ahi = np.empty((arr.shape[0], 7))
    ahi[:, 0] = hi[:, 0:23].mean(axis=1)  # day 1: hours 2..24, 23 terms
    for i in range(2, 8):
        lo = (i - 1) * 24 + 1  # first hour of day i
        ahi[:, i - 1] = hi[:, lo - 2 : lo + 22].mean(axis=1)

    out = np.concatenate([d_share, dc_share, di, ahi], axis=1)
    return out[0] if single else out


def shape_features(values, config: AttentionConfig = AttentionConfig()) -> np.ndarray:
    """6 features per series: MI at the three shares, PDI, AI, PS."""
    arr, single = _as_batch(values)
    first_hour = 1 if config.include_first_hour else 2
    out = _kernels.shape_scan(arr, np.asarray(MI_THRESHOLDS), first_hour)
    return out[0] if single else out


def _period_increments(arr: np.ndarray, periods: FirstDayPeriods) -> np.ndarray:
    """(n, 6) count increments inside each first-day period."""
    cols = np.empty((arr.shape[0], 6))
    for p, (start, end) in enumerate(periods.bounds):
        left = arr[:, start - 1] if start >= 1 else 0.0
        cols[:, p] = arr[:, end - 1] - left
    return cols


def first_day_block(values, periods: FirstDayPeriods = FirstDayPeriods()) -> np.ndarray:
    """18 features per series: per-period share, increase, average HI."""
    arr, single = _as_batch(values)
    total = arr[:, -1:]
    inc = _period_increments(arr, periods)

    share = safediv(inc, total)
    prev = np.concatenate([np.zeros((arr.shape[0], 1)), inc[:, :-1]], axis=1)
    increase = safediv(inc, prev)

    hi = hourly_increases(arr)
    avg_hi = np.empty_like(inc)
    for p, (start, end) in enumerate(periods.bounds):
        # Hours start+1..end carry this period's HI terms; hour 1 has no HI,
        # so the all-first-hour period falls back to the hour-2 term.
        lo = max(start + 1, 2)
        hi_end = max(end, 2)
        avg_hi[:, p] = hi[:, lo - 2 : hi_end - 1].mean(axis=1)

    out = np.concatenate([share, increase, avg_hi], axis=1)
    return out[0] if single else out


def ratio_block(stacked, periods: FirstDayPeriods = FirstDayPeriods()) -> np.ndarray:
    """76 features from the four reaction ratios of one video.

    ``stacked`` is (..., 4, 168) in canonical action order. Per ratio: 7
    daily values on day increments, 6 cumulative values through day 6, and
    6 first-day-period values on period increments.
    """
    arr = np.asarray(stacked, dtype=np.float64)
    single = arr.ndim == 2
    arr = arr.reshape((-1, len(ACTIONS), HOURS_PER_WEEK))
    n = arr.shape[0]

    day = arr[:, :, _DAY_END_COLS]  # (n, 4, 7)
    day_prev = np.concatenate([np.zeros((n, len(ACTIONS), 1)), day[:, :, :-1]], axis=2)
    day_inc = day - day_prev
    period_inc = np.stack(
        [_period_increments(arr[:, a], periods) for a in range(len(ACTIONS))], axis=1
    )  # (n, 4, 6)

    idx = {a: i for i, a in enumerate(ACTIONS)}
    parts = []
    for _name, num, den in RATIO_DEFS:
        num_i = idx[num]
        den_i = [idx[d] for d in den]
        parts.append(safediv(day_inc[:, num_i], day_inc[:, den_i].sum(axis=1)))
        parts.append(safediv(day[:, num_i, :6], day[:, den_i, :6].sum(axis=1)))
        parts.append(safediv(period_inc[:, num_i], period_inc[:, den_i].sum(axis=1)))
    out = np.concatenate(parts, axis=1)
    return out[0] if single else out


# ---------------------------------------------------------------------------
# Dictionary and full-vector assembly.
# ---------------------------------------------------------------------------


def per_action_feature_names(action: str, periods: FirstDayPeriods) -> list:
    names = []
    names += [f"{action}.D.d{i}" for i in range(1, 8)]
    names += [f"{action}.DC.d{i}" for i in range(1, 8)]
    names += [f"{action}.DI.d{i}" for i in range(2, 8)]
    names += [f"{action}.AHI.d{i}" for i in range(1, 8)]
    names += [f"{action}.HI.h{j}" for j in range(2, HOURS_PER_WEEK + 1)]
    names += [f"{action}.MI.{t}" for t in MI_THRESHOLDS]
    names += [f"{action}.PDI", f"{action}.AI", f"{action}.PS"]
    n_periods = len(periods.bounds)
    names += [f"{action}.period.share.p{p}" for p in range(1, n_periods + 1)]
    names += [f"{action}.period.increase.p{p}" for p in range(1, n_periods + 1)]
    names += [f"{action}.period.AHI.p{p}" for p in range(1, n_periods + 1)]
    return names


def attention_feature_names(config: AttentionConfig = AttentionConfig()) -> list:
    """The frozen, ordered attention feature dictionary (948 names)."""
    names = []
    for action in ACTIONS:
        names += per_action_feature_names(action, config.periods)
    for ratio_name, _num, _den in RATIO_DEFS:
        names += [f"ratio.{ratio_name}.daily.d{i}" for i in range(1, 8)]
        names += [f"ratio.{ratio_name}.cum.d{i}" for i in range(1, 7)]
        names += [f"ratio.{ratio_name}.period.p{p}" for p in range(1, len(config.periods.bounds) + 1)]
    return names


def text_feature_names() -> list:
    return [f"text.title.{k}" for k in range(768)] + [f"text.desc.{k}" for k in range(768)]


def _attention_values(stacked: np.ndarray, config: AttentionConfig) -> np.ndarray:
    """(n, 948) attention features from (n, 4, 168) stacked series."""
    n = stacked.shape[0]
    blocks = []
    for a in range(len(ACTIONS)):
        series = stacked[:, a]
        blocks.append(daily_block(series))
        blocks.append(hourly_increases(series))
        blocks.append(shape_features(series, config))
        blocks.append(first_day_block(series, config.periods))
    blocks.append(ratio_block(stacked, config.periods))
    out = np.concatenate(blocks, axis=1)
    assert out.shape == (n, ATTENTION_FEATURES)
    return out


def extract_video_attention_vector(
    video: VideoObservation, config: AttentionConfig = AttentionConfig()
) -> FeatureVector:
    """All 948 attention features of one video, in dictionary order."""
    stacked = video.stacked_series()[None, :, :]
    values = _attention_values(stacked, config)[0]
    return FeatureVector(tuple(attention_feature_names(config)), values)


def extract_video_full_vector(
    video: VideoObservation, config: AttentionConfig = AttentionConfig()
) -> FeatureVector:
    """Attention features plus the 1,536 text dimensions when present."""
    video.validate()  # rejects wrong-length embeddings before any work
    base = extract_video_attention_vector(video, config)
    if not video.has_embeddings:
        return base
    values = np.concatenate([base.values, video.title_embedding, video.description_embedding])
    return FeatureVector(tuple(list(base.names) + text_feature_names()), values)


def extract_attention_matrix(
    videos: Sequence[VideoObservation],
    config: AttentionConfig = AttentionConfig(),
    jobs: int = 1,
) -> FeatureMatrix:
    """Attention features for a whole corpus as one (n, 948) matrix."""
    names = attention_feature_names(config)
    log.debug(
        "attention dictionary: %d features (%d actions x %d + %d ratio)",
        len(names), len(ACTIONS), PER_ACTION_FEATURES, RATIO_FEATURES,
    )
    ids = [v.video_id for v in videos]
    if not videos:
        return FeatureMatrix([], names, np.zeros((0, len(names))))
    stacked = np.stack([v.stacked_series() for v in videos])
    if jobs > 1 and len(videos) >= 4 * jobs:
        from concurrent.futures import ThreadPoolExecutor

        chunks = np.array_split(np.arange(len(videos)), jobs)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda c: _attention_values(stacked[c], config), chunks))
        values = np.concatenate(parts, axis=0)
    else:
        values = _attention_values(stacked, config)
    return FeatureMatrix(ids, names, values)


def extract_text_matrix(videos: Sequence[VideoObservation]) -> FeatureMatrix:
    """(n, 1536) text-embedding matrix; every video must carry embeddings."""
    names = text_feature_names()
    rows = []
    for v in videos:
        if not v.has_embeddings:
            raise ValueError(f"video {v.video_id} has no text embeddings")
        v.validate()
        rows.append(np.concatenate([v.title_embedding, v.description_embedding]))
    values = np.array(rows, dtype=np.float64).reshape(len(rows), len(names))
    return FeatureMatrix([v.video_id for v in videos], names, values)
