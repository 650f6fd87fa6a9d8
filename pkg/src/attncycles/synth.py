"""Synthetic channel generator with class-conditional attention shapes.

Each label class gets a distinct generative profile: low-factuality
channels spike early and die fast (concentrated attention, divided
reactions), high-factuality channels accumulate attention smoothly with
overwhelmingly positive reactions. That makes the classes learnable from
the attention features while every generated series still satisfies the
ingest invariants, so the full pipeline can be exercised end to end
against a known ground truth.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Dict, Sequence

import numpy as np

from .ingest import assign_distant_labels
from .types import (
    ACTIONS,
    HOURS_PER_WEEK,
    ChannelRecord,
    FactualityLabel,
    HourlyCumulativeSeries,
    VideoObservation,
)

_EPOCH = datetime(2020, 2, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class SynthProfile:
    """Per-class generative knobs."""

    peak_hour_median: float  # lognormal median of the peak hour
    peak_hour_sigma: float
    decay: float  # per-hour geometric falloff of increments around the peak
    decay_jitter: float  # channel-level multiplicative jitter on (1 - decay)
    total_log_mean: float  # lognormal of per-video total views
    total_log_sigma: float
    reaction_rate: float  # likes+dislikes per view
    comment_rate: float
    like_share: float  # likes / (likes + dislikes)
    like_share_jitter: float
    subscribers_log_mean: float = 9.0

    def __post_init__(self) -> None:
        if not (0.0 < self.decay <= 1.0):
            raise ValueError("decay must be in (0, 1]")
        for rate in (self.reaction_rate, self.comment_rate):
            if rate < 0:
                raise ValueError("rates must be non-negative")
        if not (0.0 <= self.like_share <= 1.0):
            raise ValueError("like_share must be in [0, 1]")


DEFAULT_PROFILES: Dict[FactualityLabel, SynthProfile] = {
    FactualityLabel.LOW: SynthProfile(
        peak_hour_median=2.0, peak_hour_sigma=0.5,
        decay=0.55, decay_jitter=0.10,
        total_log_mean=8.0, total_log_sigma=0.6,
        reaction_rate=0.06, comment_rate=0.02,
        like_share=0.52, like_share_jitter=0.06,
        subscribers_log_mean=8.0,
    ),
    FactualityLabel.MIXED: SynthProfile(
        peak_hour_median=6.0, peak_hour_sigma=0.6,
        decay=0.80, decay_jitter=0.05,
        total_log_mean=8.5, total_log_sigma=0.6,
        reaction_rate=0.04, comment_rate=0.01,
        like_share=0.75, like_share_jitter=0.05,
        subscribers_log_mean=9.0,
    ),
    FactualityLabel.HIGH: SynthProfile(
        peak_hour_median=14.0, peak_hour_sigma=0.7,
        decay=0.94, decay_jitter=0.03,
        total_log_mean=9.0, total_log_sigma=0.6,
        reaction_rate=0.03, comment_rate=0.005,
        like_share=0.93, like_share_jitter=0.03,
        subscribers_log_mean=10.0,
    ),
}

MIN_VIDEOS = 20
MAX_VIDEOS = 100


def _video_series(rng: np.random.Generator, profile: SynthProfile, decay: float,
                  like_share: float) -> dict:
    total = max(int(rng.lognormal(profile.total_log_mean, profile.total_log_sigma)), 50)
    peak = int(np.clip(rng.lognormal(np.log(profile.peak_hour_median),
                                     profile.peak_hour_sigma), 1, HOURS_PER_WEEK))
    hours = np.arange(1, HOURS_PER_WEEK + 1)
    weights = decay ** np.abs(hours - peak)
    weights /= weights.sum()
    views_inc = rng.multinomial(total, weights)
    reactions = rng.binomial(views_inc, min(profile.reaction_rate, 1.0))
    likes_inc = rng.binomial(reactions, like_share)
    dislikes_inc = reactions - likes_inc
    comments_inc = rng.binomial(views_inc, min(profile.comment_rate, 1.0))
    increments = {
        "views": views_inc,
        "likes": likes_inc,
        "dislikes": dislikes_inc,
        "comments": comments_inc,
    }
    return {
        action: HourlyCumulativeSeries(action, np.cumsum(inc).astype(np.float64))
        for action, inc in increments.items()
    }


def generate_channel(
    label: FactualityLabel,
    profile: SynthProfile,
    n_videos: int,
    seed,
    channel_id: str = None,
) -> ChannelRecord:
    """One deterministic synthetic channel with ``n_videos`` videos."""
    if not (MIN_VIDEOS <= n_videos <= MAX_VIDEOS):
        raise ValueError(f"n_videos must be in [{MIN_VIDEOS}, {MAX_VIDEOS}], got {n_videos}")
    rng = np.random.default_rng(seed)
    if channel_id is None:
        channel_id = f"synth-{label.name.lower()}-{rng.integers(0, 10**9):09d}"

    # Channel-level random effects keep videos of one channel correlated.
    decay = float(np.clip(1.0 - (1.0 - profile.decay)
                          * rng.uniform(1 - profile.decay_jitter, 1 + profile.decay_jitter),
                          0.02, 0.995))
    like_share = float(np.clip(
        profile.like_share + rng.uniform(-profile.like_share_jitter,
                                         profile.like_share_jitter),
        0.02, 0.98,
    ))
    subscribers = int(rng.lognormal(profile.subscribers_log_mean, 0.8)) + 1

    publish_offsets = np.sort(rng.uniform(0, 150 * 24 * 60, size=n_videos))
    videos = []
    for k in range(n_videos):
        published = _EPOCH + timedelta(minutes=float(publish_offsets[k]))
        videos.append(
            VideoObservation(
                video_id=f"{channel_id}-v{k:03d}",
                channel_id=channel_id,
                published_at=published,
                series=_video_series(rng, profile, decay, like_share),
            )
        )
    channel = ChannelRecord(
        channel_id=channel_id,
        subscriber_count=subscribers,
        label=label,
        videos=videos,
    )
    channel.validate()
    return channel


def generate_dataset(
    class_sizes: Dict[FactualityLabel, int],
    profiles: Dict[FactualityLabel, SynthProfile] = None,
    seed: int = 0,
    videos_per_channel=(20, 40),
) -> list:
    """A labeled corpus ready for splitting; videos carry distant labels."""
    profiles = profiles or DEFAULT_PROFILES
    active = {label: n for label, n in class_sizes.items() if n > 0}
    if len(active) < 2 or any(n < 4 for n in active.values()):
        raise ValueError("need at least two classes with at least 4 channels each")
    lo, hi = videos_per_channel
    channels = []
    for label in sorted(active, key=int):
        class_seed = np.random.SeedSequence((seed, int(label)))
        children = class_seed.spawn(active[label])
        size_rng = np.random.default_rng(np.random.SeedSequence((seed, int(label), 997)))
        for idx, child in enumerate(children):
            n_videos = int(size_rng.integers(lo, hi + 1))
            channels.append(
                generate_channel(
                    label,
                    profiles[label],
                    n_videos,
                    child,
                    channel_id=f"synth-{label.name.lower()}-{idx:04d}",
                )
            )
    assign_distant_labels(channels)
    return channels


# ---------------------------------------------------------------------------
# Emission in the raw ingestion formats, so synthetic corpora exercise the
# real loaders end to end.
# ---------------------------------------------------------------------------


def write_corpus_files(channels: Sequence[ChannelRecord], snapshots_path, manifest_path,
                       cadence_minutes: int = 60) -> None:
    """Write a snapshot log and channel manifest for the given corpus.

    Snapshots are emitted at a fixed cadence on hour boundaries, so a
    last-observation-carried-forward reconstruction reproduces the
    original series exactly.
    """
    with open(Path(snapshots_path), "w", encoding="utf-8") as fh:
        for channel in channels:
            for video in channel.videos:
                stacked = {a: video.series[a].values for a in ACTIONS}
                for minute in range(cadence_minutes, 60 * HOURS_PER_WEEK + 1,
                                    cadence_minutes):
                    hour_idx = minute // 60 - 1
                    record = {"video_id": video.video_id, "observed_at": minute}
                    for action in ACTIONS:
                        record[action] = int(stacked[action][hour_idx])
                    fh.write(json.dumps(record, sort_keys=True))
                    fh.write("\n")

    raw_label = {
        FactualityLabel.LOW: "Low",
        FactualityLabel.MIXED: "Mixed",
        FactualityLabel.HIGH: "High",
    }
    with open(Path(manifest_path), "w", encoding="utf-8") as fh:
        for channel in channels:
            obj = {
                "channel_id": channel.channel_id,
                "subscriber_count": channel.subscriber_count,
                "raw_factuality": raw_label[channel.label],
                "videos": [
                    {
                        "video_id": v.video_id,
                        "published_at": v.published_at.isoformat().replace("+00:00", "Z"),
                    }
                    for v in channel.videos
                ],
            }
            fh.write(json.dumps(obj, sort_keys=True))
            fh.write("\n")
