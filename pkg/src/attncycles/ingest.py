"""Snapshot parsing, series reconstruction, and corpus preparation.

Raw inputs are JSONL snapshot logs plus a JSONL channel manifest. This
module turns them into validated :class:`ChannelRecord` objects: hourly
series rebuilt by last-observation-carried-forward, monotonicity repaired
by a running maximum, labels merged to the three-level scale, channels
filtered/capped, videos distant-labeled, and the corpus split at the
channel level.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable, Optional, Sequence

import numpy as np

from .types import (
    ACTIONS,
    HOURS_PER_WEEK,
    MINUTES_PER_WEEK,
    ChannelRecord,
    DatasetSplit,
    FactualityLabel,
    HourlyCumulativeSeries,
    RawFactualityLabel,
    Snapshot,
    VideoObservation,
    merge_factuality_labels,
)

log = logging.getLogger(__name__)

MIN_VIDEOS_PER_CHANNEL = 20
MAX_VIDEOS_PER_CHANNEL = 100
DEFAULT_SPLIT_RATIOS = (0.70, 0.15, 0.15)


@dataclass(frozen=True)
class LineError:
    """A recoverable per-line parse failure."""

    line_no: int
    message: str


def parse_snapshot_log(lines: Iterable[str]):
    """Parse a JSONL snapshot stream.

    Returns ``(snapshots, errors)``; malformed lines are skipped and
    reported with their 1-based line numbers.
    """
    snapshots = []
    errors = []
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            errors.append(LineError(line_no, f"malformed JSON: {exc.msg}"))
            continue
        try:
            snapshots.append(_snapshot_from_obj(obj))
        except (KeyError, TypeError, ValueError) as exc:
            errors.append(LineError(line_no, str(exc)))
    if errors:
        log.warning("snapshot log: %d malformed line(s), first at line %d",
                    len(errors), errors[0].line_no)
    return snapshots, errors


def _snapshot_from_obj(obj: dict) -> Snapshot:
    if not isinstance(obj, dict):
        raise ValueError("line is not a JSON object")
    video_id = obj["video_id"]
    observed_at = obj["observed_at"]
    if not isinstance(video_id, str) or not video_id:
        raise ValueError("video_id must be a non-empty string")
    if not isinstance(observed_at, int) or isinstance(observed_at, bool):
        raise ValueError("observed_at must be an integer minute offset")
    if observed_at < 0:
        raise ValueError(f"observed_at is negative: {observed_at}")
    if observed_at > MINUTES_PER_WEEK:
        raise ValueError(f"observed_at beyond the 7-day window: {observed_at}")
    counts = {}
    for action in ACTIONS:
        value = obj[action]
        if not isinstance(value, int) or isinstance(value, bool):
            raise ValueError(f"{action} must be an integer count")
        if value < 0:
            raise ValueError(f"negative count for {action}: {value}")
        counts[action] = value
    return Snapshot(video_id=video_id, observed_at=observed_at, **counts)


def build_hourly_series(snapshots: Sequence[Snapshot], action: str) -> HourlyCumulativeSeries:
    """Reconstruct one action's hourly cumulative series for one video.

    The value at the end of hour j is the count of the last observation at
    or before minute 60*j (zero before the first observation, carried
    forward after the last). Count regressions are repaired by a running
    maximum so the result is non-decreasing.
    """
    if not snapshots:
        raise ValueError("empty snapshot set")
    if action not in ACTIONS:
        raise ValueError(f"unknown action kind: {action!r}")
    order = sorted(range(len(snapshots)), key=lambda i: snapshots[i].observed_at)
    minutes = np.array([snapshots[i].observed_at for i in order], dtype=np.int64)
    counts = np.array([snapshots[i].count(action) for i in order], dtype=np.float64)
    # Running maximum makes the series monotone and, with duplicate
    # timestamps, independent of input order.
    counts = np.maximum.accumulate(counts)

    boundaries = 60 * np.arange(1, HOURS_PER_WEEK + 1)
    idx = np.searchsorted(minutes, boundaries, side="right") - 1
    values = np.where(idx >= 0, counts[np.maximum(idx, 0)], 0.0)
    series = HourlyCumulativeSeries(action=action, values=values)
    series.validate()
    return series


def build_video(
    video_id: str,
    channel_id: str,
    published_at: datetime,
    snapshots: Sequence[Snapshot],
    title_embedding=None,
    description_embedding=None,
) -> VideoObservation:
    series = {a: build_hourly_series(snapshots, a) for a in ACTIONS}
    video = VideoObservation(
        video_id=video_id,
        channel_id=channel_id,
        published_at=published_at,
        series=series,
        title_embedding=title_embedding,
        description_embedding=description_embedding,
    )
    video.validate()
    return video


def filter_and_cap_channels(channels: Sequence[ChannelRecord]):
    """Drop channels below the minimum video count and cap prolific ones
    at the newest videos; videos come back newest-first."""
    kept = []
    for channel in channels:
        videos = sorted(
            channel.videos,
            key=lambda v: (v.published_at, v.video_id),
            reverse=True,
        )
        if len(videos) < MIN_VIDEOS_PER_CHANNEL:
            log.debug("dropping channel %s: only %d videos", channel.channel_id, len(videos))
            continue
        kept.append(
            ChannelRecord(
                channel_id=channel.channel_id,
                subscriber_count=channel.subscriber_count,
                label=channel.label,
                videos=videos[:MAX_VIDEOS_PER_CHANNEL],
            )
        )
    return kept


def assign_distant_labels(channels: Sequence[ChannelRecord]):
    """Copy each channel's label onto its videos (distant supervision)."""
    for channel in channels:
        for video in channel.videos:
            video.distant_label = channel.label
    return channels


def split_dataset(
    channels: Sequence[ChannelRecord],
    ratios=DEFAULT_SPLIT_RATIOS,
    seed: int = 0,
) -> DatasetSplit:
    """Seeded stratified channel-level split.

    Within each label class, counts follow floor-then-largest-remainder
    rounding of the requested ratios; remainder ties resolve in
    train, dev, test order.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise ValueError(f"need three non-negative ratios, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)}")

    rng = np.random.default_rng(seed)
    parts = {0: [], 1: [], 2: []}
    for label in FactualityLabel:
        ids = sorted(c.channel_id for c in channels if c.label == label)
        if not ids:
            continue
        rng.shuffle(ids)
        counts = _largest_remainder(len(ids), ratios)
        offset = 0
        for part, count in enumerate(counts):
            parts[part].extend(ids[offset : offset + count])
            offset += count
    split = DatasetSplit.from_sets(parts[0], parts[1], parts[2])
    split.validate(all_channel_ids=[c.channel_id for c in channels])
    return split


def _largest_remainder(n: int, ratios) -> list:
    quotas = [n * r for r in ratios]
    counts = [math.floor(q) for q in quotas]
    remainders = [q - c for q, c in zip(quotas, counts)]
    for _ in range(n - sum(counts)):
        best = max(range(len(ratios)), key=lambda i: (remainders[i], -i))
        counts[best] += 1
        remainders[best] = -1.0
    return counts


# ---------------------------------------------------------------------------
# Manifest loading and whole-corpus preparation.
# ---------------------------------------------------------------------------


def parse_iso8601(text: str) -> datetime:
    dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


@dataclass
class ManifestVideo:
    video_id: str
    published_at: datetime
    title_embedding_ref: Optional[str] = None
    description_embedding_ref: Optional[str] = None


@dataclass
class ManifestChannel:
    channel_id: str
    subscriber_count: int
    label: FactualityLabel
    videos: list


def parse_channel_manifest(lines: Iterable[str]):
    """Parse the JSONL channel manifest.

    Channels with a missing or unknown raw factuality label are rejected
    outright rather than silently dropped.
    """
    channels = []
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"manifest line {line_no}: malformed JSON: {exc.msg}") from None
        try:
            raw = obj.get("raw_factuality")
            if raw is None:
                raise ValueError("missing raw_factuality")
            label = merge_factuality_labels(RawFactualityLabel.parse(raw))
            videos = [
                ManifestVideo(
                    video_id=v["video_id"],
                    published_at=parse_iso8601(v["published_at"]),
                    title_embedding_ref=v.get("title_embedding"),
                    description_embedding_ref=v.get("description_embedding"),
                )
                for v in obj.get("videos", [])
            ]
            channels.append(
                ManifestChannel(
                    channel_id=obj["channel_id"],
                    subscriber_count=int(obj.get("subscriber_count", 0)),
                    label=label,
                    videos=videos,
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"manifest line {line_no}: {exc}") from None
    return channels


def load_embedding(path, fmt: str = "f32le") -> np.ndarray:
    if fmt == "f32le":
        data = np.fromfile(path, dtype="<f4").astype(np.float64)
    elif fmt == "json":
        with open(path, encoding="utf-8") as fh:
            data = np.asarray(json.load(fh), dtype=np.float64)
    else:
        raise ValueError(f"unknown embedding format: {fmt!r}")
    if data.shape != (768,):
        raise ValueError(f"embedding at {path} has length {data.shape[0]}, expected 768")
    return data


def prepare_corpus(
    snapshot_lines: Iterable[str],
    manifest_lines: Iterable[str],
    embeddings_dir=None,
    embedding_format: str = "f32le",
):
    """Assemble labeled, filtered channels from the raw JSONL inputs.

    Videos with no snapshots at all are dropped with a warning since no
    series can be reconstructed for them.
    """
    snapshots, errors = parse_snapshot_log(snapshot_lines)
    by_video = {}
    for snap in snapshots:
        by_video.setdefault(snap.video_id, []).append(snap)

    manifest = parse_channel_manifest(manifest_lines)
    channels = []
    dropped = 0
    for mc in manifest:
        videos = []
        for mv in mc.videos:
            snaps = by_video.get(mv.video_id)
            if not snaps:
                dropped += 1
                continue
            title_emb = desc_emb = None
            if mv.title_embedding_ref and embeddings_dir is not None:
                title_emb = load_embedding(
                    f"{embeddings_dir}/{mv.title_embedding_ref}", embedding_format
                )
            if mv.description_embedding_ref and embeddings_dir is not None:
                desc_emb = load_embedding(
                    f"{embeddings_dir}/{mv.description_embedding_ref}", embedding_format
                )
            videos.append(
                build_video(
                    mv.video_id, mc.channel_id, mv.published_at, snaps,
                    title_embedding=title_emb, description_embedding=desc_emb,
                )
            )
        channels.append(
            ChannelRecord(
                channel_id=mc.channel_id,
                subscriber_count=mc.subscriber_count,
                label=mc.label,
                videos=videos,
            )
        )
    if dropped:
        log.warning("dropped %d manifest video(s) with no snapshots", dropped)

    channels = filter_and_cap_channels(channels)
    assign_distant_labels(channels)
    for channel in channels:
        channel.validate()
    return channels, errors


def all_videos(channels: Sequence[ChannelRecord]):
    videos = []
    for channel in channels:
        videos.extend(channel.videos)
    return videos
