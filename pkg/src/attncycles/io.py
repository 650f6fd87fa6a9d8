"""JSONL persistence for prepared corpora, splits, and predictions.

Stage outputs are plain files so each pipeline step can be rerun and
inspected independently. All writers emit sorted-key JSON with no
timestamps, so identical inputs produce byte-identical files.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .types import (
    ACTIONS,
    ChannelRecord,
    DatasetSplit,
    FactualityLabel,
    HourlyCumulativeSeries,
    VideoObservation,
)
from .ingest import parse_iso8601


def _compact_number(value: float):
    return int(value) if float(value).is_integer() else float(value)


def _video_to_obj(video: VideoObservation) -> dict:
    obj = {
        "video_id": video.video_id,
        "published_at": video.published_at.isoformat().replace("+00:00", "Z"),
        "series": {
            action: [_compact_number(v) for v in video.series[action].values]
            for action in ACTIONS
        },
    }
    if video.distant_label is not None:
        obj["distant_label"] = video.distant_label.name.lower()
    if video.title_embedding is not None:
        obj["title_embedding"] = [float(v) for v in video.title_embedding]
    if video.description_embedding is not None:
        obj["description_embedding"] = [float(v) for v in video.description_embedding]
    return obj


def _video_from_obj(obj: dict, channel_id: str) -> VideoObservation:
    series = {
        action: HourlyCumulativeSeries(action, np.asarray(obj["series"][action]))
        for action in ACTIONS
    }
    label = obj.get("distant_label")
    title = obj.get("title_embedding")
    desc = obj.get("description_embedding")
    return VideoObservation(
        video_id=obj["video_id"],
        channel_id=channel_id,
        published_at=parse_iso8601(obj["published_at"]),
        series=series,
        title_embedding=None if title is None else np.asarray(title, dtype=np.float64),
        description_embedding=None if desc is None else np.asarray(desc, dtype=np.float64),
        distant_label=None if label is None else FactualityLabel.parse(label),
    )


def save_channels(channels: Sequence[ChannelRecord], path) -> None:
    with open(Path(path), "w", encoding="utf-8") as fh:
        for channel in channels:
            obj = {
                "channel_id": channel.channel_id,
                "subscriber_count": channel.subscriber_count,
                "label": channel.label.name.lower(),
                "videos": [_video_to_obj(v) for v in channel.videos],
            }
            fh.write(json.dumps(obj, sort_keys=True))
            fh.write("\n")


def load_channels(path) -> list:
    channels = []
    with open(Path(path), encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            channel = ChannelRecord(
                channel_id=obj["channel_id"],
                subscriber_count=obj["subscriber_count"],
                label=FactualityLabel.parse(obj["label"]),
                videos=[_video_from_obj(v, obj["channel_id"]) for v in obj["videos"]],
            )
            channel.validate()
            channels.append(channel)
    return channels


def save_split(split: DatasetSplit, path) -> None:
    with open(Path(path), "w", encoding="utf-8") as fh:
        json.dump(split.to_dict(), fh, sort_keys=True)
        fh.write("\n")


def load_split(path) -> DatasetSplit:
    with open(Path(path), encoding="utf-8") as fh:
        return DatasetSplit.from_dict(json.load(fh))


def save_predictions(distributions: dict, path) -> None:
    """id -> (3,) probability map as JSONL, id-sorted for determinism."""
    with open(Path(path), "w", encoding="utf-8") as fh:
        for item_id in sorted(distributions):
            probs = np.asarray(distributions[item_id], dtype=np.float64)
            fh.write(json.dumps({
                "id": item_id,
                "p_low": float(probs[0]),
                "p_mixed": float(probs[1]),
                "p_high": float(probs[2]),
            }, sort_keys=True))
            fh.write("\n")


def load_predictions(path) -> dict:
    out = {}
    with open(Path(path), encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            out[obj["id"]] = np.array(
                [obj["p_low"], obj["p_mixed"], obj["p_high"]], dtype=np.float64
            )
    return out


def save_json(data: dict, path) -> None:
    with open(Path(path), "w", encoding="utf-8") as fh:
        json.dump(data, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_json(path) -> dict:
    with open(Path(path), encoding="utf-8") as fh:
        return json.load(fh)


def read_lines(path) -> Iterable[str]:
    with open(Path(path), encoding="utf-8") as fh:
        yield from fh
