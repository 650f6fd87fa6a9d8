"""Core domain types shared across the pipeline."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional

import numpy as np

HOURS_PER_WEEK = 168
MINUTES_PER_WEEK = 10_080
EMBEDDING_DIM = 768

#: User-action kinds, in canonical order. This order is load-bearing: the
#: feature dictionary, stacked series arrays, and serialized records all use it.
ACTIONS = ("views", "likes", "dislikes", "comments")


class FactualityLabel(enum.IntEnum):
    """Ordinal factuality level. The integer value is the ordinal encoding
    used by the MAE metric and by correlation-based feature scoring."""

    LOW = 0
    MIXED = 1
    HIGH = 2

    @classmethod
    def parse(cls, text: str) -> "FactualityLabel":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown factuality label: {text!r}") from None


class RawFactualityLabel(enum.Enum):
    """Six-value source rating scale, merged down to three levels."""

    VERY_HIGH = "very_high"
    HIGH = "high"
    MOSTLY_FACTUAL = "mostly_factual"
    MIXED = "mixed"
    LOW = "low"
    VERY_LOW = "very_low"

    @classmethod
    def parse(cls, text: str) -> "RawFactualityLabel":
        key = text.strip().lower().replace(" ", "_").replace("-", "_")
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown raw factuality label: {text!r}") from None


def merge_factuality_labels(raw: RawFactualityLabel) -> FactualityLabel:
    """Collapse the six-value source scale onto {Low, Mixed, High}."""
    return _LABEL_MERGE[raw]


_LABEL_MERGE = {
    RawFactualityLabel.VERY_HIGH: FactualityLabel.HIGH,
    RawFactualityLabel.HIGH: FactualityLabel.HIGH,
    RawFactualityLabel.MOSTLY_FACTUAL: FactualityLabel.MIXED,
    RawFactualityLabel.MIXED: FactualityLabel.MIXED,
    RawFactualityLabel.LOW: FactualityLabel.LOW,
    RawFactualityLabel.VERY_LOW: FactualityLabel.LOW,
}


@dataclass(frozen=True)
class Snapshot:
    """One raw observation of a video's cumulative counters.

    ``observed_at`` is minutes since publication. Counts are cumulative and
    may regress due to platform-side corrections; repair happens downstream.
    """

    video_id: str
    observed_at: int
    views: int
    likes: int
    dislikes: int
    comments: int

    def count(self, action: str) -> int:
        return getattr(self, action)


@dataclass
class HourlyCumulativeSeries:
    """Cumulative count at the end of each of the 168 hours of the
    observation window. ``values[j]`` is the count by the end of hour j+1;
    the series is non-decreasing and ``values[167]`` is the weekly total."""

    action: str
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)

    def validate(self) -> None:
        if self.action not in ACTIONS:
            raise ValueError(f"unknown action kind: {self.action!r}")
        if self.values.shape != (HOURS_PER_WEEK,):
            raise ValueError(
                f"series must have length {HOURS_PER_WEEK}, got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("series contains non-finite values")
        if np.any(self.values < 0):
            raise ValueError("series contains negative counts")
        if np.any(np.diff(self.values) < 0):
            raise ValueError("series is not non-decreasing")

    @property
    def total(self) -> float:
        return float(self.values[-1])


@dataclass
class VideoObservation:
    """One video: four cumulative series plus metadata and optional
    precomputed text-embedding vectors."""

    video_id: str
    channel_id: str
    published_at: datetime
    series: dict = field(default_factory=dict)
    title_embedding: Optional[np.ndarray] = None
    description_embedding: Optional[np.ndarray] = None
    distant_label: Optional[FactualityLabel] = None

    def validate(self) -> None:
        if set(self.series) != set(ACTIONS):
            raise ValueError(
                f"video {self.video_id} must carry exactly one series per "
                f"action kind, got {sorted(self.series)}"
            )
        for action, series in self.series.items():
            if series.action != action:
                raise ValueError(f"series keyed {action!r} labeled {series.action!r}")
            series.validate()
        for name, emb in (
            ("title_embedding", self.title_embedding),
            ("description_embedding", self.description_embedding),
        ):
            if emb is not None and emb.shape != (EMBEDDING_DIM,):
                raise ValueError(
                    f"video {self.video_id}: {name} must have length "
                    f"{EMBEDDING_DIM}, got {emb.shape}"
                )

    def stacked_series(self) -> np.ndarray:
        """(4, 168) array of the four cumulative series in ACTIONS order."""
        return np.stack([self.series[a].values for a in ACTIONS])

    @property
    def has_embeddings(self) -> bool:
        return self.title_embedding is not None and self.description_embedding is not None


@dataclass
class ChannelRecord:
    """One channel: metadata, factuality label, and owned videos."""

    channel_id: str
    subscriber_count: int
    label: FactualityLabel
    videos: list = field(default_factory=list)

    def validate(self) -> None:
        if self.subscriber_count < 0:
            raise ValueError(f"channel {self.channel_id}: negative subscriber count")
        for video in self.videos:
            if video.channel_id != self.channel_id:
                raise ValueError(
                    f"video {video.video_id} carries channel "
                    f"{video.channel_id!r}, expected {self.channel_id!r}"
                )
            video.validate()


@dataclass(frozen=True)
class DatasetSplit:
    """Channel-level train/dev/test partition. Stored as sorted tuples so
    serialization is deterministic."""

    train: tuple
    dev: tuple
    test: tuple

    @classmethod
    def from_sets(cls, train, dev, test) -> "DatasetSplit":
        return cls(tuple(sorted(train)), tuple(sorted(dev)), tuple(sorted(test)))

    def validate(self, all_channel_ids=None) -> None:
        parts = [set(self.train), set(self.dev), set(self.test)]
        total = sum(len(p) for p in parts)
        union = set().union(*parts)
        if total != len(union):
            raise ValueError("split parts are not disjoint")
        if all_channel_ids is not None and union != set(all_channel_ids):
            raise ValueError("split does not cover the corpus exactly")

    def part_of(self, channel_id: str) -> str:
        for name in ("train", "dev", "test"):
            if channel_id in getattr(self, name):
                return name
        raise KeyError(channel_id)

    def to_dict(self) -> dict:
        return {"train": list(self.train), "dev": list(self.dev), "test": list(self.test)}

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetSplit":
        return cls.from_sets(data["train"], data["dev"], data["test"])


@dataclass(frozen=True)
class PredictionDistribution:
    """Probability distribution over the three factuality levels."""

    p_low: float
    p_mixed: float
    p_high: float

    def __post_init__(self) -> None:
        probs = self.as_array()
        if np.any(probs < -1e-12) or np.any(probs > 1 + 1e-12):
            raise ValueError(f"probabilities out of [0, 1]: {probs}")
        if abs(float(probs.sum()) - 1.0) > 1e-9:
            raise ValueError(f"probabilities must sum to 1, got {probs.sum()!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.p_low, self.p_mixed, self.p_high], dtype=np.float64)

    @classmethod
    def from_array(cls, probs) -> "PredictionDistribution":
        probs = np.asarray(probs, dtype=np.float64)
        return cls(float(probs[0]), float(probs[1]), float(probs[2]))

    def argmax_label(self) -> FactualityLabel:
        """Most likely level; ties break toward the lower ordinal level."""
        probs = self.as_array()
        return FactualityLabel(int(np.flatnonzero(probs == probs.max())[0]))


def argmax_labels(probs: np.ndarray) -> np.ndarray:
    """Row-wise argmax over (n, 3) probabilities; ties go to the lower
    ordinal class (np.argmax returns the first maximal index)."""
    probs = np.asarray(probs, dtype=np.float64)
    return np.argmax(probs, axis=1)
