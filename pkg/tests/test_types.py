import numpy as np
import pytest

from attncycles.synth import DEFAULT_PROFILES, generate_channel
from attncycles.types import (
    FactualityLabel,
    HourlyCumulativeSeries,
    PredictionDistribution,
)
from attncycles.video_features import (
    extract_video_attention_vector,
    extract_video_full_vector,
)


class TestPredictionDistribution:
    def test_valid(self):
        dist = PredictionDistribution(0.2, 0.3, 0.5)
        assert np.allclose(dist.as_array(), [0.2, 0.3, 0.5])

    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError, match="sum"):
            PredictionDistribution(0.2, 0.3, 0.6)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            PredictionDistribution(-0.1, 0.6, 0.5)

    def test_argmax_tie_toward_lower_ordinal(self):
        dist = PredictionDistribution(0.4, 0.4, 0.2)
        assert dist.argmax_label() == FactualityLabel.LOW

    def test_roundtrip(self):
        dist = PredictionDistribution.from_array([0.1, 0.2, 0.7])
        assert dist.argmax_label() == FactualityLabel.HIGH


class TestSeriesValidation:
    def test_rejects_decreasing(self):
        values = np.arange(168, dtype=float)
        values[100] = 0.0
        series = HourlyCumulativeSeries("views", values)
        with pytest.raises(ValueError, match="non-decreasing"):
            series.validate()

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError, match="length"):
            HourlyCumulativeSeries("views", np.zeros(100)).validate()

    def test_rejects_unknown_action(self):
        with pytest.raises(ValueError, match="action"):
            HourlyCumulativeSeries("clicks", np.zeros(168)).validate()


class TestVideoVectors:
    def _video(self):
        channel = generate_channel(
            FactualityLabel.MIXED, DEFAULT_PROFILES[FactualityLabel.MIXED],
            20, seed=1, channel_id="c",
        )
        return channel.videos[0]

    def test_identical_videos_identical_vectors(self):
        a = extract_video_attention_vector(self._video())
        b = extract_video_attention_vector(self._video())
        assert a.names == b.names
        assert np.array_equal(a.values, b.values)

    def test_attention_only_when_no_embeddings(self):
        vec = extract_video_full_vector(self._video())
        assert len(vec) == 948
        assert not any(n.startswith("text.") for n in vec.names)

    def test_full_vector_with_embeddings(self):
        video = self._video()
        rng = np.random.default_rng(0)
        video.title_embedding = rng.normal(size=768)
        video.description_embedding = rng.normal(size=768)
        vec = extract_video_full_vector(video)
        assert len(vec) == 948 + 1536
        assert vec.names[948] == "text.title.0"
        assert vec["text.desc.0"] == pytest.approx(video.description_embedding[0])

    def test_wrong_length_embedding_rejected(self):
        video = self._video()
        video.title_embedding = np.zeros(700)
        video.description_embedding = np.zeros(768)
        with pytest.raises(ValueError, match="768"):
            extract_video_full_vector(video)
