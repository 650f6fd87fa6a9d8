import numpy as np
import pytest

from attncycles.synth import generate_dataset
from attncycles.types import FactualityLabel


@pytest.fixture(scope="session")
def tiny_corpus():
    """Small labeled corpus shared by pipeline-level tests."""
    return generate_dataset(
        {FactualityLabel.HIGH: 6, FactualityLabel.MIXED: 5, FactualityLabel.LOW: 5},
        seed=11,
        videos_per_channel=(20, 24),
    )


def make_series(increments) -> np.ndarray:
    inc = np.zeros(168)
    for hour, value in increments.items():
        inc[hour - 1] = value
    return np.cumsum(inc)
