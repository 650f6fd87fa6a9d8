"""Shared model plumbing: validation, fingerprints, serialization."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..matrix import FeatureMatrix, dictionary_fingerprint

MODEL_FORMAT_VERSION = "1"


class FingerprintMismatch(ValueError):
    """Prediction input does not match the model's feature dictionary."""


def validate_training_inputs(X: np.ndarray, y: np.ndarray) -> None:
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"bad training shapes: X {X.shape}, y {y.shape}")
    if X.shape[0] == 0:
        raise ValueError("empty training set")
    if not np.all(np.isfinite(X)):
        raise ValueError("training matrix contains non-finite values")
    if np.unique(y).size < 2:
        raise ValueError("training labels contain fewer than two classes")


def softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class TrainedModel:
    """Base for the fitted classifiers.

    Carries the training feature dictionary and refuses to predict on a
    matrix whose fingerprint differs.
    """

    kind: str = ""
    feature_names: list = field(default_factory=list)
    n_classes: int = 3
    config: dict = field(default_factory=dict)

    @property
    def fingerprint(self) -> str:
        return dictionary_fingerprint(self.feature_names)

    def predict_proba(self, data) -> np.ndarray:
        """(n, n_classes) class probabilities. Accepts a FeatureMatrix
        (fingerprint-checked) or a plain array in dictionary order."""
        if isinstance(data, FeatureMatrix):
            if data.fingerprint != self.fingerprint:
                raise FingerprintMismatch(
                    f"model fitted on {len(self.feature_names)} features "
                    f"({self.fingerprint}), got {len(data.names)} ({data.fingerprint})"
                )
            values = data.values
        else:
            values = np.asarray(data, dtype=np.float64)
            if values.ndim == 1:
                values = values[None, :]
            if values.shape[1] != len(self.feature_names):
                raise FingerprintMismatch(
                    f"expected {len(self.feature_names)} features, got {values.shape[1]}"
                )
        return self._predict_proba_values(values)

    def predict(self, data) -> np.ndarray:
        probs = self.predict_proba(data)
        return np.argmax(probs, axis=1)

    def _predict_proba_values(self, values: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # -- serialization -------------------------------------------------------

    def _params_dict(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "kind": self.kind,
            "fingerprint": self.fingerprint,
            "feature_names": list(self.feature_names),
            "n_classes": self.n_classes,
            "config": self.config,
            "params": self._params_dict(),
        }

    def save(self, path) -> None:
        with open(Path(path), "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)
            fh.write("\n")


def load_model(path) -> TrainedModel:
    with open(Path(path), encoding="utf-8") as fh:
        data = json.load(fh)
    return model_from_dict(data)


def model_from_dict(data: dict) -> TrainedModel:
    from .gbdt import GBDTModel
    from .logistic import LogisticModel, OrdinalLogisticModel

    kinds = {
        "gbdt": GBDTModel,
        "logistic": LogisticModel,
        "ordinal_logistic": OrdinalLogisticModel,
    }
    if data.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format: {data.get('format_version')!r}")
    kind = data["kind"]
    if kind not in kinds:
        raise ValueError(f"unknown model kind: {kind!r}")
    model = kinds[kind]._from_params(data)
    if model.fingerprint != data["fingerprint"]:
        raise ValueError("model fingerprint does not match its feature names")
    return model


def predict_proba(model: TrainedModel, x) -> np.ndarray:
    """Functional alias for single- or multi-row probability prediction."""
    return model.predict_proba(x)


def as_matrix(X, names: Sequence[str]) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != len(names):
        raise ValueError(f"matrix shape {X.shape} does not match {len(names)} names")
    return X
