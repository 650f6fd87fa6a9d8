"""Classifiers and the oversampler used by both pipeline stages."""
from .base import (
    FingerprintMismatch,
    TrainedModel,
    load_model,
    model_from_dict,
    predict_proba,
)
from .gbdt import GBDTConfig, GBDTModel, gbdt_train
from .logistic import (
    LogisticConfig,
    LogisticModel,
    OrdinalLogisticModel,
    logistic_train,
    ordinal_logistic_train,
)
from .smote import smote_oversample

LEARNER_KINDS = ("gbdt", "logistic", "ordinal_logistic")


def train(kind: str, X, y, feature_names, params: dict = None, n_classes: int = 3):
    """Train a model by kind name with config overrides from a plain dict."""
    params = dict(params or {})
    if kind == "gbdt":
        return gbdt_train(X, y, feature_names, GBDTConfig(**params), n_classes=n_classes)
    if kind == "logistic":
        return logistic_train(X, y, feature_names, LogisticConfig(**params), n_classes=n_classes)
    if kind == "ordinal_logistic":
        return ordinal_logistic_train(
            X, y, feature_names, LogisticConfig(**params), n_classes=n_classes
        )
    raise ValueError(f"unknown learner kind: {kind!r}")


__all__ = [
    "FingerprintMismatch",
    "GBDTConfig",
    "GBDTModel",
    "LEARNER_KINDS",
    "LogisticConfig",
    "LogisticModel",
    "OrdinalLogisticModel",
    "TrainedModel",
    "gbdt_train",
    "load_model",
    "logistic_train",
    "model_from_dict",
    "ordinal_logistic_train",
    "predict_proba",
    "smote_oversample",
    "train",
]
