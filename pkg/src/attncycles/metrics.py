"""Evaluation metrics and reports for the ordinal 3-class task."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

N_CLASSES = 3


def _as_labels(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError(f"labels must be 1-D, got shape {arr.shape}")
    return arr


def _check_pair(truth, pred):
    truth = _as_labels(truth)
    pred = _as_labels(pred)
    if truth.shape != pred.shape:
        raise ValueError(f"length mismatch: {truth.shape} vs {pred.shape}")
    if truth.size == 0:
        raise ValueError("empty evaluation set")
    return truth, pred


def accuracy(truth, pred) -> float:
    truth, pred = _check_pair(truth, pred)
    return float((truth == pred).mean())


def confusion_matrix(truth, pred, n_classes: int = N_CLASSES) -> np.ndarray:
    """(n_classes, n_classes) counts; rows are truth, columns predictions."""
    truth, pred = _check_pair(truth, pred)
    out = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(out, (truth, pred), 1)
    return out


def per_class_recall(truth, pred, n_classes: int = N_CLASSES) -> np.ndarray:
    conf = confusion_matrix(truth, pred, n_classes)
    totals = conf.sum(axis=1)
    if np.any(totals == 0):
        missing = np.flatnonzero(totals == 0).tolist()
        raise ValueError(f"class(es) absent from truth: {missing}")
    return conf.diagonal() / totals


def balanced_accuracy(truth, pred, n_classes: int = N_CLASSES) -> float:
    """Unweighted mean of per-class recall; every class must appear in truth."""
    return float(per_class_recall(truth, pred, n_classes).mean())


def mae(truth, pred) -> float:
    """Mean absolute difference of the ordinal encodings."""
    truth, pred = _check_pair(truth, pred)
    return float(np.abs(truth - pred).mean())


@dataclass
class EvaluationReport:
    accuracy: float
    balanced_accuracy: float
    mae: float
    confusion: list  # 3x3 counts, truth-major
    per_class_recall: list
    split_sizes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "balanced_accuracy": self.balanced_accuracy,
            "mae": self.mae,
            "confusion": self.confusion,
            "per_class_recall": self.per_class_recall,
            "split_sizes": self.split_sizes,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvaluationReport":
        return cls(**data)


def evaluate(truth, pred, split_sizes: dict = None) -> EvaluationReport:
    conf = confusion_matrix(truth, pred)
    return EvaluationReport(
        accuracy=accuracy(truth, pred),
        balanced_accuracy=balanced_accuracy(truth, pred),
        mae=mae(truth, pred),
        confusion=conf.tolist(),
        per_class_recall=per_class_recall(truth, pred).tolist(),
        split_sizes=dict(split_sizes or {"eval": int(np.asarray(truth).size)}),
    )


def majority_class(labels: Sequence[int]) -> int:
    """Most frequent label; ties break toward the lower ordinal class."""
    labels = _as_labels(labels)
    counts = np.bincount(labels, minlength=N_CLASSES)
    return int(np.argmax(counts))


def majority_baseline(train_labels, eval_labels, split_sizes: dict = None) -> EvaluationReport:
    """Report of the constant predictor that always answers the training
    majority class."""
    cls = majority_class(train_labels)
    eval_labels = _as_labels(eval_labels)
    pred = np.full(eval_labels.shape, cls, dtype=np.int64)
    return evaluate(eval_labels, pred, split_sizes)
