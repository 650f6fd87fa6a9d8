"""Multi-class gradient boosted regression trees.

One tree ensemble per class, fitted stage-wise to the softmax
cross-entropy residuals. Splits are exact greedy over sorted values (no
histogram binning); leaf values use the standard (K-1)/K damped Newton
step for the multinomial loss, scaled by the learning rate at fit time.
Trees are plain nested dicts so serialization is direct.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .. import _kernels
from .base import TrainedModel, softmax, validate_training_inputs


@dataclass(frozen=True)
class GBDTConfig:
    n_rounds: int = 200
    learning_rate: float = 0.1
    max_depth: int = 3
    min_samples_leaf: int = 5


def _leaf_value(residuals: np.ndarray, n_classes: int, learning_rate: float) -> float:
    numer = residuals.sum()
    denom = (np.abs(residuals) * (1.0 - np.abs(residuals))).sum()
    if denom <= 0.0:
        return 0.0
    return float(learning_rate * (n_classes - 1) / n_classes * numer / denom)


def _fit_tree(X, rows, residuals, depth, n_classes, config: GBDTConfig) -> dict:
    if depth < config.max_depth and rows.size >= 2 * config.min_samples_leaf:
        feature, threshold, gain = _kernels.best_split(
            X[rows], residuals[rows], config.min_samples_leaf
        )
        if feature >= 0 and gain > 0.0:
            go_left = X[rows, feature] <= threshold
            return {
                "feature": int(feature),
                "threshold": float(threshold),
                "left": _fit_tree(X, rows[go_left], residuals, depth + 1, n_classes, config),
                "right": _fit_tree(X, rows[~go_left], residuals, depth + 1, n_classes, config),
            }
    return {"value": _leaf_value(residuals[rows], n_classes, config.learning_rate)}


def _apply_tree(node: dict, X: np.ndarray, rows: np.ndarray, out: np.ndarray) -> None:
    if "value" in node:
        out[rows] += node["value"]
        return
    go_left = X[rows, node["feature"]] <= node["threshold"]
    _apply_tree(node["left"], X, rows[go_left], out)
    _apply_tree(node["right"], X, rows[~go_left], out)


def apply_tree(node: dict, X: np.ndarray) -> np.ndarray:
    out = np.zeros(X.shape[0], dtype=np.float64)
    _apply_tree(node, X, np.arange(X.shape[0]), out)
    return out


@dataclass
class GBDTModel(TrainedModel):
    base_scores: list = field(default_factory=list)
    trees: list = field(default_factory=list)  # trees[round][class] nested dicts
    train_loss_curve: list = field(default_factory=list)

    def _scores(self, values: np.ndarray) -> np.ndarray:
        scores = np.tile(np.asarray(self.base_scores), (values.shape[0], 1))
        for stage in self.trees:
            for c, tree in enumerate(stage):
                scores[:, c] += apply_tree(tree, values)
        return scores

    def _predict_proba_values(self, values: np.ndarray) -> np.ndarray:
        return softmax(self._scores(values))

    def _params_dict(self) -> dict:
        return {
            "base_scores": list(self.base_scores),
            "trees": self.trees,
            "train_loss_curve": list(self.train_loss_curve),
        }

    @classmethod
    def _from_params(cls, data: dict) -> "GBDTModel":
        params = data["params"]
        return cls(
            kind="gbdt",
            feature_names=data["feature_names"],
            n_classes=data["n_classes"],
            config=data["config"],
            base_scores=params["base_scores"],
            trees=params["trees"],
            train_loss_curve=params["train_loss_curve"],
        )


def _log_loss(probs: np.ndarray, y: np.ndarray) -> float:
    p = np.clip(probs[np.arange(y.size), y], 1e-15, None)
    return float(-np.mean(np.log(p)))


def gbdt_train(
    X,
    y,
    feature_names: Sequence[str],
    config: GBDTConfig = GBDTConfig(),
    n_classes: int = None,
) -> GBDTModel:
    """Fit the boosted ensemble; the per-round training loss is recorded
    on the model for auditability."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    validate_training_inputs(X, y)
    K = int(n_classes if n_classes is not None else y.max() + 1)
    if K < 2 or y.max() >= K or y.min() < 0:
        raise ValueError(f"labels out of range for {K} classes")

    n = X.shape[0]
    counts = np.bincount(y, minlength=K).astype(np.float64)
    # Smoothed so a class absent from training still gets a finite score.
    base_scores = np.log((counts + 1.0) / (n + K))
    scores = np.tile(base_scores, (n, 1))
    onehot = np.zeros((n, K))
    onehot[np.arange(n), y] = 1.0

    all_rows = np.arange(n)
    trees = []
    loss_curve = [_log_loss(softmax(scores), y)]
    for _ in range(config.n_rounds):
        probs = softmax(scores)
        stage = []
        for c in range(K):
            residuals = onehot[:, c] - probs[:, c]
            tree = _fit_tree(X, all_rows, residuals, 0, K, config)
            stage.append(tree)
            scores[:, c] += apply_tree(tree, X)
        trees.append(stage)
        loss_curve.append(_log_loss(softmax(scores), y))

    return GBDTModel(
        kind="gbdt",
        feature_names=list(feature_names),
        n_classes=K,
        config=asdict(config),
        base_scores=[float(s) for s in base_scores],
        trees=trees,
        train_loss_curve=loss_curve,
    )
