"""Multinomial and proportional-odds (cumulative logit) logistic models.

Both are fitted by full-batch gradient descent with Armijo backtracking,
which makes the objective monotone over accepted steps. Convergence is
declared when the gradient infinity-norm drops below tolerance or an
iteration cap is hit. The L2 penalty applies to slope weights only, never
to intercepts or thresholds, so heavy regularization collapses predictions
to the class prior rather than to uniform.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .base import TrainedModel, sigmoid, softmax, validate_training_inputs


@dataclass(frozen=True)
class LogisticConfig:
    l2: float = 1e-3
    tol: float = 1e-6
    max_iter: int = 5000


def _backtrack(loss_fn, params, loss, direction, slope, step):
    """One Armijo backtracking step along -direction; returns
    (params, loss, step).

    A zero step signals that no acceptable step exists (numerical
    convergence); the caller should stop. Accepted steps always decrease
    the loss, so the recorded curve is monotone.
    """
    while step >= 1e-18:
        candidate = params - step * direction
        cand_loss = loss_fn(candidate)
        if cand_loss <= loss - 1e-4 * step * slope:
            return candidate, cand_loss, min(step * 2.0, 1e6)
        step *= 0.5
    return params, loss, 0.0


def _descend(loss_fn, grad_fn, params, tol, max_iter, precond=None):
    """Gradient descent with Armijo backtracking.

    ``precond`` divides the gradient elementwise (a diagonal curvature
    estimate); without it the heavily penalized weight block would force
    vanishing steps and starve the unpenalized intercepts.
    """
    loss = loss_fn(params)
    curve = [loss]
    step = 1.0
    for _ in range(max_iter):
        grad = grad_fn(params)
        if float(np.abs(grad).max()) < tol:
            break
        direction = grad if precond is None else grad / precond
        slope = float((grad * direction).sum())
        params, loss, step = _backtrack(loss_fn, params, loss, direction, slope, step)
        if step == 0.0:
            break
        curve.append(loss)
    return params, curve


# ---------------------------------------------------------------------------
# Multinomial logistic regression.
# ---------------------------------------------------------------------------


@dataclass
class LogisticModel(TrainedModel):
    weights: list = field(default_factory=list)  # (d, K)
    intercepts: list = field(default_factory=list)  # (K,)
    train_loss_curve: list = field(default_factory=list)

    def _predict_proba_values(self, values: np.ndarray) -> np.ndarray:
        W = np.asarray(self.weights)
        b = np.asarray(self.intercepts)
        return softmax(values @ W + b)

    def _params_dict(self) -> dict:
        return {
            "weights": np.asarray(self.weights).tolist(),
            "intercepts": list(self.intercepts),
            "train_loss_curve": list(self.train_loss_curve),
        }

    @classmethod
    def _from_params(cls, data: dict) -> "LogisticModel":
        params = data["params"]
        return cls(
            kind="logistic",
            feature_names=data["feature_names"],
            n_classes=data["n_classes"],
            config=data["config"],
            weights=params["weights"],
            intercepts=params["intercepts"],
            train_loss_curve=params["train_loss_curve"],
        )


def logistic_loss_grad(X, onehot, l2):
    """Loss and gradient closures over the packed (d+1, K) parameter block
    (slopes stacked over intercepts; intercepts unpenalized)."""
    n, d = X.shape

    def unpack(params):
        return params[:d], params[d]

    def loss_fn(params):
        W, b = unpack(params)
        probs = softmax(X @ W + b)
        p_true = np.clip((probs * onehot).sum(axis=1), 1e-15, None)
        return float(-np.mean(np.log(p_true)) + 0.5 * l2 * (W * W).sum())

    def grad_fn(params):
        W, b = unpack(params)
        delta = softmax(X @ W + b) - onehot
        grad = np.empty_like(params)
        grad[:d] = X.T @ delta / n + l2 * W
        grad[d] = delta.mean(axis=0)
        return grad

    return loss_fn, grad_fn


def logistic_train(
    X,
    y,
    feature_names: Sequence[str],
    config: LogisticConfig = LogisticConfig(),
    n_classes: int = None,
) -> LogisticModel:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    validate_training_inputs(X, y)
    K = int(n_classes if n_classes is not None else y.max() + 1)
    if K < 2 or y.max() >= K or y.min() < 0:
        raise ValueError(f"labels out of range for {K} classes")
    n, d = X.shape
    onehot = np.zeros((n, K))
    onehot[np.arange(n), y] = 1.0

    loss_fn, grad_fn = logistic_loss_grad(X, onehot, config.l2)
    precond = np.ones((d + 1, K))
    precond[:d] = 1.0 + config.l2
    params, curve = _descend(
        loss_fn, grad_fn, np.zeros((d + 1, K)), config.tol, config.max_iter, precond
    )
    return LogisticModel(
        kind="logistic",
        feature_names=list(feature_names),
        n_classes=K,
        config=asdict(config),
        weights=params[:d].tolist(),
        intercepts=params[d].tolist(),
        train_loss_curve=curve,
    )


# ---------------------------------------------------------------------------
# Proportional-odds cumulative-logit model.
#
# P(y <= c | x) = sigmoid(theta_c - w.x); thresholds are kept strictly
# increasing by optimizing (theta_0, log-gaps) instead of raw thresholds.
# ---------------------------------------------------------------------------


@dataclass
class OrdinalLogisticModel(TrainedModel):
    weights: list = field(default_factory=list)  # (d,)
    thresholds: list = field(default_factory=list)  # (K-1,), strictly increasing
    train_loss_curve: list = field(default_factory=list)

    def cumulative_proba(self, values: np.ndarray) -> np.ndarray:
        """(n, K-1) of P(y <= c | x) for c = 0..K-2."""
        z = np.asarray(values) @ np.asarray(self.weights)
        return sigmoid(np.asarray(self.thresholds)[None, :] - z[:, None])

    def _predict_proba_values(self, values: np.ndarray) -> np.ndarray:
        cum = self.cumulative_proba(values)
        full = np.hstack([np.zeros((cum.shape[0], 1)), cum, np.ones((cum.shape[0], 1))])
        return np.diff(full, axis=1)

    def _params_dict(self) -> dict:
        return {
            "weights": list(self.weights),
            "thresholds": list(self.thresholds),
            "train_loss_curve": list(self.train_loss_curve),
        }

    @classmethod
    def _from_params(cls, data: dict) -> "OrdinalLogisticModel":
        params = data["params"]
        return cls(
            kind="ordinal_logistic",
            feature_names=data["feature_names"],
            n_classes=data["n_classes"],
            config=data["config"],
            weights=params["weights"],
            thresholds=params["thresholds"],
            train_loss_curve=params["train_loss_curve"],
        )


def _unpack_ordinal(params, d, K):
    w = params[:d]
    theta = np.empty(K - 1)
    theta[0] = params[d]
    if K > 2:
        theta[1:] = theta[0] + np.cumsum(np.exp(params[d + 1 :]))
    return w, theta


def ordinal_loss_grad(X, y, K, l2):
    n, d = X.shape

    def loss_fn(params):
        w, theta = _unpack_ordinal(params, d, K)
        z = X @ w
        cum = sigmoid(theta[None, :] - z[:, None])
        full = np.hstack([np.zeros((n, 1)), cum, np.ones((n, 1))])
        p = np.clip(full[np.arange(n), y + 1] - full[np.arange(n), y], 1e-15, None)
        return float(-np.mean(np.log(p)) + 0.5 * l2 * (w * w).sum())

    def grad_fn(params):
        w, theta = _unpack_ordinal(params, d, K)
        z = X @ w
        cum = sigmoid(theta[None, :] - z[:, None])  # (n, K-1)
        dcum = cum * (1.0 - cum)  # d/d theta_c of sigmoid
        full = np.hstack([np.zeros((n, 1)), cum, np.ones((n, 1))])
        p = np.clip(full[np.arange(n), y + 1] - full[np.arange(n), y], 1e-15, None)

        # dNLL/dtheta_c: -(1/p) * (dcum_c if c == y) + (1/p) * (dcum_c if c == y-1)
        grad_theta = np.zeros(K - 1)
        grad_z = np.zeros(n)
        inv_p = 1.0 / p
        for c in range(K - 1):
            upper = (y == c).astype(np.float64)  # theta_c is the upper bound of class c
            lower = (y == c + 1).astype(np.float64)  # and the lower bound of class c+1
            coeff = (-upper + lower) * inv_p * dcum[:, c]
            grad_theta[c] = coeff.sum() / n
            grad_z += -coeff  # d(theta_c - z)/dz = -1
        grad_z /= n

        grad = np.empty_like(params)
        grad[:d] = X.T @ grad_z + l2 * w
        # Chain through the reparameterization: theta_c = theta_0 + sum(exp(gaps)).
        grad[d] = grad_theta.sum()
        if K > 2:
            gaps = np.exp(params[d + 1 :])
            # gap_j feeds every theta_c with c >= j+1.
            tail = np.cumsum(grad_theta[::-1])[::-1]
            grad[d + 1 :] = tail[1:] * gaps
        return grad

    return loss_fn, grad_fn


def ordinal_logistic_train(
    X,
    y,
    feature_names: Sequence[str],
    config: LogisticConfig = LogisticConfig(),
    n_classes: int = 3,
) -> OrdinalLogisticModel:
    """Fit the cumulative-logit model; every class must appear in y."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    validate_training_inputs(X, y)
    K = int(n_classes)
    present = np.unique(y)
    if present.size != K or present.min() < 0 or present.max() >= K:
        missing = sorted(set(range(K)) - set(present.tolist()))
        raise ValueError(f"ordinal training requires every class; missing {missing}")
    n, d = X.shape

    # Initialize thresholds at the empirical cumulative log-odds.
    cum_share = np.cumsum(np.bincount(y, minlength=K))[:-1] / n
    cum_share = np.clip(cum_share, 1e-6, 1 - 1e-6)
    theta0 = np.log(cum_share / (1.0 - cum_share))
    params = np.zeros(d + K - 1)
    params[d] = theta0[0]
    if K > 2:
        params[d + 1 :] = np.log(np.clip(np.diff(theta0), 1e-6, None))

    loss_fn, grad_fn = ordinal_loss_grad(X, y, K, config.l2)
    precond = np.ones(d + K - 1)
    precond[:d] = 1.0 + config.l2
    params, curve = _descend(loss_fn, grad_fn, params, config.tol, config.max_iter, precond)
    w, theta = _unpack_ordinal(params, d, K)
    return OrdinalLogisticModel(
        kind="ordinal_logistic",
        feature_names=list(feature_names),
        n_classes=K,
        config=asdict(config),
        weights=w.tolist(),
        thresholds=theta.tolist(),
        train_loss_curve=curve,
    )
