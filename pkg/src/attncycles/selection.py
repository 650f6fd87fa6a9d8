"""Univariate feature relevance scoring and top-k union selection.

Three scorers run over the training split only: one-way ANOVA F against
the class partition, and Pearson / Spearman correlation against the
ordinal label encoding. Each method contributes its top-k features (ranked
by score magnitude, name-ascending on ties) and the selected set is their
union, kept in dictionary order so downstream column slices stay stable.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .matrix import FeatureMatrix

METHODS = ("anova", "pearson", "spearman")
DEFAULT_TOP_K = 100


def anova_f(x, labels) -> float:
    """One-way ANOVA F statistic of one feature column against classes.

    Zero between-group variance gives 0; zero within-group variance with
    nonzero between gives +inf, which ranks above every finite score.
    """
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size < 2:
        raise ValueError("ANOVA needs at least two classes")
    grand = x.mean()
    ss_between = 0.0
    ss_within = 0.0
    for c in classes:
        grp = x[labels == c]
        ss_between += grp.size * (grp.mean() - grand) ** 2
        ss_within += ((grp - grp.mean()) ** 2).sum()
    if ss_between <= 0.0:
        return 0.0
    df_between = classes.size - 1
    df_within = x.size - classes.size
    if df_within <= 0 or ss_within <= 0.0:
        return math.inf
    return float((ss_between / df_between) / (ss_within / df_within))


def pearson_r(x, y) -> float:
    """Sample Pearson correlation; zero-variance input gives 0."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise ValueError("need at least two samples")
    xd = x - x.mean()
    yd = y - y.mean()
    denom = math.sqrt(float((xd * xd).sum()) * float((yd * yd).sum()))
    if denom == 0.0:
        return 0.0
    return float((xd * yd).sum() / denom)


def average_ranks(x) -> np.ndarray:
    """1-based ranks with ties replaced by their mean rank."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size, dtype=np.float64)
    sorted_x = x[order]
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and sorted_x[j + 1] == sorted_x[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman_rho(x, y) -> float:
    """Pearson correlation of the average-ranked data."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    return pearson_r(average_ranks(x), average_ranks(y))


def _score_matrix(matrix: FeatureMatrix, labels: np.ndarray) -> dict:
    scores = {m: np.empty(len(matrix.names)) for m in METHODS}
    y = np.asarray(labels, dtype=np.float64)
    for j in range(len(matrix.names)):
        col = matrix.values[:, j]
        scores["anova"][j] = anova_f(col, labels)
        scores["pearson"][j] = pearson_r(col, y)
        scores["spearman"][j] = spearman_rho(col, y)
    return scores


def _rank_key(method: str, score: float) -> float:
    return score if method == "anova" else abs(score)


@dataclass
class SelectionReport:
    """Scores, per-method top lists, and the selected union."""

    names: list
    scores: dict
    top: dict
    selected: list
    k: int

    def to_dict(self) -> dict:
        payload = {"k": self.k, "selected": self.selected, "top": self.top}
        for method in METHODS:
            payload[method] = [
                {"name": n, "score": _encode_score(s)}
                for n, s in zip(self.names, self.scores[method])
            ]
        return payload

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "SelectionReport":
        names = [entry["name"] for entry in data[METHODS[0]]]
        scores = {
            m: np.array([_decode_score(e["score"]) for e in data[m]]) for m in METHODS
        }
        return cls(names=names, scores=scores, top=data["top"],
                   selected=data["selected"], k=data["k"])


def _encode_score(score: float):
    if math.isinf(score):
        return "inf" if score > 0 else "-inf"
    return float(score)


def _decode_score(score):
    return float(score) if not isinstance(score, str) else float(score)


def select_top_union(
    matrix: FeatureMatrix, labels: Sequence[int], k: int = DEFAULT_TOP_K
) -> SelectionReport:
    """Fit the three scorers and return the union of their top-k features.

    Ranking is by score magnitude (plain value for F) descending, ties by
    feature name ascending. A k beyond the dictionary size takes all
    features. The selected union is ordered by the input dictionary.
    """
    labels = np.asarray(labels, dtype=np.int64)
    scores = _score_matrix(matrix, labels)
    k_eff = min(k, len(matrix.names))
    top = {}
    for method in METHODS:
        ranked = sorted(
            zip(matrix.names, scores[method]),
            key=lambda item: (-_rank_key(method, item[1]), item[0]),
        )
        top[method] = [name for name, _ in ranked[:k_eff]]
    union = set().union(*(set(v) for v in top.values()))
    selected = [n for n in matrix.names if n in union]
    return SelectionReport(names=list(matrix.names), scores=scores, top=top,
                           selected=selected, k=k)
