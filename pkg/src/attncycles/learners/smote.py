"""Synthetic minority oversampling by nearest-neighbor interpolation."""
from __future__ import annotations

import numpy as np


def smote_oversample(X, y, k_neighbors: int = 5, target_counts: dict = None, seed: int = 0):
    """Grow minority classes to target sizes with synthetic points.

    Each synthetic point is x_i + u * (x_nn - x_i) for a same-class base
    row x_i, one of its k nearest same-class neighbors x_nn (Euclidean),
    and u ~ Uniform(0, 1). Without explicit ``target_counts`` every class
    is grown to the majority-class count. The originals are returned
    verbatim as a prefix of the output; classes already at or above target
    are left untouched. ``k_neighbors`` is clamped to class size - 1.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"bad shapes: X {X.shape}, y {y.shape}")
    if k_neighbors < 1:
        raise ValueError("k_neighbors must be >= 1")
    rng = np.random.default_rng(seed)

    classes, counts = np.unique(y, return_counts=True)
    if target_counts is None:
        majority = int(counts.max())
        target_counts = {int(c): majority for c in classes}

    new_rows = []
    new_labels = []
    for cls in classes:
        cls = int(cls)
        target = int(target_counts.get(cls, 0))
        rows = np.flatnonzero(y == cls)
        n_new = target - rows.size
        if n_new <= 0:
            continue
        if rows.size < 2:
            raise ValueError(
                f"insufficient minority samples: class {cls} has {rows.size} "
                "row(s), need at least 2 to interpolate"
            )
        Xc = X[rows]
        k = min(k_neighbors, rows.size - 1)
        # Self excluded by masking the diagonal, not by distance, so
        # duplicate rows still pick a genuine neighbor.
        d2 = ((Xc[:, None, :] - Xc[None, :, :]) ** 2).sum(axis=2)
        np.fill_diagonal(d2, np.inf)
        knn = np.argsort(d2, axis=1, kind="stable")[:, :k]

        base_order = rng.permutation(rows.size)
        for t in range(n_new):
            i = int(base_order[t % rows.size])
            nn = int(knn[i, rng.integers(0, k)])
            u = rng.uniform()
            new_rows.append(Xc[i] + u * (Xc[nn] - Xc[i]))
            new_labels.append(cls)

    if not new_rows:
        return X, y
    X_out = np.vstack([X, np.array(new_rows)])
    y_out = np.concatenate([y, np.array(new_labels, dtype=np.int64)])
    return X_out, y_out
