"""Hot numeric kernels with two interchangeable backends.

Two call sites dominate runtime on full-size corpora: the per-series
window/peak scan behind the shape features, and the exact greedy split
search inside tree boosting. Each has a numba ``@njit`` implementation and
a pure-numpy implementation. The active backend is chosen at import time:
numba when importable, unless ``ATTNCYCLES_DISABLE_NUMBA`` is set to
1/true/yes, in which case the numpy path is used.

Both backends implement the same comparison semantics, so results agree
exactly on integer-valued outputs (window lengths, hour indices, split
choices) except for exact floating-point gain ties in the split search,
which each backend breaks deterministically on its own. Within one backend
all results are fully deterministic.

``benchmarks/bench_kernels.py`` times the two paths against each other.
"""
from __future__ import annotations

import os

import numpy as np

_ENV_FLAG = "ATTNCYCLES_DISABLE_NUMBA"


def _numba_disabled_by_env() -> bool:
    return os.environ.get(_ENV_FLAG, "").strip().lower() in {"1", "true", "yes"}


NUMBA_ENABLED = False
if not _numba_disabled_by_env():
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"


# ---------------------------------------------------------------------------
# Shape scan: window lengths, peak hour, last active hour, peak share.
#
# Input is a batch of cumulative series (n, H); values[r, j] is the count by
# the end of hour j+1, with an implicit 0 at hour 0. Output is (n, 6):
# columns 0..2 = minimal window length (hours) capturing each threshold
# share of the total; 3 = earliest peak-increment hour within
# [first_hour, H] (0 when no positive increment there); 4 = last hour with a
# positive increment (0 when none); 5 = peak increment / total (0 when the
# total is 0). An all-zero series yields an all-zero row.
# ---------------------------------------------------------------------------


def shape_scan_numpy(values: np.ndarray, thresholds: np.ndarray, first_hour: int) -> np.ndarray:
    values = np.ascontiguousarray(values, dtype=np.float64)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    n, H = values.shape
    out = np.zeros((n, 3 + 3), dtype=np.float64)

    totals = values[:, -1]
    inc = np.diff(values, axis=1, prepend=0.0)

    start = first_hour - 1  # column index of the first eligible hour
    sub = inc[:, start:]
    peak_val = sub.max(axis=1) if sub.shape[1] else np.zeros(n)
    peak_hour = np.where(peak_val > 0, sub.argmax(axis=1) + first_hour, 0)
    out[:, 3] = peak_hour
    pos = inc > 0
    any_pos = pos.any(axis=1)
    last_pos = H - np.argmax(pos[:, ::-1], axis=1)
    out[:, 4] = np.where(any_pos, last_pos, 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        out[:, 5] = np.where(totals > 0, peak_val / np.where(totals > 0, totals, 1.0), 0.0)

    hour_idx = np.arange(H + 1)
    span = hour_idx[:, None] - hour_idx[None, :]  # span[j, i] = j - i
    for r in range(n):
        total = totals[r]
        if total <= 0.0:
            out[r, :] = 0.0
            continue
        ua = np.concatenate(([0.0], values[r]))
        gain = ua[:, None] - ua[None, :]  # gain[j, i] = ua[j] - ua[i]
        for t in range(3):
            ok = (gain >= thresholds[t] * total) & (span > 0)
            out[r, t] = span[ok].min()
    return out


shape_scan_numba = None
if NUMBA_ENABLED:

    @njit(cache=True)
    def _shape_scan_jit(values, thresholds, first_hour):  # pragma: no cover - jitted
        n, H = values.shape
        out = np.zeros((n, 6), dtype=np.float64)
        for r in range(n):
            v = values[r]
            total = v[H - 1]
            if total <= 0.0:
                continue
            # Minimal-window scan, two pointers. ua[k] = v[k-1], ua[0] = 0;
            # the left pointer only ever advances because the valid-left
            # prefix grows with j on a non-decreasing series.
            for t in range(3):
                thr = thresholds[t] * total
                best = H
                i = 0
                for j in range(1, H + 1):
                    uaj = v[j - 1]
                    while i + 1 < j and uaj - v[i] >= thr:
                        i += 1
                    uai = 0.0 if i == 0 else v[i - 1]
                    if uaj - uai >= thr and j - i < best:
                        best = j - i
                out[r, t] = best
            peak_val = 0.0
            peak_hour = 0
            alive = 0
            prev = 0.0
            for j in range(1, H + 1):
                cur = v[j - 1]
                step = cur - prev
                prev = cur
                if step > 0.0:
                    alive = j
                if j >= first_hour and step > peak_val:
                    peak_val = step
                    peak_hour = j
            out[r, 3] = peak_hour
            out[r, 4] = alive
            out[r, 5] = peak_val / total
        return out

    def shape_scan_numba(values, thresholds, first_hour):
        values = np.ascontiguousarray(values, dtype=np.float64)
        thresholds = np.ascontiguousarray(thresholds, dtype=np.float64)
        return _shape_scan_jit(values, thresholds, first_hour)


def shape_scan(values: np.ndarray, thresholds: np.ndarray, first_hour: int = 2) -> np.ndarray:
    if NUMBA_ENABLED:
        return shape_scan_numba(values, thresholds, first_hour)
    return shape_scan_numpy(values, thresholds, first_hour)


# ---------------------------------------------------------------------------
# Exact greedy split search for regression trees.
#
# Given node rows X (m, d) and per-row targets g (m,), find the (feature,
# threshold) whose axis-aligned split maximizes the squared-error reduction
#   S_L^2/n_L + S_R^2/n_R - S^2/m,
# scanning every boundary between distinct sorted values, subject to a
# minimum leaf size. Returns (feature, threshold, gain); feature is -1 when
# no split has strictly positive gain. Candidates are ranked feature-major
# then position-minor, so equal gains resolve identically across calls.
# ---------------------------------------------------------------------------


def best_split_numpy(X: np.ndarray, g: np.ndarray, min_leaf: int):
    X = np.ascontiguousarray(X, dtype=np.float64)
    g = np.ascontiguousarray(g, dtype=np.float64)
    m, d = X.shape
    if m < 2 * min_leaf:
        return -1, 0.0, 0.0
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    gs = g[order]
    csum = np.cumsum(gs, axis=0)
    total = float(g.sum())
    parent = total * total / m

    nl = np.arange(1, m, dtype=np.float64)[:, None]
    nr = m - nl
    sl = csum[:-1, :]
    sr = total - sl
    gain = sl * sl / nl + sr * sr / nr - parent
    valid = (xs[:-1, :] != xs[1:, :]) & (nl >= min_leaf) & (nr >= min_leaf)
    gain = np.where(valid, gain, -np.inf)

    flat = gain.T.reshape(-1)  # feature-major to match the loop backend
    pos = int(np.argmax(flat))
    best_gain = float(flat[pos])
    if not np.isfinite(best_gain) or best_gain <= 0.0:
        return -1, 0.0, 0.0
    f, p = divmod(pos, m - 1)
    thr = 0.5 * (xs[p, f] + xs[p + 1, f])
    return int(f), float(thr), best_gain


best_split_numba = None
if NUMBA_ENABLED:

    @njit(cache=True)
    def _best_split_jit(X, g, min_leaf):  # pragma: no cover - jitted
        m, d = X.shape
        best_gain = 0.0
        best_f = -1
        best_thr = 0.0
        if m < 2 * min_leaf:
            return best_f, best_thr, best_gain
        total = 0.0
        for i in range(m):
            total += g[i]
        parent = total * total / m
        for f in range(d):
            col = X[:, f].copy()
            order = np.argsort(col)
            sl = 0.0
            for p in range(m - 1):
                sl += g[order[p]]
                nl = p + 1
                if nl < min_leaf:
                    continue
                nr = m - nl
                if nr < min_leaf:
                    break
                xv = col[order[p]]
                xn = col[order[p + 1]]
                if xv == xn:
                    continue
                sr = total - sl
                gain = sl * sl / nl + sr * sr / nr - parent
                if gain > best_gain:
                    best_gain = gain
                    best_f = f
                    best_thr = 0.5 * (xv + xn)
        return best_f, best_thr, best_gain

    def best_split_numba(X, g, min_leaf):
        X = np.ascontiguousarray(X, dtype=np.float64)
        g = np.ascontiguousarray(g, dtype=np.float64)
        f, thr, gain = _best_split_jit(X, g, min_leaf)
        return int(f), float(thr), float(gain)


def best_split(X: np.ndarray, g: np.ndarray, min_leaf: int):
    if NUMBA_ENABLED:
        return best_split_numba(X, g, min_leaf)
    return best_split_numpy(X, g, min_leaf)


def warmup() -> None:
    """Trigger jit compilation on toy inputs so timings exclude compile cost."""
    series = np.cumsum(np.ones((2, 168)), axis=1)
    shape_scan(series, np.array([0.5, 0.7, 0.9]), 2)
    rng = np.random.default_rng(0)
    best_split(rng.normal(size=(16, 3)), rng.normal(size=16), 2)
