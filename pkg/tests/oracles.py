"""Independent brute-force reference implementations for the tests.

Everything here is written directly from the feature definitions with
explicit loops and full scans, deliberately avoiding the vectorized /
jitted code paths of the package, so the two routes can check each other.
"""
import math

import numpy as np


def safediv(a: float, b: float) -> float:
    return a / b if b != 0 else 0.0


def ua_hour(values, j: int) -> float:
    """Cumulative count by the end of hour j, hour 0 being 0."""
    return 0.0 if j == 0 else float(values[j - 1])


def ua_day(values, i: int) -> float:
    return 0.0 if i == 0 else float(values[24 * i - 1])


def daily_shares(values):
    total = ua_day(values, 7)
    return [safediv(ua_day(values, i) - ua_day(values, i - 1), total) for i in range(1, 8)]


def daily_cumulative_shares(values):
    total = ua_day(values, 7)
    return [safediv(ua_day(values, i), total) for i in range(1, 8)]


def daily_increases(values):
    return [
        safediv(ua_day(values, i) - ua_day(values, i - 1), ua_day(values, i - 1))
        for i in range(2, 8)
    ]


def hourly_increases(values):
    return [
        safediv(ua_hour(values, j) - ua_hour(values, j - 1), ua_hour(values, j - 1))
        for j in range(2, 169)
    ]


def avg_hourly_increase_per_day(values):
    hi = {j: hij for j, hij in zip(range(2, 169), hourly_increases(values))}
    out = []
    for i in range(1, 8):
        terms = [hi[j] for j in range((i - 1) * 24 + 1, i * 24 + 1) if j >= 2]
        out.append(math.fsum(terms) / len(terms))
    return out


def majority_interval_scan(values, share: float) -> int:
    """Full definitional scan over every (i, j) window, 0 <= i < j <= 168."""
    total = ua_hour(values, 168)
    if total <= 0:
        return 0
    threshold = share * total
    ua = np.concatenate([[0.0], np.asarray(values, dtype=np.float64)])
    diff = ua[:, None] - ua[None, :]  # diff[j, i] = ua_j - ua_i
    span = np.arange(169)[:, None] - np.arange(169)[None, :]
    ok = (diff >= threshold) & (span > 0)
    return int(span[ok].min())


def majority_interval_loops(values, share: float) -> int:
    """Pure-python double loop; slow, used on a subsample to anchor the
    vectorized scan above."""
    total = ua_hour(values, 168)
    if total <= 0:
        return 0
    threshold = share * total
    best = 168
    for i in range(0, 169):
        for j in range(i + 1, 169):
            if ua_hour(values, j) - ua_hour(values, i) >= threshold and j - i < best:
                best = j - i
    return best


def peak_delay(values, first_hour: int = 2) -> int:
    best_val = 0.0
    best_hour = 0
    for j in range(first_hour, 169):
        inc = ua_hour(values, j) - ua_hour(values, j - 1)
        if inc > best_val:
            best_val = inc
            best_hour = j
    return best_hour


def alive_hours(values) -> int:
    last = 0
    for j in range(1, 169):
        if ua_hour(values, j) - ua_hour(values, j - 1) > 0:
            last = j
    return last


def peak_share(values, first_hour: int = 2) -> float:
    total = ua_hour(values, 168)
    best = 0.0
    for j in range(first_hour, 169):
        best = max(best, safediv(ua_hour(values, j) - ua_hour(values, j - 1), total))
    return best


DEFAULT_PERIODS = ((0, 1), (1, 3), (3, 6), (6, 12), (12, 18), (18, 24))


def period_increments(values, periods=DEFAULT_PERIODS):
    return [ua_hour(values, end) - ua_hour(values, start) for start, end in periods]


def first_day_features(values, periods=DEFAULT_PERIODS):
    total = ua_hour(values, 168)
    inc = period_increments(values, periods)
    shares = [safediv(x, total) for x in inc]
    increases = [safediv(inc[p], inc[p - 1]) if p > 0 else safediv(inc[0], 0.0)
                 for p in range(len(periods))]
    hi = {j: hij for j, hij in zip(range(2, 169), hourly_increases(values))}
    avg = []
    for start, end in periods:
        hours = [j for j in range(start + 1, end + 1) if j >= 2]
        if not hours:
            hours = [2]
        avg.append(math.fsum(hi[j] for j in hours) / len(hours))
    return shares, increases, avg


RATIOS = (
    ("positive", "likes", ("views",)),
    ("negative", "dislikes", ("views",)),
    ("engagement", "comments", ("views",)),
    ("controversiality", "likes", ("likes", "dislikes")),
)

ACTION_INDEX = {"views": 0, "likes": 1, "dislikes": 2, "comments": 3}


def ratio_features(stacked, periods=DEFAULT_PERIODS):
    """stacked: (4, 168) in views/likes/dislikes/comments order; returns the
    76 ratio features in dictionary order."""
    out = []
    for _name, num, dens in RATIOS:
        num_row = stacked[ACTION_INDEX[num]]
        den_rows = [stacked[ACTION_INDEX[d]] for d in dens]
        for i in range(1, 8):  # daily, on day increments
            n = ua_day(num_row, i) - ua_day(num_row, i - 1)
            d = math.fsum(ua_day(r, i) - ua_day(r, i - 1) for r in den_rows)
            out.append(safediv(n, d))
        for i in range(1, 7):  # cumulative through day 6
            n = ua_day(num_row, i)
            d = math.fsum(ua_day(r, i) for r in den_rows)
            out.append(safediv(n, d))
        num_inc = period_increments(num_row, periods)
        den_inc = [period_increments(r, periods) for r in den_rows]
        for p in range(len(periods)):
            out.append(safediv(num_inc[p], math.fsum(d[p] for d in den_inc)))
    return out


# ---------------------------------------------------------------------------
# Random monotone series for property checks, with deliberate edge cases.
# ---------------------------------------------------------------------------


def random_monotone_series(rng: np.random.Generator, integer: bool = True) -> np.ndarray:
    kind = rng.integers(0, 8)
    hours = 168
    if kind == 0:
        return np.zeros(hours)
    if kind == 1:  # single spike at a random hour
        series = np.zeros(hours)
        series[rng.integers(0, hours):] = float(rng.integers(1, 1000))
        return series
    if kind == 2:  # constant rate
        rate = float(rng.integers(1, 20))
        return rate * np.arange(1, hours + 1)
    if kind == 3:  # bursty: exponential decay around a peak
        peak = int(rng.integers(1, hours))
        inc = 0.97 ** np.abs(np.arange(hours) - peak) * rng.integers(10, 5000)
        inc = np.floor(inc) if integer else inc
        return np.cumsum(inc)
    if kind == 4:  # plateaus: sparse integer jumps
        inc = np.zeros(hours)
        jumps = rng.integers(1, 12)
        at = rng.integers(0, hours, size=jumps)
        inc[at] = rng.integers(1, 500, size=jumps)
        return np.cumsum(inc)
    if kind == 5:  # heavy-tailed continuous increments
        inc = rng.lognormal(0, 2, size=hours)
        inc = np.floor(inc) if integer else inc
        return np.cumsum(inc)
    if kind == 6:  # late start
        start = rng.integers(100, hours)
        inc = np.zeros(hours)
        inc[start:] = rng.integers(0, 50, size=hours - start)
        return np.cumsum(inc)
    # early stop
    stop = int(rng.integers(1, 60))
    inc = np.zeros(hours)
    inc[:stop] = rng.integers(0, 50, size=stop)
    return np.cumsum(inc)


def random_video_stack(rng: np.random.Generator) -> np.ndarray:
    """(4, 168) stacked series where reactions never exceed views."""
    views_inc = np.diff(random_monotone_series(rng), prepend=0.0)
    likes_inc = np.floor(views_inc * rng.uniform(0, 0.2))
    dislikes_inc = np.floor(views_inc * rng.uniform(0, 0.1))
    comments_inc = np.floor(views_inc * rng.uniform(0, 0.05))
    return np.cumsum(
        np.stack([views_inc, likes_inc, dislikes_inc, comments_inc]), axis=1
    )
