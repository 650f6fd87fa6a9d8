"""Benchmark the jitted kernels against their pure-numpy fallbacks.

Runs the two hot call sites at full-corpus scale: the per-series shape
scan (window lengths / peaks) and the exact greedy split search used by
tree boosting. Invoke from the repository root:

    python benchmarks/bench_kernels.py --series 20000 --rows 3000 --cols 300

Set ATTNCYCLES_DISABLE_NUMBA=1 to confirm the numpy path is the one the
package would actually use.
"""
import argparse
import time

import numpy as np

from attncycles import _kernels

THRESHOLDS = np.array([0.5, 0.7, 0.9])


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_shape_scan(n_series, repeats):
    rng = np.random.default_rng(0)
    increments = rng.exponential(size=(n_series, 168)) * rng.integers(
        1, 100, size=(n_series, 1)
    )
    series = np.cumsum(increments, axis=1)
    rows = {}
    rows["numpy"] = time_call(lambda: _kernels.shape_scan_numpy(series, THRESHOLDS, 2),
                              repeats)
    if _kernels.shape_scan_numba is not None:
        _kernels.shape_scan_numba(series[:2], THRESHOLDS, 2)  # compile
        rows["numba"] = time_call(
            lambda: _kernels.shape_scan_numba(series, THRESHOLDS, 2), repeats
        )
        ref = _kernels.shape_scan_numpy(series[:200], THRESHOLDS, 2)
        jit = _kernels.shape_scan_numba(series[:200], THRESHOLDS, 2)
        assert np.array_equal(ref, jit), "backends disagree"
    return rows


def bench_best_split(n_rows, n_cols, repeats):
    rng = np.random.default_rng(1)
    X = rng.normal(size=(n_rows, n_cols))
    g = rng.normal(size=n_rows)
    rows = {}
    rows["numpy"] = time_call(lambda: _kernels.best_split_numpy(X, g, 5), repeats)
    if _kernels.best_split_numba is not None:
        _kernels.best_split_numba(X[:16], g[:16], 2)  # compile
        rows["numba"] = time_call(lambda: _kernels.best_split_numba(X, g, 5), repeats)
        assert _kernels.best_split_numba(X, g, 5)[0] == _kernels.best_split_numpy(X, g, 5)[0]
    return rows


def print_table(name, rows):
    print(f"\n{name}")
    for backend, seconds in rows.items():
        print(f"  {backend:>6}: {seconds * 1e3:9.2f} ms")
    if "numba" in rows and "numpy" in rows:
        print(f"  speedup: {rows['numpy'] / rows['numba']:.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--series", type=int, default=20_000,
                        help="number of cumulative series for the shape scan")
    parser.add_argument("--rows", type=int, default=3_000,
                        help="node rows for the split search")
    parser.add_argument("--cols", type=int, default=300,
                        help="node features for the split search")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    print(f"active backend: {_kernels.backend_name()}")
    print_table(
        f"shape scan over {args.series} series x 168 hours",
        bench_shape_scan(args.series, args.repeats),
    )
    print_table(
        f"greedy split search on a {args.rows} x {args.cols} node",
        bench_best_split(args.rows, args.cols, args.repeats),
    )


if __name__ == "__main__":
    main()
