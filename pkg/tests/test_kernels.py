import numpy as np
import pytest

import oracles
from attncycles import _kernels

THRESHOLDS = np.array([0.5, 0.7, 0.9])

needs_numba = pytest.mark.skipif(
    not _kernels.NUMBA_ENABLED, reason="numba backend disabled or unavailable"
)


def random_series_batch(n, seed):
    rng = np.random.default_rng(seed)
    return np.stack([oracles.random_monotone_series(rng) for _ in range(n)])


class TestShapeScan:
    def test_numpy_matches_definitions(self):
        batch = random_series_batch(100, 3)
        out = _kernels.shape_scan_numpy(batch, THRESHOLDS, 2)
        for row, values in zip(out, batch):
            for t, share in enumerate((0.5, 0.7, 0.9)):
                assert row[t] == oracles.majority_interval_scan(values, share)
            assert row[3] == oracles.peak_delay(values)
            assert row[4] == oracles.alive_hours(values)
            assert row[5] == pytest.approx(oracles.peak_share(values), abs=1e-12)

    @needs_numba
    def test_backends_agree_exactly(self):
        batch = random_series_batch(400, 4)
        jit = _kernels.shape_scan_numba(batch, THRESHOLDS, 2)
        ref = _kernels.shape_scan_numpy(batch, THRESHOLDS, 2)
        assert np.array_equal(jit, ref)

    @needs_numba
    def test_backends_agree_with_first_hour(self):
        batch = random_series_batch(100, 5)
        jit = _kernels.shape_scan_numba(batch, THRESHOLDS, 1)
        ref = _kernels.shape_scan_numpy(batch, THRESHOLDS, 1)
        assert np.array_equal(jit, ref)

    def test_all_zero_row(self):
        out = _kernels.shape_scan(np.zeros((1, 168)), THRESHOLDS, 2)
        assert np.all(out == 0)


class TestBestSplit:
    def test_numpy_finds_obvious_split(self):
        X = np.concatenate([np.zeros(10), np.ones(10)])[:, None]
        g = np.concatenate([np.full(10, -1.0), np.full(10, 1.0)])
        f, thr, gain = _kernels.best_split_numpy(X, g, 2)
        assert f == 0 and thr == pytest.approx(0.5) and gain > 0

    def test_no_split_on_constant_feature(self):
        X = np.ones((20, 3))
        g = np.random.default_rng(0).normal(size=20)
        assert _kernels.best_split_numpy(X, g, 2)[0] == -1

    def test_min_leaf_respected(self):
        X = np.arange(10, dtype=np.float64)[:, None]
        g = np.array([10.0] + [0.0] * 9)  # tempting 1-vs-9 split
        f, thr, gain = _kernels.best_split_numpy(X, g, 3)
        if f >= 0:
            left = (X[:, 0] <= thr).sum()
            assert 3 <= left <= 7

    @needs_numba
    def test_backends_pick_identical_splits(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            m = int(rng.integers(8, 200))
            d = int(rng.integers(1, 30))
            X = rng.normal(size=(m, d))
            g = rng.normal(size=m)
            got = _kernels.best_split_numba(X, g, 3)
            ref = _kernels.best_split_numpy(X, g, 3)
            assert got[0] == ref[0]
            assert got[1] == pytest.approx(ref[1], abs=1e-12)
            assert got[2] == pytest.approx(ref[2], rel=1e-9)

    def test_exhaustive_reference(self):
        # Compare against a direct O(m^2 d) scan of every boundary.
        rng = np.random.default_rng(10)
        for _ in range(20):
            m, d = 30, 4
            X = rng.normal(size=(m, d))
            g = rng.normal(size=m)
            best = (-1, 0.0, 0.0)
            total = g.sum()
            parent = total * total / m
            for f in range(d):
                order = np.argsort(X[:, f])
                for p in range(m - 1):
                    nl, nr = p + 1, m - p - 1
                    if nl < 3 or nr < 3:
                        continue
                    if X[order[p], f] == X[order[p + 1], f]:
                        continue
                    sl = g[order[: p + 1]].sum()
                    sr = total - sl
                    gain = sl * sl / nl + sr * sr / nr - parent
                    if gain > best[2]:
                        best = (f, 0.5 * (X[order[p], f] + X[order[p + 1], f]), gain)
            got = _kernels.best_split(X, g, 3)
            assert got[0] == best[0]
            assert got[2] == pytest.approx(best[2], rel=1e-9)


class TestBackendSelection:
    def test_active_backend_reported(self):
        assert _kernels.backend_name() in ("numba", "numpy")
        assert _kernels.NUMBA_ENABLED == (_kernels.backend_name() == "numba")

    def test_env_flag_parser(self, monkeypatch):
        monkeypatch.setenv(_kernels._ENV_FLAG, "1")
        assert _kernels._numba_disabled_by_env()
        monkeypatch.setenv(_kernels._ENV_FLAG, "no")
        assert not _kernels._numba_disabled_by_env()
        monkeypatch.delenv(_kernels._ENV_FLAG)
        assert not _kernels._numba_disabled_by_env()
