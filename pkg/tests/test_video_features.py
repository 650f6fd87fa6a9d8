import numpy as np
import pytest

import oracles
from attncycles.types import ACTIONS
from attncycles.video_features import (
    ATTENTION_FEATURES,
    PER_ACTION_FEATURES,
    AttentionConfig,
    FirstDayPeriods,
    attention_feature_names,
    daily_block,
    first_day_block,
    hourly_increases,
    per_action_feature_names,
    ratio_block,
    safediv,
    shape_features,
)
from conftest import make_series


def day_profile(day_totals) -> np.ndarray:
    """Series whose cumulative count is flat within each day."""
    values = np.zeros(168)
    for i, total in enumerate(day_totals):
        values[i * 24 : (i + 1) * 24] = total
    return values


class TestSafediv:
    def test_zero_denominator(self):
        assert safediv(5.0, 0.0) == 0.0
        assert safediv(0.0, 0.0) == 0.0

    def test_elementwise(self):
        out = safediv(np.array([1.0, 2.0]), np.array([2.0, 0.0]))
        assert np.array_equal(out, [0.5, 0.0])


class TestDailyBlock:
    def test_reference_profile(self):
        out = daily_block(day_profile([50, 75, 90, 95, 98, 99, 100]))
        assert np.allclose(out[:7], [0.50, 0.25, 0.15, 0.05, 0.03, 0.01, 0.01])
        assert np.allclose(out[7:14], [0.50, 0.75, 0.90, 0.95, 0.98, 0.99, 1.00])
        assert np.allclose(
            out[14:20], [0.5, 0.2, 0.0556, 0.0316, 0.0102, 0.0101], atol=1e-4
        )

    def test_front_loaded(self):
        out = daily_block(day_profile([100] * 7))
        assert np.allclose(out[:7], [1, 0, 0, 0, 0, 0, 0])
        assert np.allclose(out[7:14], 1.0)
        assert np.allclose(out[14:20], 0.0)

    def test_all_zero(self):
        assert np.all(daily_block(np.zeros(168)) == 0)

    def test_first_day_average_uses_23_terms(self):
        # 1 action in hour 2 only: HI_2 = safediv(1, 1) ... build so HI_3 is
        # the single nonzero term: hour2 -> 1, hour3 -> 2 gives HI_3 = 1.
        series = make_series({2: 1, 3: 1})
        out = daily_block(series)
        hi = hourly_increases(series)
        assert out[20] == pytest.approx(hi[:23].sum() / 23)


class TestHourlyIncreases:
    def test_doubling_growth(self):
        assert np.allclose(hourly_increases(2.0 ** np.arange(1, 169)), 1.0)

    def test_flat_after_first_hour(self):
        assert np.all(hourly_increases(np.full(168, 10.0)) == 0)

    def test_division_guard(self):
        values = make_series({3: 5})
        hi = hourly_increases(values)
        assert hi[1] == 0.0  # growth out of a zero cumulative count


class TestShapeFeatures:
    def test_single_hour_spike(self):
        out = shape_features(make_series({5: 100}))
        assert list(out) == [1, 1, 1, 5, 5, 1.0]

    def test_uniform_rate(self):
        out = shape_features(np.arange(1.0, 169.0))
        assert list(out[:3]) == [84, 118, 152]
        assert out[3] == 2 and out[4] == 168
        assert out[5] == pytest.approx(1 / 168)

    def test_all_zero(self):
        assert np.all(shape_features(np.zeros(168)) == 0)

    def test_first_hour_excluded_by_default(self):
        series = make_series({1: 100})
        out = shape_features(series)
        assert out[3] == 0 and out[5] == 0  # no eligible peak after hour 1
        assert out[4] == 1  # still counts as activity
        out_inclusive = shape_features(series, AttentionConfig(include_first_hour=True))
        assert out_inclusive[3] == 1 and out_inclusive[5] == 1.0


class TestFirstDayBlock:
    def test_all_actions_in_hour_one(self):
        out = first_day_block(make_series({1: 100}))
        assert np.allclose(out[:6], [1, 0, 0, 0, 0, 0])
        assert np.allclose(out[6:12], 0)

    def test_uniform_shares_match_period_lengths(self):
        out = first_day_block(np.arange(1.0, 169.0))
        assert np.allclose(out[:6], np.array([1, 2, 3, 6, 6, 6]) / 168)

    def test_zero_series(self):
        assert np.all(first_day_block(np.zeros(168)) == 0)

    def test_period_validation(self):
        with pytest.raises(ValueError):
            FirstDayPeriods(((0, 2), (1, 3), (3, 6), (6, 12), (12, 18), (18, 24)))
        with pytest.raises(ValueError):
            FirstDayPeriods(((0, 1), (1, 3), (3, 6), (6, 12), (12, 18)))


class TestRatioBlock:
    def test_daily_ratio(self):
        views = day_profile([100, 100, 100, 100, 100, 100, 100])
        likes = day_profile([10, 10, 10, 10, 10, 10, 10])
        stacked = np.stack([views, likes, np.zeros(168), np.zeros(168)])
        out = ratio_block(stacked)
        names = [n for n in attention_feature_names() if n.startswith("ratio.")]
        value = dict(zip(names, out))
        assert value["ratio.positive.daily.d1"] == pytest.approx(0.1)

    def test_cumulative_controversiality(self):
        likes = day_profile([10, 20, 30, 40, 50, 60, 70])
        dislikes = day_profile([5, 8, 10, 12, 14, 16, 18])
        stacked = np.stack([day_profile([100] * 7), likes, dislikes, np.zeros(168)])
        out = ratio_block(stacked)
        names = [n for n in attention_feature_names() if n.startswith("ratio.")]
        value = dict(zip(names, out))
        assert value["ratio.controversiality.cum.d3"] == pytest.approx(30 / 40)

    def test_zero_views_safe(self):
        stacked = np.zeros((4, 168))
        assert np.all(ratio_block(stacked) == 0)


class TestDictionary:
    def test_per_action_block_is_218(self):
        assert len(per_action_feature_names("views", FirstDayPeriods())) == 218
        assert PER_ACTION_FEATURES == 218

    def test_total_is_948_with_documented_decomposition(self):
        names = attention_feature_names()
        assert len(names) == ATTENTION_FEATURES == 948
        assert 4 * 218 + 4 * 19 == 948
        assert len(set(names)) == len(names)

    def test_order_is_action_major_then_ratios(self):
        names = attention_feature_names()
        for a, action in enumerate(ACTIONS):
            block = names[a * 218 : (a + 1) * 218]
            assert all(n.startswith(f"{action}.") for n in block)
        assert all(n.startswith("ratio.") for n in names[4 * 218 :])


# ---------------------------------------------------------------------------
# Oracle suite: every family against the brute-force definitions, plus the
# documented invariants, over randomized monotone series.
# ---------------------------------------------------------------------------


def extract_all(values: np.ndarray) -> dict:
    return {
        "daily": daily_block(values),
        "hi": hourly_increases(values),
        "shape": shape_features(values),
        "first_day": first_day_block(values),
    }


class TestOracleEquivalence:
    N_SERIES = 300

    def test_families_match_bruteforce(self):
        rng = np.random.default_rng(2024)
        for _ in range(self.N_SERIES):
            values = oracles.random_monotone_series(rng)
            got = extract_all(values)
            assert np.allclose(got["daily"][:7], oracles.daily_shares(values), atol=1e-9)
            assert np.allclose(
                got["daily"][7:14], oracles.daily_cumulative_shares(values), atol=1e-9
            )
            assert np.allclose(got["daily"][14:20], oracles.daily_increases(values), atol=1e-9)
            assert np.allclose(
                got["daily"][20:27], oracles.avg_hourly_increase_per_day(values), atol=1e-9
            )
            assert np.allclose(got["hi"], oracles.hourly_increases(values), atol=1e-9)
            for t, share in enumerate((0.5, 0.7, 0.9)):
                assert got["shape"][t] == oracles.majority_interval_scan(values, share)
            assert got["shape"][3] == oracles.peak_delay(values)
            assert got["shape"][4] == oracles.alive_hours(values)
            assert got["shape"][5] == pytest.approx(oracles.peak_share(values), abs=1e-9)
            shares, increases, avg = oracles.first_day_features(values)
            assert np.allclose(got["first_day"][:6], shares, atol=1e-9)
            assert np.allclose(got["first_day"][6:12], increases, atol=1e-9)
            assert np.allclose(got["first_day"][12:18], avg, atol=1e-9)

    def test_ratio_block_matches_bruteforce(self):
        rng = np.random.default_rng(77)
        for _ in range(100):
            stacked = oracles.random_video_stack(rng)
            assert np.allclose(ratio_block(stacked), oracles.ratio_features(stacked),
                               atol=1e-9)

    def test_window_scan_matches_slow_loops(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            values = oracles.random_monotone_series(rng)
            for share in (0.5, 0.7, 0.9):
                assert oracles.majority_interval_scan(values, share) == \
                    oracles.majority_interval_loops(values, share)


class TestInvariants:
    def test_share_and_window_invariants(self):
        rng = np.random.default_rng(31)
        for _ in range(300):
            values = oracles.random_monotone_series(rng)
            total = values[-1]
            out = extract_all(values)
            d, dc = out["daily"][:7], out["daily"][7:14]
            if total > 0:
                assert d.sum() == pytest.approx(1.0, abs=1e-9)
                assert dc[-1] == 1.0
            else:
                assert np.all(d == 0) and np.all(dc == 0)
            assert np.all(np.diff(dc) >= -1e-12)
            mi = out["shape"][:3]
            assert mi[0] <= mi[1] <= mi[2]
            assert np.all((0 <= mi) & (mi <= 168))
            pdi, ai, ps = out["shape"][3], out["shape"][4], out["shape"][5]
            assert 0.0 <= ps <= 1.0
            assert pdi == 0 or 2 <= pdi <= 168
            assert 0 <= ai <= 168
            if pdi > 0 and ai > 0:
                assert ai >= pdi
            if total > 0:
                increments = np.diff(values, prepend=0.0)
                assert ps >= increments[1:].max() / total - 1e-12

    def test_count_scaling_invariance_power_of_two(self):
        rng = np.random.default_rng(13)
        for _ in range(60):
            stacked = oracles.random_video_stack(rng)
            base_blocks = [extract_all(stacked[a]) for a in range(4)]
            base_ratio = ratio_block(stacked)
            for c in (0.5, 2.0, 8.0):
                scaled = c * stacked
                for a in range(4):
                    got = extract_all(scaled[a])
                    for key in ("daily", "hi", "shape", "first_day"):
                        assert np.array_equal(got[key], base_blocks[a][key]), (c, key)
                assert np.array_equal(ratio_block(scaled), base_ratio)

    def test_count_scaling_invariance_generic_factor(self):
        rng = np.random.default_rng(14)
        for _ in range(40):
            stacked = np.cumsum(rng.uniform(0, 5, size=(4, 168)), axis=1)
            stacked[1:] *= 0.1  # reactions below views
            base = [extract_all(stacked[a]) for a in range(4)]
            scaled = 3.0 * stacked
            for a in range(4):
                got = extract_all(scaled[a])
                assert np.array_equal(got["shape"][:5], base[a]["shape"][:5])
                assert np.allclose(got["daily"], base[a]["daily"], atol=1e-9)
                assert np.allclose(got["hi"], base[a]["hi"], atol=1e-9)
                assert np.allclose(got["first_day"], base[a]["first_day"], atol=1e-9)
                assert got["shape"][5] == pytest.approx(base[a]["shape"][5], abs=1e-12)

    def test_ratio_ranges(self):
        rng = np.random.default_rng(15)
        names = [n for n in attention_feature_names() if n.startswith("ratio.")]
        for _ in range(60):
            stacked = oracles.random_video_stack(rng)
            value = dict(zip(names, ratio_block(stacked)))
            for name, v in value.items():
                if ".controversiality." in name:
                    assert 0.0 <= v <= 1.0
                else:
                    assert v >= 0.0
