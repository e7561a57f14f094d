import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zonecast.core import (HourlyTimestamp, TimeSeries, Unit, align,
                           sample_mean_sd, znormalize)
from zonecast.errors import EmptyIntersection, TooShort, ZeroVariance


def series(values, start=HourlyTimestamp(2020, 6, 1, 0), unit=Unit.MW):
    return TimeSeries(unit, start, np.asarray(values, dtype=float))


class TestHourlyTimestamp:
    def test_rejects_invalid_date(self):
        with pytest.raises(ValueError):
            HourlyTimestamp(2021, 2, 29, 0)
        with pytest.raises(ValueError):
            HourlyTimestamp(2020, 6, 1, 24)

    def test_ordering_is_chronological(self):
        a = HourlyTimestamp(2020, 6, 1, 23)
        b = HourlyTimestamp(2020, 6, 2, 0)
        assert a < b
        assert b.to_epoch_hour() - a.to_epoch_hour() == 1

    def test_epoch_roundtrip(self):
        t = HourlyTimestamp(2020, 6, 15, 7)
        assert HourlyTimestamp.from_epoch_hour(t.to_epoch_hour()) == t

    def test_parse_isoformat_roundtrip(self):
        t = HourlyTimestamp(2020, 12, 31, 23)
        assert HourlyTimestamp.parse(t.isoformat()) == t

    def test_parse_rejects_off_hour(self):
        with pytest.raises(ValueError):
            HourlyTimestamp.parse("2020-06-01T12:30")


class TestTimeSeries:
    def test_rejects_non_finite(self):
        for bad in (np.nan, np.inf, -np.inf):
            with pytest.raises(ValueError):
                series([1.0, bad, 3.0])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            series([])

    def test_values_are_immutable(self):
        s = series([1, 2, 3])
        with pytest.raises(ValueError):
            s.values[0] = 9.0

    def test_points_are_hourly(self):
        s = series([1, 2, 3])
        stamps = [ts.to_epoch_hour() for ts, _ in s.points()]
        assert np.all(np.diff(stamps) == 1)


class TestAlign:
    def test_identical_indices_unchanged(self):
        a, b = series([1, 2, 3]), series([4, 5, 6])
        out = align([a, b])
        assert np.array_equal(out[0].values, a.values)
        assert np.array_equal(out[1].values, b.values)

    def test_overlap_truncates_to_intersection(self):
        start = HourlyTimestamp(2020, 6, 1, 0)
        a = series(range(11), start=start)                      # hours 0..10
        b = series(range(11), start=start.add_hours(5))         # hours 5..15
        out = align([a, b])
        assert all(len(s) == 6 for s in out)
        assert out[0].start == start.add_hours(5)
        assert np.array_equal(out[0].values, [5, 6, 7, 8, 9, 10])

    def test_disjoint_ranges_raise(self):
        start = HourlyTimestamp(2020, 6, 1, 0)
        a = series(range(4), start=start)                       # hours 0..3
        b = series(range(3), start=start.add_hours(10))         # hours 10..12
        with pytest.raises(EmptyIntersection):
            align([a, b])

    def test_idempotent(self):
        start = HourlyTimestamp(2020, 6, 1, 0)
        a = series(range(11), start=start)
        b = series(range(11), start=start.add_hours(5))
        once = align([a, b])
        twice = align(once)
        for s1, s2 in zip(once, twice):
            assert s1.start == s2.start
            assert np.array_equal(s1.values, s2.values)


class TestZnormalize:
    def test_symmetric_three_point(self):
        z = znormalize(series([1, 2, 3]))
        assert z.unit is Unit.DIMENSIONLESS
        assert np.allclose(z.values, [-1, 0, 1])

    def test_constant_raises(self):
        with pytest.raises(ZeroVariance):
            znormalize(series([5, 5, 5]))

    def test_idempotent(self):
        rng = np.random.default_rng(7)
        x = series(rng.normal(10, 3, 200))
        once = znormalize(x)
        twice = znormalize(once)
        assert np.max(np.abs(twice.values - once.values)) < 1e-12

    @given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=60))
    @settings(max_examples=80, deadline=None)
    def test_output_moments(self, values):
        arr = np.asarray(values)
        if np.std(arr, ddof=1) < 1e-6:
            return
        z = znormalize(series(arr))
        assert abs(np.mean(z.values)) < 1e-10
        assert abs(np.std(z.values, ddof=1) - 1.0) < 1e-10


class TestSampleMeanSd:
    def test_simple_arithmetic(self):
        assert sample_mean_sd(series([2, 4, 6])) == (4.0, 2.0)

    def test_constant(self):
        assert sample_mean_sd(series([0, 0, 0, 0])) == (0.0, 0.0)

    def test_too_short(self):
        with pytest.raises(TooShort):
            sample_mean_sd(series([1.0]))

    def test_statistical_oracle(self):
        # 1e4 seeded standard normal draws
        draws = np.random.default_rng(123).standard_normal(10_000)
        mean, sd = sample_mean_sd(series(draws))
        assert abs(mean) < 0.05
        assert 0.95 < sd < 1.05
