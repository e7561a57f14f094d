import numpy as np
import pytest

from zonecast.core import HourlyTimestamp, TimeSeries, Unit
from zonecast.errors import NoData, TooShort
from zonecast.ingest import (GappedSeries, clean, parse_load_file,
                             parse_temperature_file, write_load_file,
                             write_temperature_file)

START = HourlyTimestamp(2020, 6, 1, 0)
H0 = START.to_epoch_hour()


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestParseLoadFile:
    def test_well_formed(self, tmp_path):
        p = write(tmp_path, "load.csv",
                  "timestamp,WEST,FAR_WEST\n"
                  "2020-06-01T00:00,100.5,200.5\n"
                  "2020-06-01T01:00,101.0,201.0\n"
                  "2020-06-01T02:00,102.0,202.0\n")
        zones, report = parse_load_file(p)
        assert set(zones) == {"WEST", "FAR_WEST"}
        assert len(zones["WEST"]) == 3
        assert np.array_equal(zones["FAR_WEST"].values, [200.5, 201.0, 202.0])
        assert report.rows_read == 3 and report.rows_dropped == 0

    def test_bad_value_row_dropped(self, tmp_path):
        p = write(tmp_path, "load.csv",
                  "timestamp,WEST\n"
                  "2020-06-01T00:00,100\n"
                  "2020-06-01T01:00,oops\n"
                  "2020-06-01T02:00,102\n")
        zones, report = parse_load_file(p)
        assert report.rows_dropped == 1
        assert np.array_equal(zones["WEST"].hours, [H0, H0 + 2])

    def test_empty_file(self, tmp_path):
        with pytest.raises(NoData):
            parse_load_file(write(tmp_path, "load.csv", ""))

    def test_header_only(self, tmp_path):
        with pytest.raises(NoData):
            parse_load_file(write(tmp_path, "load.csv", "timestamp,WEST\n"))

    def test_bad_header(self, tmp_path):
        from zonecast.errors import FormatError
        with pytest.raises(FormatError):
            parse_load_file(write(tmp_path, "load.csv", "time,WEST\n1,2\n"))


class TestParseTemperatureFile:
    def test_duplicate_hour_last_wins(self, tmp_path):
        p = write(tmp_path, "temp.csv",
                  "timestamp,station,temp_f\n"
                  "2020-06-01T00:00,WEST,70\n"
                  "2020-06-01T00:00,WEST,75\n")
        stations, report = parse_temperature_file(p)
        assert stations["WEST"].values[0] == 75.0
        assert report.rows_dropped == 1

    def test_subhourly_aggregated_by_mean(self, tmp_path):
        # hand-computed: (70 + 72 + 77) / 3 = 73
        p = write(tmp_path, "temp.csv",
                  "timestamp,station,temp_f\n"
                  "2020-06-01T00:05,WEST,70\n"
                  "2020-06-01T00:25,WEST,72\n"
                  "2020-06-01T00:55,WEST,77\n")
        stations, _ = parse_temperature_file(p)
        assert stations["WEST"].values[0] == pytest.approx(73.0)

    def test_outlier_dropped(self, tmp_path):
        p = write(tmp_path, "temp.csv",
                  "timestamp,station,temp_f\n"
                  "2020-06-01T00:00,WEST,70\n"
                  "2020-06-01T01:00,WEST,900\n"
                  "2020-06-01T02:00,WEST,-80\n")
        stations, report = parse_temperature_file(p)
        assert len(stations["WEST"]) == 1
        assert report.rows_dropped == 2

    def test_interleaved_stations(self, tmp_path):
        p = write(tmp_path, "temp.csv",
                  "timestamp,station,temp_f\n"
                  "2020-06-01T00:00,WEST,70\n"
                  "2020-06-01T00:00,FAR_WEST,80\n"
                  "2020-06-01T01:00,WEST,71\n"
                  "2020-06-01T01:00,FAR_WEST,81\n")
        stations, _ = parse_temperature_file(p)
        assert np.array_equal(stations["WEST"].values, [70, 71])
        assert np.array_equal(stations["FAR_WEST"].values, [80, 81])


class TestClean:
    def test_short_gap_interpolated(self):
        g = GappedSeries(Unit.MW, np.array([H0, H0 + 3]), np.array([10.0, 16.0]))
        ts, report = clean(g)
        assert np.allclose(ts.values, [10, 12, 14, 16])
        assert report.rows_interpolated == 2

    def test_long_gap_keeps_longest_segment(self):
        hours = np.concatenate([H0 + np.arange(5), H0 + 12 + np.arange(20)])
        g = GappedSeries(Unit.MW, hours, np.arange(25.0))
        ts, _ = clean(g)  # 7-hour gap: not filled
        assert len(ts) == 20
        assert ts.start_hour == H0 + 12

    def test_boundary_gap_of_six_is_filled(self):
        g = GappedSeries(Unit.MW, np.array([H0, H0 + 7]), np.array([0.0, 7.0]))
        ts, report = clean(g)
        assert np.allclose(ts.values, np.arange(8.0))
        assert report.rows_interpolated == 6

    def test_no_gaps_identity(self):
        g = GappedSeries(Unit.MW, H0 + np.arange(10), np.arange(10.0))
        ts, report = clean(g)
        assert np.array_equal(ts.values, g.values)
        assert report.rows_interpolated == 0

    def test_too_short_for_lags(self):
        g = GappedSeries(Unit.MW, H0 + np.arange(100), np.arange(100.0))
        with pytest.raises(TooShort):
            clean(g, require_lag_support=True)


class TestRoundTrip:
    def test_load_file_roundtrip(self, tmp_path):
        series = {"WEST": TimeSeries(Unit.MW, START, np.array([1.25, 2.5, 3.75])),
                  "FAR_WEST": TimeSeries(Unit.MW, START, np.array([0.1, 0.2, 0.3]))}
        p = tmp_path / "load.csv"
        write_load_file(p, series)
        parsed, _ = parse_load_file(p)
        for z in series:
            assert np.array_equal(parsed[z].values, series[z].values)

    def test_temperature_file_roundtrip(self, tmp_path):
        series = {"WEST": TimeSeries(Unit.DEG_F, START, np.array([70.5, 71.0]))}
        p = tmp_path / "temp.csv"
        write_temperature_file(p, series)
        parsed, _ = parse_temperature_file(p)
        assert np.array_equal(parsed["WEST"].values, series["WEST"].values)
