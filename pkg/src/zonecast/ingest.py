"""File ingestion and cleaning for zonal load and station temperature data.

Load files: ``timestamp,<zone1>,<zone2>,...`` with one row per hour.
Temperature files: ``timestamp,station,temp_f`` with stations interleaved.
Timestamps are ``YYYY-MM-DDTHH:00``. Parsing is total: malformed rows are
counted and dropped, never raised past the typed errors below.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import HourlyTimestamp, TimeSeries, Unit
from .errors import FormatError, NoData, TooShort

log = logging.getLogger(__name__)

#: Gaps of at most this many consecutive missing hours are interpolated.
MAX_INTERP_GAP = 6
#: Physically plausible temperature bounds (degF); outside values are dropped.
TEMP_BOUNDS = (-60.0, 140.0)
#: Minimum contiguous hours needed downstream for two-week lag features.
MIN_SEGMENT_FOR_LAGS = 337


@dataclass
class CleaningReport:
    rows_read: int = 0
    rows_interpolated: int = 0
    rows_dropped: int = 0
    per_series: dict[str, dict[str, int]] = field(default_factory=dict)

    @property
    def rows_kept(self) -> int:
        return self.rows_read - self.rows_dropped

    def note(self, series_id: str, **counts: int) -> None:
        entry = self.per_series.setdefault(series_id, {})
        for k, v in counts.items():
            entry[k] = entry.get(k, 0) + v


@dataclass(frozen=True)
class GappedSeries:
    """Pre-cleaning series: strictly increasing epoch hours, gaps allowed."""

    unit: Unit
    hours: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.hours, dtype=np.int64)
        v = np.asarray(self.values, dtype=float)
        if h.ndim != 1 or h.shape != v.shape:
            raise ValueError("hours and values must be matching 1-D arrays")
        if h.size > 1 and not np.all(np.diff(h) > 0):
            raise ValueError("hours must be strictly increasing")
        object.__setattr__(self, "hours", h)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.hours)


def clean(series: GappedSeries, report: CleaningReport | None = None,
          series_id: str = "", require_lag_support: bool = False) -> tuple[TimeSeries, CleaningReport]:
    """Fill short gaps by linear interpolation; keep the longest segment.

    Gaps of up to MAX_INTERP_GAP missing hours are filled; a longer gap splits
    the series and the longest contiguous segment wins.
    """
    if report is None:
        report = CleaningReport(rows_read=len(series))
    if len(series) == 0:
        raise NoData("empty series")

    h, v = series.hours, series.values
    # segment boundaries at gaps wider than the interpolation limit
    gap_after = np.diff(h) - 1
    breaks = np.flatnonzero(gap_after > MAX_INTERP_GAP)
    seg_bounds = np.concatenate(([0], breaks + 1, [len(h)]))
    best = max(range(len(seg_bounds) - 1),
               key=lambda i: h[seg_bounds[i + 1] - 1] - h[seg_bounds[i]])
    i0, i1 = seg_bounds[best], seg_bounds[best + 1]
    seg_h, seg_v = h[i0:i1], v[i0:i1]

    full_h = np.arange(seg_h[0], seg_h[-1] + 1, dtype=np.int64)
    full_v = np.interp(full_h, seg_h, seg_v)
    n_interp = len(full_h) - len(seg_h)
    report.rows_interpolated += n_interp
    report.note(series_id or "series", interpolated=n_interp,
                outside_longest_segment=len(h) - (i1 - i0))

    if require_lag_support and len(full_h) < MIN_SEGMENT_FOR_LAGS:
        raise TooShort(f"longest segment has {len(full_h)} hours, "
                       f"need {MIN_SEGMENT_FOR_LAGS} for lag features")
    ts = TimeSeries(series.unit, HourlyTimestamp.from_epoch_hour(int(full_h[0])), full_v)
    return ts, report


def _parse_row_timestamp(text: str) -> int:
    return HourlyTimestamp.parse(text).to_epoch_hour()


def parse_load_file(path: str | Path) -> tuple[dict[str, GappedSeries], CleaningReport]:
    path = Path(path)
    report = CleaningReport()
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise NoData(f"{path}: empty file")
        if len(header) < 2 or header[0].strip() != "timestamp":
            raise FormatError(f"{path}: expected header 'timestamp,<zone>,...'")
        zones = [z.strip() for z in header[1:]]
        if len(set(zones)) != len(zones) or any(not z for z in zones):
            raise FormatError(f"{path}: zone columns must be unique and non-empty")

        rows: dict[str, dict[int, float]] = {z: {} for z in zones}
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            report.rows_read += 1
            if len(row) != len(header):
                report.rows_dropped += 1
                report.note("_file", malformed=1)
                continue
            try:
                hour = _parse_row_timestamp(row[0])
                vals = [float(c) for c in row[1:]]
                if not all(np.isfinite(vals)):
                    raise ValueError("non-finite value")
            except ValueError:
                report.rows_dropped += 1
                report.note("_file", malformed=1)
                continue
            for z, val in zip(zones, vals):
                if hour in rows[z]:
                    report.note(z, duplicate=1)
                rows[z][hour] = val

    if report.rows_read == report.rows_dropped:
        raise NoData(f"{path}: no valid rows")
    out = {}
    for z in zones:
        hours = np.array(sorted(rows[z]), dtype=np.int64)
        vals = np.array([rows[z][h] for h in hours])
        out[z] = GappedSeries(Unit.MW, hours, vals)
    return out, report


def parse_temperature_file(path: str | Path) -> tuple[dict[str, GappedSeries], CleaningReport]:
    """Parse interleaved station temperature rows.

    Sub-hourly readings are averaged into their hour; duplicate full-hour rows
    keep the last occurrence; readings outside TEMP_BOUNDS are dropped.
    """
    path = Path(path)
    report = CleaningReport()
    lo, hi = TEMP_BOUNDS
    # per station, per hour: list of in-hour readings (mean taken at the end)
    acc: dict[str, dict[int, list[float]]] = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise NoData(f"{path}: empty file")
        if [c.strip() for c in header] != ["timestamp", "station", "temp_f"]:
            raise FormatError(f"{path}: expected header 'timestamp,station,temp_f'")
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            report.rows_read += 1
            if len(row) != 3:
                report.rows_dropped += 1
                report.note("_file", malformed=1)
                continue
            station = row[1].strip()
            try:
                d = row[0].strip()
                ts = HourlyTimestamp.parse(d[:14] + "00" if len(d) >= 16 else d)
                val = float(row[2])
                if not np.isfinite(val):
                    raise ValueError("non-finite")
            except ValueError:
                report.rows_dropped += 1
                report.note("_file", malformed=1)
                continue
            if not (lo <= val <= hi):
                report.rows_dropped += 1
                report.note(station or "_file", outlier=1)
                continue
            if not station:
                report.rows_dropped += 1
                report.note("_file", malformed=1)
                continue
            hour = ts.to_epoch_hour()
            d_min = row[0].strip()[14:16] if len(row[0].strip()) >= 16 else "00"
            acc.setdefault(station, {}).setdefault(hour, []).append((d_min, val))

    if not acc or report.rows_read == report.rows_dropped:
        raise NoData(f"{path}: no valid rows")

    out = {}
    for station, hours in acc.items():
        hour_keys = np.array(sorted(hours), dtype=np.int64)
        vals = []
        for h in hour_keys:
            readings = hours[h]
            full = [v for m, v in readings if m == "00"]
            if len(full) == len(readings) and len(full) > 1:
                # duplicate on-the-hour rows: last wins, earlier count dropped
                report.rows_dropped += len(full) - 1
                report.note(station, duplicate=len(full) - 1)
                vals.append(full[-1])
            else:
                vals.append(float(np.mean([v for _, v in readings])))
        out[station] = GappedSeries(Unit.DEG_F, hour_keys, np.array(vals))
    return out, report


def write_load_file(path: str | Path, series: dict[str, TimeSeries]) -> None:
    """Write aligned zone load series in the load file schema."""
    zones = list(series)
    ref = series[zones[0]]
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp"] + zones)
        stamps = ref.timestamps()
        cols = [series[z].values for z in zones]
        for i, ts in enumerate(stamps):
            writer.writerow([ts.isoformat()] + [repr(float(c[i])) for c in cols])


def write_temperature_file(path: str | Path, series: dict[str, TimeSeries]) -> None:
    """Write station temperature series in the temperature file schema."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "station", "temp_f"])
        for station, s in series.items():
            for ts, v in s.points():
                writer.writerow([ts.isoformat(), station, repr(v)])
