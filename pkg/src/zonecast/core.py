"""Core time-series types and alignment/normalization primitives.

Timestamps are naive local standard time on a fixed-offset clock (no DST);
every series is hourly. Internally hours are counted as integer offsets from
1970-01-01 00:00 so that alignment and lagging are plain integer arithmetic.
"""

from __future__ import annotations

import datetime as _dt
import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyIntersection, LengthMismatch, TooShort, ZeroVariance

_EPOCH = _dt.datetime(1970, 1, 1)

#: Absolute threshold below which a sample standard deviation counts as zero.
ZERO_VARIANCE_TOL = 1e-12


class Unit(enum.Enum):
    MW = "MW"
    DEG_F = "degF"
    DIMENSIONLESS = "1"


@dataclass(frozen=True, order=True)
class HourlyTimestamp:
    """Calendar hour, totally ordered chronologically."""

    year: int
    month: int
    day: int
    hour: int

    def __post_init__(self):
        # datetime validates the Gregorian date and the hour range
        _dt.datetime(self.year, self.month, self.day, self.hour)

    @classmethod
    def from_epoch_hour(cls, h: int) -> "HourlyTimestamp":
        d = _EPOCH + _dt.timedelta(hours=int(h))
        return cls(d.year, d.month, d.day, d.hour)

    @classmethod
    def from_datetime(cls, d: _dt.datetime) -> "HourlyTimestamp":
        return cls(d.year, d.month, d.day, d.hour)

    def to_epoch_hour(self) -> int:
        d = _dt.datetime(self.year, self.month, self.day, self.hour)
        return int((d - _EPOCH) // _dt.timedelta(hours=1))

    def to_datetime(self) -> _dt.datetime:
        return _dt.datetime(self.year, self.month, self.day, self.hour)

    def add_hours(self, n: int) -> "HourlyTimestamp":
        return HourlyTimestamp.from_epoch_hour(self.to_epoch_hour() + n)

    def weekday(self) -> int:
        """Monday=0 .. Sunday=6."""
        return self.to_datetime().weekday()

    def isoformat(self) -> str:
        return f"{self.year:04d}-{self.month:02d}-{self.day:02d}T{self.hour:02d}:00"

    @classmethod
    def parse(cls, text: str) -> "HourlyTimestamp":
        d = _dt.datetime.strptime(text.strip(), "%Y-%m-%dT%H:%M")
        if d.minute != 0:
            raise ValueError(f"timestamp not on the hour: {text!r}")
        return cls.from_datetime(d)


@dataclass(frozen=True)
class TimeSeries:
    """Contiguous hourly series of finite values.

    Stored as a start hour plus a dense value array; the hourly-spacing
    invariant is therefore structural rather than checked per point.
    """

    unit: Unit
    start: HourlyTimestamp
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("series requires a non-empty 1-D value array")
        if not np.all(np.isfinite(v)):
            raise ValueError("series values must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def start_hour(self) -> int:
        return self.start.to_epoch_hour()

    @property
    def end_hour(self) -> int:
        """Epoch hour of the last point (inclusive)."""
        return self.start_hour + len(self) - 1

    def timestamps(self) -> list[HourlyTimestamp]:
        h0 = self.start_hour
        return [HourlyTimestamp.from_epoch_hour(h0 + i) for i in range(len(self))]

    def epoch_hours(self) -> np.ndarray:
        return self.start_hour + np.arange(len(self), dtype=np.int64)

    def points(self):
        """Iterate (HourlyTimestamp, value) pairs."""
        for ts, v in zip(self.timestamps(), self.values):
            yield ts, float(v)

    def slice_hours(self, first_hour: int, last_hour: int) -> "TimeSeries":
        """Restrict to [first_hour, last_hour] (inclusive, epoch hours)."""
        i0 = first_hour - self.start_hour
        i1 = last_hour - self.start_hour + 1
        if i0 < 0 or i1 > len(self) or i0 >= i1:
            raise ValueError("slice outside series range")
        return TimeSeries(self.unit, HourlyTimestamp.from_epoch_hour(first_hour),
                          self.values[i0:i1])

    def with_values(self, values: np.ndarray, unit: Unit | None = None) -> "TimeSeries":
        return TimeSeries(unit or self.unit, self.start, values)


@dataclass(frozen=True)
class ZonalDataset:
    """Per-zone (load, temperature) pairs sharing one hourly index."""

    zones: dict[str, tuple[TimeSeries, TimeSeries]]

    def __post_init__(self):
        if len(self.zones) < 2:
            raise ValueError("dataset requires at least 2 zones")
        ref = None
        for zid, (load, temp) in self.zones.items():
            if load.unit is not Unit.MW or temp.unit is not Unit.DEG_F:
                raise ValueError(f"zone {zid}: expected MW load and degF temperature")
            key = (load.start_hour, len(load))
            if (temp.start_hour, len(temp)) != key:
                raise ValueError(f"zone {zid}: load and temperature indices differ")
            if ref is None:
                ref = key
            elif key != ref:
                raise ValueError(f"zone {zid}: index differs from other zones")

    @property
    def zone_ids(self) -> list[str]:
        return list(self.zones)

    @property
    def n_hours(self) -> int:
        first = next(iter(self.zones.values()))
        return len(first[0])

    def load(self, zone: str) -> TimeSeries:
        return self.zones[zone][0]

    def temperature(self, zone: str) -> TimeSeries:
        return self.zones[zone][1]


def align(series_list: list[TimeSeries]) -> list[TimeSeries]:
    """Restrict all series to their maximal common hourly range."""
    if not series_list:
        return []
    lo = max(s.start_hour for s in series_list)
    hi = min(s.end_hour for s in series_list)
    if lo > hi:
        raise EmptyIntersection("series share no common timestamps")
    return [s.slice_hours(lo, hi) for s in series_list]


def sample_mean_sd(x: TimeSeries | np.ndarray) -> tuple[float, float]:
    """Sample mean and standard deviation (N-1 denominator)."""
    v = x.values if isinstance(x, TimeSeries) else np.asarray(x, dtype=float)
    if v.size < 2:
        raise TooShort("need at least 2 points")
    return float(np.mean(v)), float(np.std(v, ddof=1))


def znormalize(x: TimeSeries) -> TimeSeries:
    """Shift/scale to sample mean 0 and sample sd 1 (N-1 denominator)."""
    mean, sd = sample_mean_sd(x)
    if sd < ZERO_VARIANCE_TOL:
        raise ZeroVariance(f"sample sd {sd!r} below {ZERO_VARIANCE_TOL}")
    return x.with_values((x.values - mean) / sd, unit=Unit.DIMENSIONLESS)


def znormalize_values(v: np.ndarray) -> np.ndarray:
    """Array variant of :func:`znormalize`."""
    v = np.asarray(v, dtype=float)
    if v.size < 2:
        raise TooShort("need at least 2 points")
    sd = float(np.std(v, ddof=1))
    if sd < ZERO_VARIANCE_TOL:
        raise ZeroVariance(f"sample sd {sd!r} below {ZERO_VARIANCE_TOL}")
    return (v - np.mean(v)) / sd


def require_same_length(x: np.ndarray, y: np.ndarray) -> None:
    if len(x) != len(y):
        raise LengthMismatch(f"lengths differ: {len(x)} vs {len(y)}")
