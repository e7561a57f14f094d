"""Design matrices for the two regression models.

Model "f1": intercept, temperature, hour and day-of-week dummies, and load
lagged by one and two weeks (168 / 336 hours).

Model "f2": intercept, day-of-week x hour-of-day interaction dummies (main
effects plus cross terms), and month / hour dummies multiplied by temperature
powers T, T^2, T^3.

Every column is represented internally as ``base * T**power`` where the base
carries dummies, lags and the intercept. That factorization is what allows an
exact analytic derivative with respect to temperature downstream.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import HourlyTimestamp, TimeSeries, align
from .errors import DegenerateSplit, TooShort

log = logging.getLogger(__name__)

D_LEVELS = ("MON", "TUE", "WED", "THU", "FRI", "WEEKEND")
M_LEVELS = ("JAN", "FEB", "MAR", "APR", "MAY", "JUN",
            "JUL", "AUG", "SEP", "OCT", "NOV", "DEC")
H_LEVELS = tuple(range(24))

LAG_1W = 168
LAG_2W = 336


@dataclass(frozen=True)
class DesignMatrix:
    """Labeled regression matrix with its target and row timestamps."""

    kind: str
    labels: tuple[str, ...]
    X: np.ndarray = field(repr=False)
    target: np.ndarray = field(repr=False)
    row_hours: np.ndarray = field(repr=False)

    def __post_init__(self):
        n, k = self.X.shape
        if len(self.labels) != k or len(set(self.labels)) != k:
            raise ValueError("labels must be unique and match column count")
        if len(self.target) != n or len(self.row_hours) != n:
            raise ValueError("target/row_hours length must match row count")
        if k == 0 or not np.all(self.X[:, 0] == 1.0):
            raise ValueError("first column must be the all-ones intercept")

    def check_no_zero_columns(self) -> "DesignMatrix":
        """Invariant of freshly built designs; row subsets may violate it."""
        if np.any(np.all(self.X == 0.0, axis=0)):
            raise ValueError("identically zero column in design matrix")
        return self

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_columns(self) -> int:
        return self.X.shape[1]

    def row_timestamps(self) -> list[HourlyTimestamp]:
        return [HourlyTimestamp.from_epoch_hour(int(h)) for h in self.row_hours]

    def take_rows(self, idx: np.ndarray) -> "DesignMatrix":
        return DesignMatrix(self.kind, self.labels, self.X[idx],
                            self.target[idx], self.row_hours[idx])

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["timestamp", "target", *self.labels])
            for i, ts in enumerate(self.row_timestamps()):
                writer.writerow([ts.isoformat(), repr(float(self.target[i])),
                                 *[repr(float(v)) for v in self.X[i]]])


def _calendar_parts(row_hours: np.ndarray):
    """Per-row weekday level index (0..5), month index (0..11), hour (0..23)."""
    wd = (row_hours // 24 + 3) % 7  # 1970-01-01 was a Thursday
    d_idx = np.where(wd >= 5, 5, wd)
    months = np.array([HourlyTimestamp.from_epoch_hour(int(h)).month - 1
                       for h in row_hours])
    h_idx = row_hours % 24
    return d_idx.astype(int), months, h_idx.astype(int)


class DesignBuilder:
    """Builds the design for one model kind over an aligned (load, temp) pair.

    Column c of the design evaluates to ``base[:, c] * T**power[c]`` where T
    is the row's temperature. Identically-zero base columns (absent calendar
    levels on short windows) are dropped once, here, and recorded.
    """

    def __init__(self, kind: str, load: TimeSeries, temperature: TimeSeries,
                 weekday_only: bool = False):
        if kind not in ("f1", "f2"):
            raise ValueError(f"unknown model kind {kind!r}")
        load, temperature = align([load, temperature])
        n = len(load)
        if kind == "f1" and n < LAG_2W + 1:
            raise TooShort(f"f1 needs at least {LAG_2W + 1} aligned hours, got {n}")

        first_row = LAG_2W if kind == "f1" else 0
        rows = np.arange(first_row, n)
        row_hours = load.epoch_hours()[rows]
        if weekday_only:
            keep = (row_hours // 24 + 3) % 7 < 5
            rows, row_hours = rows[keep], row_hours[keep]
        if len(rows) == 0:
            raise TooShort("no rows left after row filtering")

        self.kind = kind
        self.rows = rows
        self.row_hours = row_hours
        self.target = load.values[rows]
        self.temperature0 = temperature.values[rows]
        self._load_values = load.values

        d_idx, m_idx, h_idx = _calendar_parts(row_hours)
        nr = len(rows)
        d_dummies = {lvl: (d_idx == i).astype(float)
                     for i, lvl in enumerate(D_LEVELS) if i > 0}
        h_dummies = {h: (h_idx == h).astype(float) for h in H_LEVELS if h > 0}

        bases: list[np.ndarray] = [np.ones(nr)]
        powers: list[int] = [0]
        labels: list[str] = ["intercept"]

        def add(label: str, base: np.ndarray, power: int = 0):
            bases.append(base)
            powers.append(power)
            labels.append(label)

        if kind == "f1":
            add("T", np.ones(nr), power=1)
            for h, col in h_dummies.items():
                add(f"H_{h:02d}", col)
            for lvl, col in d_dummies.items():
                add(f"D_{lvl}", col)
            add("LL_1w", self._load_values[rows - LAG_1W])
            add("LL_2w", self._load_values[rows - LAG_2W])
        else:
            for lvl, col in d_dummies.items():
                add(f"D_{lvl}", col)
            for h, col in h_dummies.items():
                add(f"H_{h:02d}", col)
            for lvl, dcol in d_dummies.items():
                for h, hcol in h_dummies.items():
                    add(f"D_{lvl}:H_{h:02d}", dcol * hcol)
            m_dummies = {lvl: (m_idx == i).astype(float)
                         for i, lvl in enumerate(M_LEVELS) if i > 0}
            for power in (1, 2, 3):
                suffix = "T" if power == 1 else f"T{power}"
                for lvl, col in m_dummies.items():
                    add(f"M_{lvl}:{suffix}", col, power=power)
            for power in (1, 2, 3):
                suffix = "T" if power == 1 else f"T{power}"
                for h, col in h_dummies.items():
                    add(f"H_{h:02d}:{suffix}", col, power=power)

        base = np.column_stack(bases)
        powers_arr = np.array(powers)
        nonzero = ~np.all(base == 0.0, axis=0)
        self.dropped_labels = tuple(l for l, keep in zip(labels, nonzero) if not keep)
        if self.dropped_labels:
            log.info("%s design: dropped %d absent-level columns: %s",
                     kind, len(self.dropped_labels), ", ".join(self.dropped_labels))
        self.base = base[:, nonzero]
        self.powers = powers_arr[nonzero]
        self.labels = tuple(l for l, keep in zip(labels, nonzero) if keep)

        if kind == "f2" and len(rows) < len(self.labels):
            raise TooShort(f"f2 needs at least {len(self.labels)} rows, got {len(rows)}")

    def design(self, temperature_values: np.ndarray | None = None) -> DesignMatrix:
        """Evaluate the design, optionally at an alternative temperature."""
        t = self.temperature0 if temperature_values is None else \
            np.asarray(temperature_values, dtype=float)
        if len(t) != len(self.rows):
            raise ValueError("temperature vector length must match design rows")
        X = self.base * np.power(t[:, None], self.powers[None, :])
        return DesignMatrix(self.kind, self.labels, X, self.target,
                            self.row_hours).check_no_zero_columns()

    def sum_forecast_gradient(self, beta: np.ndarray,
                              temperature_values: np.ndarray | None = None) -> np.ndarray:
        """d(sum_t yhat_t)/dT_t for each row, at the given temperature."""
        t = self.temperature0 if temperature_values is None else \
            np.asarray(temperature_values, dtype=float)
        grad = np.zeros(len(t))
        for c in np.flatnonzero(self.powers > 0):
            p = self.powers[c]
            grad += beta[c] * p * self.base[:, c] * np.power(t, p - 1)
        return grad

    @property
    def temperature_dependent(self) -> bool:
        return bool(np.any(self.powers > 0))


def build_design_f1(load: TimeSeries, temperature: TimeSeries,
                    weekday_only: bool = False) -> DesignMatrix:
    return DesignBuilder("f1", load, temperature, weekday_only).design()


def build_design_f2(load: TimeSeries, temperature: TimeSeries,
                    weekday_only: bool = False) -> DesignMatrix:
    return DesignBuilder("f2", load, temperature, weekday_only).design()


def train_test_split(X: DesignMatrix, ratio: float, seed: int
                     ) -> tuple[DesignMatrix, DesignMatrix]:
    """Uniform random row partition, deterministic per seed."""
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie strictly between 0 and 1")
    n = X.n_rows
    n_train = int(round(ratio * n))
    if n_train == 0 or n_train == n:
        raise DegenerateSplit(f"split {ratio} of {n} rows leaves one side empty")
    perm = np.random.default_rng(seed).permutation(n)
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train:])
    return X.take_rows(train_idx), X.take_rows(test_idx)
