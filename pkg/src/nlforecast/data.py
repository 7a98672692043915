"""Hourly weather/demand records: CSV I/O, validation, splitting, scaling, windowing.

CSV layout (UTF-8, one header row, LF or CRLF)::

    day,hour,temp_K,wind_mps,irradiance_Wm2,demand_kW

One row per hour, day 1..365 (366 with ``allow_leap``), hour 0..23, in
chronological order starting at day 1 hour 0.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

CSV_COLUMNS = ("day", "hour", "temp_K", "wind_mps", "irradiance_Wm2", "demand_kW")
FEATURE_NAMES = ("day", "hour", "temp_K", "wind_mps", "irradiance_Wm2")
HOURS_PER_YEAR = 8760
HOURS_PER_LEAP_YEAR = 8784


class DataError(ValueError):
    """Raised for malformed or physically invalid input data."""


class WeatherRecord(NamedTuple):
    day: int
    hour: int
    temp_ambient: float  # K
    wind_speed: float  # m/s
    irradiance_collector: float  # W/m^2
    demand_unit: float  # kW, one average residential unit


def _check_values(temp, wind, irr, demand, where: str) -> None:
    vals = {"temp_K": temp, "wind_mps": wind, "irradiance_Wm2": irr, "demand_kW": demand}
    for name, v in vals.items():
        if not math.isfinite(v):
            raise DataError(f"{where}: {name} is not finite ({v})")
    if temp <= 0:
        raise DataError(f"{where}: temp_K must be > 0 K, got {temp}")
    for name in ("wind_mps", "irradiance_Wm2", "demand_kW"):
        if vals[name] < 0:
            raise DataError(f"{where}: {name} must be >= 0, got {vals[name]}")


@dataclass(frozen=True)
class YearDataset:
    """Column-oriented, validated sequence of consecutive hourly records."""

    day: np.ndarray
    hour: np.ndarray
    temp_ambient: np.ndarray
    wind_speed: np.ndarray
    irradiance_collector: np.ndarray
    demand_unit: np.ndarray

    def __post_init__(self):
        n = len(self.day)
        cols = {f: np.asarray(getattr(self, f)) for f in self.__dataclass_fields__}
        for name, col in cols.items():
            if col.ndim != 1 or len(col) != n:
                raise DataError(f"column {name} has inconsistent length")
        if n == 0:
            raise DataError("dataset is empty")
        for name in ("day", "hour"):
            object.__setattr__(self, name, cols[name].astype(np.int64))
        for name in ("temp_ambient", "wind_speed", "irradiance_collector", "demand_unit"):
            arr = cols[name].astype(np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        self.day.setflags(write=False)
        self.hour.setflags(write=False)
        self._validate()

    def _validate(self) -> None:
        d, h = self.day, self.hour
        if (h < 0).any() or (h > 23).any():
            k = int(np.flatnonzero((h < 0) | (h > 23))[0])
            raise DataError(f"record {k + 1}: hour {h[k]} outside 0..23")
        if (d < 1).any() or (d > 366).any():
            k = int(np.flatnonzero((d < 1) | (d > 366))[0])
            raise DataError(f"record {k + 1}: day {d[k]} outside 1..366")
        stamp = (d - 1) * 24 + h
        step = np.diff(stamp)
        if (step != 1).any():
            k = int(np.flatnonzero(step != 1)[0])
            raise DataError(_order_message(k + 2, d[k], h[k], d[k + 1], h[k + 1]))
        for name, col in (("temp_K", self.temp_ambient), ("wind_mps", self.wind_speed),
                          ("irradiance_Wm2", self.irradiance_collector),
                          ("demand_kW", self.demand_unit)):
            bad = ~np.isfinite(col)
            bad |= (col <= 0) if name == "temp_K" else (col < 0)
            if bad.any():
                k = int(np.flatnonzero(bad)[0])
                _check_values(self.temp_ambient[k], self.wind_speed[k],
                              self.irradiance_collector[k], self.demand_unit[k], f"record {k + 1}")

    def __len__(self) -> int:
        return len(self.day)

    def __iter__(self) -> Iterator[WeatherRecord]:
        for k in range(len(self)):
            yield self.record(k)

    def record(self, k: int) -> WeatherRecord:
        return WeatherRecord(int(self.day[k]), int(self.hour[k]), float(self.temp_ambient[k]),
                             float(self.wind_speed[k]), float(self.irradiance_collector[k]),
                             float(self.demand_unit[k]))

    @classmethod
    def from_records(cls, records) -> "YearDataset":
        rows = list(records)
        if not rows:
            raise DataError("dataset is empty")
        cols = list(zip(*rows))
        return cls(*(np.asarray(c) for c in cols))

    def slice(self, start: int, stop: int) -> "YearDataset":
        return YearDataset(self.day[start:stop], self.hour[start:stop],
                           self.temp_ambient[start:stop], self.wind_speed[start:stop],
                           self.irradiance_collector[start:stop], self.demand_unit[start:stop])

    def features(self) -> np.ndarray:
        """The n x 5 model input matrix (day, hour, temperature, wind, irradiance)."""
        return np.column_stack([self.day.astype(np.float64), self.hour.astype(np.float64),
                                self.temp_ambient, self.wind_speed, self.irradiance_collector])

    def replace(self, **columns) -> "YearDataset":
        fields = {f: getattr(self, f) for f in self.__dataclass_fields__}
        fields.update(columns)
        return YearDataset(**fields)


def _order_message(row, d0, h0, d1, h1) -> str:
    prev = (d0 - 1) * 24 + h0
    cur = (d1 - 1) * 24 + h1
    if cur <= prev:
        return (f"row {row}: (day {d1}, hour {h1}) is a duplicate or out of order "
                f"after (day {d0}, hour {h0})")
    missing = prev + 1
    return (f"row {row}: chronological gap, missing day {missing // 24 + 1}, hour {missing % 24} "
            f"(found day {d1}, hour {h1})")


def parse_tmy_csv(source, *, allow_leap: bool = False, require_full_year: bool = True) -> YearDataset:
    """Parse the documented CSV format from a string or text stream.

    Error messages name the 1-based data row (the header is row 0).
    """
    stream = io.StringIO(source) if isinstance(source, str) else source
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty CSV input") from None
    header = [c.strip() for c in header]
    if header and header[0].startswith("﻿"):
        header[0] = header[0][1:]
    if tuple(header) != CSV_COLUMNS:
        raise DataError(f"header must be {','.join(CSV_COLUMNS)}, got {','.join(header)}")

    days, hours, temps, winds, irrs, demands = [], [], [], [], [], []
    prev = None
    for row_no, row in enumerate(reader, start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            raise DataError(f"row {row_no}: empty line")
        if len(row) != len(CSV_COLUMNS):
            raise DataError(f"row {row_no}: expected {len(CSV_COLUMNS)} columns, got {len(row)}")
        try:
            d = _parse_int(row[0])
            h = _parse_int(row[1])
            vals = [float(c) for c in row[2:]]
        except ValueError as exc:
            raise DataError(f"row {row_no}: non-numeric cell ({exc})") from None
        if not 0 <= h <= 23:
            raise DataError(f"row {row_no}: hour {h} outside 0..23")
        if not 1 <= d <= (366 if allow_leap else 365):
            raise DataError(f"row {row_no}: day {d} out of range")
        _check_values(*vals, where=f"row {row_no}")
        stamp = (d - 1) * 24 + h
        expected = 0 if prev is None else prev + 1
        if stamp != expected:
            if prev is None:
                raise DataError(f"row {row_no}: data must start at day 1, hour 0 "
                                f"(found day {d}, hour {h})")
            raise DataError(_order_message(row_no, prev // 24 + 1, prev % 24, d, h))
        prev = stamp
        days.append(d)
        hours.append(h)
        temps.append(vals[0])
        winds.append(vals[1])
        irrs.append(vals[2])
        demands.append(vals[3])

    n = len(days)
    if n == 0:
        raise DataError("CSV contains a header but no data rows")
    if require_full_year:
        allowed = (HOURS_PER_YEAR, HOURS_PER_LEAP_YEAR) if allow_leap else (HOURS_PER_YEAR,)
        if n not in allowed:
            raise DataError(f"expected {' or '.join(map(str, allowed))} hourly rows, got {n}")
    return YearDataset(np.array(days), np.array(hours), np.array(temps), np.array(winds),
                       np.array(irrs), np.array(demands))


def _parse_int(cell: str) -> int:
    cell = cell.strip()
    value = float(cell)
    if not value.is_integer():
        raise ValueError(f"{cell!r} is not an integer")
    return int(value)


def format_csv(dataset: YearDataset) -> str:
    """Serialize to the CSV format; floats use ``repr`` so parsing round-trips exactly."""
    out = io.StringIO()
    out.write(",".join(CSV_COLUMNS) + "\n")
    for rec in dataset:
        out.write(f"{rec.day},{rec.hour},{rec.temp_ambient!r},{rec.wind_speed!r},"
                  f"{rec.irradiance_collector!r},{rec.demand_unit!r}\n")
    return out.getvalue()


def read_csv(path, **kwargs) -> YearDataset:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_tmy_csv(fh, **kwargs)


def write_csv(dataset: YearDataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(format_csv(dataset))


# --- partitioning and scaling ------------------------------------------------

@dataclass(frozen=True)
class SplitIndices:
    train: range
    validation: range
    test: range

    def as_dict(self) -> dict:
        return {k: [r.start, r.stop] for k, r in
                (("train", self.train), ("validation", self.validation), ("test", self.test))}


def split_dataset(n: int, ratios=(0.8, 0.1, 0.1)) -> SplitIndices:
    """Contiguous chronological train/validation/test split.

    Train is ``floor(ratios[0] * n)``.  The rows after it are shared between
    validation and test in proportion to their ratios, validation floored and
    the remainder to test, so with equal ratios the two differ by at most one.
    """
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ValueError("ratios must be three positive fractions")
    if not math.isclose(sum(ratios), 1.0, abs_tol=1e-9):
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)}")
    if n < 10:
        raise ValueError(f"need at least 10 rows to split, got {n}")
    # tiny epsilon absorbs representation error like 0.8 * 8760 = 7007.999...
    n_train = math.floor(ratios[0] * n + 1e-9)
    rest = n - n_train
    n_val = math.floor(ratios[1] / (ratios[1] + ratios[2]) * rest + 1e-9)
    n_test = n - n_train - n_val
    if min(n_train, n_val, n_test) < 1:
        raise ValueError(f"n={n} too small for non-empty partitions")
    return SplitIndices(range(0, n_train), range(n_train, n_train + n_val),
                        range(n_train + n_val, n))


@dataclass(frozen=True)
class FeatureStats:
    mean: np.ndarray
    std: np.ndarray

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}


def compute_stats(matrix, rows: range | slice | None = None) -> FeatureStats:
    """Per-column mean and population standard deviation over ``rows``.

    Accepts a YearDataset (its feature matrix is used) or any 2-D/1-D array.
    """
    if isinstance(matrix, YearDataset):
        matrix = matrix.features()
    arr = np.asarray(matrix, dtype=np.float64)
    if rows is not None:
        arr = arr[rows.start:rows.stop] if isinstance(rows, range) else arr[rows]
    if arr.shape[0] == 0:
        raise ValueError("statistics need a non-empty row range")
    mean = arr.mean(axis=0)
    std = np.sqrt(((arr - mean) ** 2).mean(axis=0))
    return FeatureStats(np.atleast_1d(mean), np.atleast_1d(std))


def normalize(matrix, stats: FeatureStats) -> np.ndarray:
    """z-score each column; zero-variance columns map to 0."""
    arr = np.asarray(matrix, dtype=np.float64)
    safe = np.where(stats.std > 0, stats.std, 1.0)
    out = (arr - stats.mean) / safe
    if arr.ndim == 1:
        return out if stats.std[0] > 0 else np.zeros_like(out)
    out[:, stats.std == 0] = 0.0
    return out


def denormalize(matrix, stats: FeatureStats) -> np.ndarray:
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim == 1:
        return arr * stats.std[0] + stats.mean[0]
    return arr * stats.std + stats.mean


def make_windows(features, labels, window: int = 24, horizon: int = 1):
    """Sliding windows for next-step regression.

    Sample ``i`` is ``features[i:i+window]`` with target
    ``labels[i + window + horizon - 1]``; there are ``n - window - horizon + 1``
    samples (``n - window`` for horizon 1).
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or len(x) != len(y):
        raise ValueError("features must be n x F and labels length n")
    if window < 1 or horizon < 1:
        raise ValueError("window and horizon must be >= 1")
    n = len(x)
    count = n - window - horizon + 1
    if count < 1:
        raise ValueError(f"need more than window + horizon - 1 = {window + horizon - 1} rows, got {n}")
    view = np.lib.stride_tricks.sliding_window_view(x, window, axis=0)[:count]
    samples = np.ascontiguousarray(view.transpose(0, 2, 1))
    targets = y[window + horizon - 1:window + horizon - 1 + count].copy()
    return samples, targets


def target_rows(n: int, window: int = 24, horizon: int = 1) -> np.ndarray:
    """Row index (within the windowed block) of each sample's target."""
    return np.arange(window + horizon - 1, n)


# --- synthetic data ------------------------------------------------------------

@dataclass(frozen=True)
class SiteParams:
    """Knobs for :func:`generate_synthetic_year` (Houston-like defaults)."""

    temp_mean_K: float = 294.0
    temp_seasonal_K: float = 8.0
    temp_diurnal_K: float = 5.0
    temp_noise_K: float = 1.0
    wind_mean: float = 5.5
    wind_diurnal: float = 0.8
    wind_ar: float = 0.9
    wind_noise: float = 1.0
    irradiance_peak: float = 1000.0
    irradiance_seasonal: float = 0.25
    sunrise_hour: float = 6.0
    sunset_hour: float = 19.0
    demand_mean_kW: float = 1.2
    demand_seasonal: float = 0.3
    demand_noise: float = 0.08
    days: int = 365


def generate_synthetic_year(seed: int = 0, site: SiteParams | None = None) -> YearDataset:
    """Deterministic synthetic hourly year for tests and demos."""
    site = site or SiteParams()
    rng = np.random.default_rng(seed)
    n = site.days * 24
    day = np.repeat(np.arange(1, site.days + 1), 24)
    hour = np.tile(np.arange(24), site.days)
    # 0 at the winter solstice-ish (day ~ 15), 1 at mid-summer
    season = 0.5 * (1.0 - np.cos(2.0 * np.pi * (day - 15) / 365.0))

    temp = (site.temp_mean_K + site.temp_seasonal_K * (2.0 * season - 1.0)
            + site.temp_diurnal_K * np.sin(2.0 * np.pi * (hour - 9) / 24.0)
            + rng.normal(0.0, site.temp_noise_K, n))

    shocks = rng.normal(0.0, site.wind_noise, n)
    anomaly = np.empty(n)
    acc = 0.0
    for k in range(n):
        acc = site.wind_ar * acc + shocks[k]
        anomaly[k] = acc
    anomaly *= np.sqrt(1.0 - site.wind_ar ** 2) / site.wind_noise * 2.5
    wind = site.wind_mean + site.wind_diurnal * np.sin(2.0 * np.pi * (hour - 10) / 24.0) + anomaly
    wind = np.clip(wind, 0.0, None)

    span = site.sunset_hour - site.sunrise_hour
    phase = (hour - site.sunrise_hour) / span
    shape = np.where((phase > 0) & (phase < 1), np.sin(np.pi * np.clip(phase, 0, 1)), 0.0)
    amplitude = site.irradiance_peak * (1.0 - site.irradiance_seasonal * (1.0 - season))
    daily_cloud = np.repeat(rng.beta(5.0, 1.6, site.days), 24)
    hourly_cloud = np.clip(rng.normal(1.0, 0.08, n), 0.5, 1.2)
    irr = amplitude * shape * daily_cloud * hourly_cloud
    irr = np.clip(irr, 0.0, None)

    morning = np.exp(-0.5 * ((hour - 7.5) / 1.5) ** 2)
    evening = np.exp(-0.5 * ((hour - 19.0) / 2.0) ** 2)
    profile = 0.55 + 0.45 * morning + 0.9 * evening
    profile /= profile.mean()
    seasonal = 1.0 + site.demand_seasonal * (2.0 * season - 1.0) ** 2
    seasonal /= seasonal.mean()
    demand = site.demand_mean_kW * profile * seasonal * (1.0 + rng.normal(0.0, site.demand_noise, n))
    demand = np.clip(demand, 0.0, None)
    return YearDataset(day, hour, temp, wind, irr, demand)
