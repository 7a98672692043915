"""Microgrid net load = residential demand - (wind + solar), in kW."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PlantCounts:
    residential_units: int = 60
    pv_modules: int = 100
    wind_turbines: int = 3

    def __post_init__(self):
        for name in ("residential_units", "pv_modules", "wind_turbines"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v}")


@dataclass(frozen=True)
class NetLoadSeries:
    values: np.ndarray  # kW, may be negative
    day: np.ndarray
    hour: np.ndarray

    def __post_init__(self):
        if not (len(self.values) == len(self.day) == len(self.hour)):
            raise ValueError("net load values and timestamps differ in length")
        if not np.isfinite(self.values).all():
            raise ValueError("net load contains non-finite values")

    def __len__(self) -> int:
        return len(self.values)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("day,hour,netload_kW\n")
        for d, h, v in zip(self.day, self.hour, self.values):
            out.write(f"{int(d)},{int(h)},{float(v)!r}\n")
        return out.getvalue()


def compose_net_load(demand_unit, wind_total, solar_total, counts: PlantCounts,
                     day=None, hour=None) -> NetLoadSeries:
    """``units * demand_unit - (wind_total + solar_total) / 1000``.

    ``demand_unit`` is kW for one residential unit; ``wind_total`` and
    ``solar_total`` are fleet totals in W.
    """
    d = np.asarray(demand_unit, dtype=np.float64)
    w = np.asarray(wind_total, dtype=np.float64)
    s = np.asarray(solar_total, dtype=np.float64)
    if not (d.shape == w.shape == s.shape) or d.ndim != 1:
        raise ValueError(f"length mismatch: demand {d.shape}, wind {w.shape}, solar {s.shape}")
    values = counts.residential_units * d - (w + s) / 1000.0
    n = len(values)
    day = np.zeros(n, dtype=np.int64) if day is None else np.asarray(day)
    hour = np.zeros(n, dtype=np.int64) if hour is None else np.asarray(hour)
    return NetLoadSeries(values, day, hour)
