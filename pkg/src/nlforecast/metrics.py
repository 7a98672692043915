"""Point-forecast error metrics and absolute-percentage-error histograms."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class HistogramBin:
    low: float
    high: float  # inf for the overflow bin
    count: int


@dataclass(frozen=True)
class MetricsReport:
    mae: float
    mse: float
    rmse: float
    nrmse: float | None  # None when the actual series is constant
    nrmse_normalizer: float  # max(actual) - min(actual)
    pct_floor: float  # lower bound applied to |actual| in percentage errors
    histogram: list[HistogramBin] = field(default_factory=list)
    tolerance_pct: float = 20.0
    tolerance_fraction: float = 0.0
    n: int = 0

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mae": self.mae,
            "mse": self.mse,
            "rmse": self.rmse,
            "nrmse": self.nrmse,
            "nrmse_normalizer": self.nrmse_normalizer,
            "pct_floor": self.pct_floor,
            "tolerance_pct": self.tolerance_pct,
            "tolerance_fraction": self.tolerance_fraction,
            "histogram": [{"low_pct": b.low, "high_pct": None if np.isinf(b.high) else b.high,
                           "count": b.count} for b in self.histogram],
        }


def _pair(pred, actual):
    p = np.asarray(pred, dtype=np.float64).ravel()
    a = np.asarray(actual, dtype=np.float64).ravel()
    if p.shape != a.shape:
        raise ValueError(f"prediction and actual lengths differ: {p.size} vs {a.size}")
    if p.size == 0:
        raise ValueError("empty series")
    return p, a


def pct_floor(actual, floor_fraction: float = 0.01) -> float:
    a = np.asarray(actual, dtype=np.float64)
    return floor_fraction * float(a.max() - a.min())


def abs_pct_errors(pred, actual, floor: float | None = None, floor_fraction: float = 0.01) -> np.ndarray:
    """100 * |pred - actual| / max(|actual|, floor); floor defaults to 1% of the actual range."""
    p, a = _pair(pred, actual)
    if floor is None:
        floor = pct_floor(a, floor_fraction)
    denom = np.maximum(np.abs(a), floor)
    with np.errstate(divide="ignore", invalid="ignore"):
        ape = 100.0 * np.abs(p - a) / denom
    # all-zero actual with zero floor: exact hits are 0 %, misses are unbounded
    return np.where(denom > 0, ape, np.where(p == a, 0.0, np.inf))


def abs_error_histogram(pred, actual, bin_width_pct: float = 10.0, max_pct: float = 100.0,
                        floor: float | None = None, floor_fraction: float = 0.01) -> list[HistogramBin]:
    """Counts per ``[k*w, (k+1)*w)`` bin up to ``max_pct``, plus a ``[max_pct, inf)`` overflow bin."""
    if bin_width_pct <= 0 or max_pct <= 0:
        raise ValueError("bin width and range must be positive")
    ape = abs_pct_errors(pred, actual, floor, floor_fraction)
    n_bins = int(np.ceil(max_pct / bin_width_pct - 1e-9))
    edges = bin_width_pct * np.arange(n_bins + 1)
    idx = np.minimum(np.floor(ape / bin_width_pct), n_bins).astype(np.int64)
    counts = np.bincount(idx, minlength=n_bins + 1)
    bins = [HistogramBin(float(edges[k]), float(edges[k + 1]), int(counts[k])) for k in range(n_bins)]
    bins.append(HistogramBin(float(edges[-1]), float("inf"), int(counts[n_bins])))
    return bins


def tolerance_fraction(pred, actual, tol_pct: float = 20.0, floor: float | None = None,
                       floor_fraction: float = 0.01) -> float:
    """Share of samples whose absolute percentage error is <= ``tol_pct``."""
    ape = abs_pct_errors(pred, actual, floor, floor_fraction)
    return float(np.mean(ape <= tol_pct))


def compute_metrics(pred, actual, *, bin_width_pct: float = 10.0, tolerance_pct: float = 20.0,
                    floor_fraction: float = 0.01, histogram_samples: int | None = None) -> MetricsReport:
    """MAE, MSE, RMSE, range-normalized RMSE, APE histogram and tolerance share.

    ``histogram_samples`` restricts the histogram and tolerance share to the
    first N samples (the scalar metrics always use every sample).
    """
    p, a = _pair(pred, actual)
    err = p - a
    mae = float(np.mean(np.abs(err)))
    mse = float(np.mean(err * err))
    rmse = float(np.sqrt(mse))
    span = float(a.max() - a.min())
    nrmse = rmse / span if span > 0 else None
    floor = floor_fraction * span
    hp, ha = p, a
    if histogram_samples is not None:
        if histogram_samples < 1:
            raise ValueError("histogram_samples must be >= 1")
        hp, ha = p[:histogram_samples], a[:histogram_samples]
    hist = abs_error_histogram(hp, ha, bin_width_pct, floor=floor)
    frac = tolerance_fraction(hp, ha, tolerance_pct, floor=floor)
    return MetricsReport(mae, mse, rmse, nrmse, span, floor, hist, tolerance_pct, frac, int(p.size))


def histogram_csv(bins: list[HistogramBin]) -> str:
    out = io.StringIO()
    out.write("bin_low_pct,bin_high_pct,count\n")
    for b in bins:
        high = "inf" if np.isinf(b.high) else repr(b.high)
        out.write(f"{b.low!r},{high},{b.count}\n")
    return out.getvalue()


def rmse_from_mse(mse: float) -> float:
    return float(np.sqrt(mse))
