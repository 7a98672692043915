"""Microgrid net-load forecasting: physical wind/PV models plus a stacked-LSTM engine."""

from ._kernels import BACKEND
from .data import (DataError, FeatureStats, SplitIndices, WeatherRecord, YearDataset, compute_stats,
                   denormalize, generate_synthetic_year, make_windows, normalize, parse_tmy_csv,
                   read_csv, split_dataset, write_csv)
from .forecast import (ForecastReport, MetricOptions, PipelineConfig, PlantSetup, Predictor,
                       compare_approaches, derive_series, run_direct, run_indirect)
from .metrics import MetricsReport, compute_metrics
from .netload import NetLoadSeries, PlantCounts, compose_net_load
from .solar import AirProperties, PvArraySpec, array_solar_power, pv_power, solve_cell_temperature
from .wind import TurbineSpec, fleet_wind_power, turbine_power

__version__ = "0.1.0"

__all__ = [
    "AirProperties",
    "BACKEND",
    "DataError",
    "FeatureStats",
    "ForecastReport",
    "MetricOptions",
    "MetricsReport",
    "NetLoadSeries",
    "PipelineConfig",
    "PlantCounts",
    "PlantSetup",
    "Predictor",
    "PvArraySpec",
    "SplitIndices",
    "TurbineSpec",
    "WeatherRecord",
    "YearDataset",
    "array_solar_power",
    "compare_approaches",
    "compose_net_load",
    "compute_metrics",
    "compute_stats",
    "denormalize",
    "derive_series",
    "fleet_wind_power",
    "generate_synthetic_year",
    "make_windows",
    "normalize",
    "parse_tmy_csv",
    "pv_power",
    "read_csv",
    "run_direct",
    "run_indirect",
    "solve_cell_temperature",
    "split_dataset",
    "turbine_power",
    "write_csv",
]
