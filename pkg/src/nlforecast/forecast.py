"""Direct and indirect net-load forecasting pipelines.

Direct: one model learns the net load.  Indirect: three models learn
per-unit demand, fleet wind power and fleet solar power; their predictions
are combined into net load afterwards.  Both share the same feature
pipeline, chronological split and windowing.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .data import (FeatureStats, SplitIndices, YearDataset, compute_stats, denormalize,
                   make_windows, normalize, split_dataset)
from .metrics import MetricsReport, compute_metrics
from .netload import NetLoadSeries, PlantCounts, compose_net_load
from .nn import LstmModel, ModelConfig, TrainConfig, TrainRecord, predict, train_epochs
from .solar import AirProperties, PvArraySpec, array_solar_power
from .wind import TurbineSpec, fleet_wind_power

log = logging.getLogger(__name__)

# Published results for the same plant layout, shown next to ours for context only.
REFERENCE_RESULTS = {
    "direct": {"mae": 9.48166, "mse": 153.59356, "rmse": 12.39329, "nrmse": 0.09642},
    "indirect": {"mae": 9.41341, "mse": 147.63212, "rmse": 12.15040, "nrmse": 0.09453},
}
METRIC_NAMES = ("mae", "mse", "rmse", "nrmse")
INDIRECT_TARGETS = ("demand", "wind", "solar")
# fixed stream ids so every target draws from its own child of the root seed
_STREAM_IDS = {"net": 0, "demand": 1, "wind": 2, "solar": 3}
REPORT_FORMAT = "nlforecast.report/1"


@dataclass(frozen=True)
class PipelineConfig:
    approach: str = "direct"
    window: int = 24
    horizon: int = 1
    epochs: int = 100
    batch_size: int = 32
    seed: int = 0
    early_stop_patience: int | None = None  # direct model
    indirect_patience: int | None = 10  # each indirect sub-model
    hidden: int = 32  # per LSTM layer; see README for the runtime trade-off
    dense: int = 32
    dropout: float = 0.4
    l2: float = 0.001
    lr: float = 1e-3
    bn_momentum: float = 0.99
    bn_eps: float = 1e-3
    split: tuple[float, float, float] = (0.8, 0.1, 0.1)

    def __post_init__(self):
        if self.approach not in ("direct", "indirect"):
            raise ValueError(f"approach must be 'direct' or 'indirect', got {self.approach!r}")
        if self.window < 1 or self.horizon < 1:
            raise ValueError("window and horizon must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        object.__setattr__(self, "split", tuple(self.split))

    def model_config(self, n_features: int = 5) -> ModelConfig:
        return ModelConfig.uniform(self.hidden, n_features=n_features, dense=self.dense,
                                   dropout=self.dropout, l2=self.l2,
                                   bn_momentum=self.bn_momentum, bn_eps=self.bn_eps)

    def train_config(self, patience: int | None) -> TrainConfig:
        return TrainConfig(epochs=self.epochs, batch_size=self.batch_size, seed=self.seed,
                           early_stop_patience=patience, lr=self.lr)


@dataclass(frozen=True)
class MetricOptions:
    bin_width_pct: float = 10.0
    tolerance_pct: float = 20.0
    floor_fraction: float = 0.01
    histogram_samples: int | None = None

    def evaluate(self, pred, actual) -> MetricsReport:
        return compute_metrics(pred, actual, bin_width_pct=self.bin_width_pct,
                               tolerance_pct=self.tolerance_pct,
                               floor_fraction=self.floor_fraction,
                               histogram_samples=self.histogram_samples)


@dataclass(frozen=True)
class PlantSetup:
    """Physical description of the microgrid."""

    turbine: TurbineSpec = field(default_factory=lambda: TurbineSpec(blade_diameter=5.6, efficiency=0.35))
    pv: PvArraySpec = field(default_factory=PvArraySpec)
    air: AirProperties = field(default_factory=AirProperties)
    counts: PlantCounts = field(default_factory=PlantCounts)


@dataclass(frozen=True)
class DerivedSeries:
    demand_unit: np.ndarray  # kW per residential unit
    wind_total: np.ndarray  # W, whole turbine fleet
    solar_total: np.ndarray  # W, whole PV array
    net: NetLoadSeries  # kW

    def label(self, target: str) -> np.ndarray:
        return {"net": self.net.values, "demand": self.demand_unit,
                "wind": self.wind_total, "solar": self.solar_total}[target]


def derive_series(dataset: YearDataset, setup: PlantSetup) -> DerivedSeries:
    """Wind, solar and net-load label series from the weather/demand records."""
    wind = fleet_wind_power(dataset.wind_speed, setup.turbine, setup.counts.wind_turbines)
    solar = array_solar_power(dataset, setup.pv, setup.air, setup.counts.pv_modules)
    demand = np.array(dataset.demand_unit, dtype=np.float64)
    net = compose_net_load(demand, wind, solar, setup.counts, dataset.day, dataset.hour)
    return DerivedSeries(demand, wind, solar, net)


@dataclass
class Predictor:
    """A trained model together with the scaling it was trained under."""

    target: str
    model: LstmModel
    feature_stats: FeatureStats
    label_stats: FeatureStats
    window: int
    horizon: int

    def predict_windows(self, samples_normalized) -> np.ndarray:
        return denormalize(predict(self.model, samples_normalized), self.label_stats)

    def predict_features(self, features):
        """Predictions for every row of a raw feature matrix with a full window behind it.

        Returns ``(row_indices, predictions)``.  Training reports and the
        ``predict`` command both go through here, so the BLAS calls see the
        same shapes and the outputs agree bit for bit.
        """
        x = normalize(features, self.feature_stats)
        samples, _ = make_windows(x, np.zeros(len(x)), self.window, self.horizon)
        rows = np.arange(self.window + self.horizon - 1, len(x))
        return rows, self.predict_windows(samples)

    def predict_dataset(self, dataset: YearDataset):
        return self.predict_features(dataset.features())


@dataclass
class TargetResult:
    predictor: Predictor
    records: list[TrainRecord]
    test_rows: np.ndarray
    test_actual: np.ndarray
    test_pred: np.ndarray


@dataclass
class ForecastReport:
    approach: str
    seed: int
    partition: dict
    metrics: MetricsReport
    test_day: np.ndarray
    test_hour: np.ndarray
    actual: np.ndarray
    predicted: np.ndarray
    loss_curves: dict[str, list[TrainRecord]]
    components: dict[str, dict] = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        comps = {}
        for name, c in self.components.items():
            comps[name] = {"metrics": c["metrics"].to_dict(),
                           "actual": [float(v) for v in c["actual"]],
                           "predicted": [float(v) for v in c["predicted"]]}
        return {
            "format": REPORT_FORMAT,
            "approach": self.approach,
            "seed": self.seed,
            "kernel_backend": _kernels.BACKEND,
            "config": self.config,
            "partition": self.partition,
            "metrics": self.metrics.to_dict(),
            "reference": REFERENCE_RESULTS[self.approach],
            "loss_curves": {k: [dataclasses.asdict(r) for r in v] for k, v in self.loss_curves.items()},
            "components": comps,
            "test": {
                "day": [int(v) for v in self.test_day],
                "hour": [int(v) for v in self.test_hour],
                "actual_kW": [float(v) for v in self.actual],
                "predicted_kW": [float(v) for v in self.predicted],
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _seed_streams(seed: int, target: str):
    init_ss, train_ss = np.random.SeedSequence([seed, _STREAM_IDS[target]]).spawn(2)
    return np.random.default_rng(init_ss), np.random.default_rng(train_ss)


def _windows(x, y, block: range, cfg: PipelineConfig):
    return make_windows(x[block.start:block.stop], y[block.start:block.stop], cfg.window, cfg.horizon)


def train_target(target: str, features: np.ndarray, labels: np.ndarray, split: SplitIndices,
                 cfg: PipelineConfig, patience: int | None) -> TargetResult:
    """Fit one model to ``labels``; windows never cross partition boundaries."""
    feat_stats = compute_stats(features, split.train)
    label_stats = compute_stats(labels[:, None], split.train)
    xn = normalize(features, feat_stats)
    yn = normalize(labels[:, None], label_stats)[:, 0]
    tr_x, tr_y = _windows(xn, yn, split.train, cfg)
    va_x, va_y = _windows(xn, yn, split.validation, cfg)

    init_rng, train_rng = _seed_streams(cfg.seed, target)
    model = LstmModel.initialize(cfg.model_config(features.shape[1]), init_rng)
    model, records = train_epochs(model, tr_x, tr_y, va_x, va_y, cfg.train_config(patience),
                                  rng=train_rng)
    predictor = Predictor(target, model, feat_stats, label_stats, cfg.window, cfg.horizon)
    # test windows lie wholly inside the test block: first target row is start + W + h - 1
    offset = cfg.window + cfg.horizon - 1
    rows, pred = predictor.predict_features(features)
    keep = rows >= split.test.start + offset
    keep &= rows < split.test.stop
    test_rows = rows[keep]
    return TargetResult(predictor, records, test_rows, labels[test_rows].copy(), pred[keep])


def _train_target_job(args):
    return train_target(*args)


def _n_workers(jobs: int) -> int:
    cap = os.environ.get("NETLOAD_THREADS")
    limit = os.cpu_count() or 1
    if cap:
        limit = min(limit, max(1, int(cap)))
    return max(1, min(jobs, limit))


def _partition_info(split: SplitIndices, cfg: PipelineConfig, n: int) -> dict:
    return {"n": n, **split.as_dict(), "window": cfg.window, "horizon": cfg.horizon}


def _config_dict(cfg: PipelineConfig, setup: PlantSetup, metric_opts: MetricOptions) -> dict:
    return {
        "pipeline": dataclasses.asdict(cfg) | {"split": list(cfg.split)},
        "turbine": dataclasses.asdict(setup.turbine) | {"rated_power_W": setup.turbine.rated_power},
        "pv": dataclasses.asdict(setup.pv),
        "air": dataclasses.asdict(setup.air),
        "counts": dataclasses.asdict(setup.counts),
        "metrics": dataclasses.asdict(metric_opts),
    }


def run_direct(dataset: YearDataset, setup: PlantSetup, cfg: PipelineConfig,
               metric_opts: MetricOptions | None = None, series: DerivedSeries | None = None):
    """Train one net-load model; returns ``(predictor, report)``."""
    metric_opts = metric_opts or MetricOptions()
    cfg = dataclasses.replace(cfg, approach="direct")
    series = series or derive_series(dataset, setup)
    features = dataset.features()
    split = split_dataset(len(dataset), cfg.split)
    res = train_target("net", features, series.net.values, split, cfg, cfg.early_stop_patience)
    report = ForecastReport(
        approach="direct", seed=cfg.seed, partition=_partition_info(split, cfg, len(dataset)),
        metrics=metric_opts.evaluate(res.test_pred, res.test_actual),
        test_day=dataset.day[res.test_rows], test_hour=dataset.hour[res.test_rows],
        actual=res.test_actual, predicted=res.test_pred,
        loss_curves={"net": res.records}, config=_config_dict(cfg, setup, metric_opts))
    return res.predictor, report


def run_indirect(dataset: YearDataset, setup: PlantSetup, cfg: PipelineConfig,
                 metric_opts: MetricOptions | None = None, series: DerivedSeries | None = None):
    """Train demand, wind and solar models and combine them; returns ``(bundle, report)``.

    ``bundle`` maps target name to :class:`Predictor`.
    """
    metric_opts = metric_opts or MetricOptions()
    cfg = dataclasses.replace(cfg, approach="indirect")
    series = series or derive_series(dataset, setup)
    features = dataset.features()
    split = split_dataset(len(dataset), cfg.split)
    jobs = [(t, features, series.label(t), split, cfg, cfg.indirect_patience) for t in INDIRECT_TARGETS]
    workers = _n_workers(len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(zip(INDIRECT_TARGETS, pool.map(_train_target_job, jobs)))
    else:
        results = {t: _train_target_job(j) for t, j in zip(INDIRECT_TARGETS, jobs)}

    test_rows = results["demand"].test_rows
    combined = compose_net_load(results["demand"].test_pred, results["wind"].test_pred,
                                results["solar"].test_pred, setup.counts)
    actual = series.net.values[test_rows].copy()
    components = {t: {"metrics": metric_opts.evaluate(r.test_pred, r.test_actual),
                      "actual": r.test_actual, "predicted": r.test_pred}
                  for t, r in results.items()}
    report = ForecastReport(
        approach="indirect", seed=cfg.seed, partition=_partition_info(split, cfg, len(dataset)),
        metrics=metric_opts.evaluate(combined.values, actual),
        test_day=dataset.day[test_rows], test_hour=dataset.hour[test_rows],
        actual=actual, predicted=combined.values,
        loss_curves={t: r.records for t, r in results.items()}, components=components,
        config=_config_dict(cfg, setup, metric_opts))
    return {t: r.predictor for t, r in results.items()}, report


def compare_approaches(direct: ForecastReport, indirect: ForecastReport) -> dict:
    """Side-by-side metrics, deltas (indirect - direct) and the better approach per metric."""
    if (direct.partition != indirect.partition
            or not np.array_equal(direct.test_day, indirect.test_day)
            or not np.array_equal(direct.test_hour, indirect.test_hour)
            or not np.array_equal(direct.actual, indirect.actual)):
        raise ValueError("reports were not computed on the same test partition")
    rows = []
    dm, im = direct.metrics.to_dict(), indirect.metrics.to_dict()
    for name in METRIC_NAMES + ("tolerance_fraction",):
        d, i = dm[name], im[name]
        delta = None if d is None or i is None else i - d
        if delta is None or delta == 0:
            winner = "tie" if delta == 0 else None
        elif name == "tolerance_fraction":
            winner = "indirect" if delta > 0 else "direct"
        else:
            winner = "indirect" if delta < 0 else "direct"
        rows.append({"metric": name, "direct": d, "indirect": i, "delta": delta, "winner": winner,
                     "ref_direct": REFERENCE_RESULTS["direct"].get(name),
                     "ref_indirect": REFERENCE_RESULTS["indirect"].get(name)})
    return {
        "format": "nlforecast.comparison/1",
        "seed": direct.seed,
        "partition": direct.partition,
        "rows": rows,
        "nrmse_normalizer": dm["nrmse_normalizer"],
        "pct_floor": dm["pct_floor"],
        "tolerance_pct": dm["tolerance_pct"],
        "histograms": {"direct": dm["histogram"], "indirect": im["histogram"]},
        "reference": REFERENCE_RESULTS,
        "ordering_nrmse": _ordering(dm["nrmse"], im["nrmse"]),
    }


def _ordering(direct, indirect) -> str:
    if direct is None or indirect is None:
        return "undefined"
    if indirect < direct:
        return "indirect < direct"
    if indirect > direct:
        return "indirect > direct"
    return "equal"


def comparison_csv(table: dict) -> str:
    lines = ["metric,direct,indirect,delta,winner,ref_direct,ref_indirect"]
    for r in table["rows"]:
        cells = [r["metric"]] + ["" if r[k] is None else repr(r[k]) if isinstance(r[k], float) else str(r[k])
                                 for k in ("direct", "indirect", "delta", "winner",
                                           "ref_direct", "ref_indirect")]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
