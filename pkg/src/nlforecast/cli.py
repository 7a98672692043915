"""Command-line entry point: ``nlforecast {synth,derive,train,predict,compare}``.

Global flags (accepted before or after the command)::

    --config PATH   JSON run configuration (see nlforecast.config)
    --seed N        root seed; overrides the config
    --out PATH      output directory (synth/predict also accept a .csv file)
    --force         overwrite existing outputs

Without an input CSV (``--input`` or ``input_csv`` in the config) the
commands that need data synthesize a year from the root seed.  Data goes
to files; progress and errors go to stderr.  Exit status is 0 only on
success.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config, parse_config
from .data import DataError, FeatureStats, YearDataset, generate_synthetic_year, read_csv, write_csv
from .forecast import (INDIRECT_TARGETS, ForecastReport, Predictor, comparison_csv, compare_approaches,
                       derive_series, run_direct, run_indirect)
from .metrics import histogram_csv
from .netload import PlantCounts, compose_net_load
from .nn import SnapshotError, load_snapshot, save_snapshot
from .solar import ThermalSolveError, cell_temperatures

log = logging.getLogger("nlforecast")

SNAPSHOT_KIND = "nlforecast.predictor"


class CliError(RuntimeError):
    """A user-facing failure; the message is printed without a traceback."""


# --- output helpers ---------------------------------------------------------

class Outputs:
    """Collects files to write so an existing file is detected before any work is done."""

    def __init__(self, directory: Path, force: bool):
        self.directory = directory
        self.force = force

    def path(self, name: str) -> Path:
        return self.directory / name

    def check(self, *names: str) -> None:
        existing = [str(self.path(n)) for n in names if self.path(n).exists()]
        if existing and not self.force:
            raise CliError(f"refusing to overwrite {', '.join(existing)} (use --force)")

    def write_text(self, name: str, text: str) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        p = self.path(name)
        with open(p, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        log.info("wrote %s", p)
        return p


def _file_target(out: Path | None, default_name: str, force: bool) -> Path:
    """``--out`` naming a .csv file is used as-is; anything else is a directory."""
    if out is None:
        target = Path(default_name)
    elif out.suffix.lower() == ".csv":
        target = out
    else:
        target = out / default_name
    if target.exists() and not force:
        raise CliError(f"refusing to overwrite {target} (use --force)")
    target.parent.mkdir(parents=True, exist_ok=True)
    return target


def _csv(header, columns) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in zip(*columns):
        buf.write(",".join(str(int(v)) if isinstance(v, (int, np.integer)) else repr(float(v))
                           for v in row) + "\n")
    return buf.getvalue()


def _loss_csv(report: ForecastReport) -> str:
    lines = ["target,epoch,train_loss,val_loss"]
    for target, records in report.loss_curves.items():
        for r in records:
            lines.append(f"{target},{r.epoch},{r.train_loss!r},{r.val_loss!r}")
    return "\n".join(lines) + "\n"


def _predictions_csv(report: ForecastReport) -> str:
    return _csv(("day", "hour", "actual_kW", "predicted_kW"),
                (report.test_day, report.test_hour, report.actual, report.predicted))


def _report_files(outputs: Outputs, report: ForecastReport) -> dict[str, str]:
    a = report.approach
    return {
        f"report_{a}.json": report.to_json(),
        f"predictions_{a}.csv": _predictions_csv(report),
        f"loss_{a}.csv": _loss_csv(report),
        f"histogram_{a}.csv": histogram_csv(report.metrics.histogram),
    }


# --- configuration and input ------------------------------------------------

def _run_config(args) -> RunConfig:
    overrides: dict = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    pipeline = {}
    if getattr(args, "epochs", None) is not None:
        pipeline["epochs"] = args.epochs
    if pipeline:
        overrides["pipeline"] = pipeline
    if getattr(args, "input", None) is not None:
        overrides["input_csv"] = str(Path(args.input).resolve())
    if args.config is not None:
        return load_config(args.config, overrides)
    return parse_config({}, overrides=overrides)


def _out_dir(args, cfg: RunConfig) -> Path:
    if args.out is not None:
        return Path(args.out)
    if cfg.output_dir is not None:
        return cfg.resolve(cfg.output_dir)
    return Path(".")


def _load_dataset(cfg: RunConfig) -> tuple[YearDataset, str]:
    if cfg.input_csv is None:
        log.info("no input CSV given; synthesizing a year from seed %d", cfg.seed)
        return generate_synthetic_year(cfg.seed), f"synthetic(seed={cfg.seed})"
    path = cfg.resolve(cfg.input_csv)
    return read_csv(path, allow_leap=cfg.allow_leap), str(path)


# --- commands ---------------------------------------------------------------

def cmd_synth(args) -> int:
    seed = args.seed
    if seed is None:
        seed = load_config(args.config).seed if args.config else 0
    target = _file_target(Path(args.out) if args.out else None, "synthetic_year.csv", args.force)
    write_csv(generate_synthetic_year(seed), target)
    log.info("wrote %s (seed %d)", target, seed)
    return 0


def cmd_derive(args) -> int:
    cfg = _run_config(args)
    outputs = Outputs(_out_dir(args, cfg), args.force)
    names = ("wind.csv", "solar.csv", "netload.csv")
    outputs.check(*names)
    dataset, _ = _load_dataset(cfg)
    series = derive_series(dataset, cfg.setup)
    t_cell = cell_temperatures(dataset, cfg.setup.pv, cfg.setup.air)
    outputs.write_text("wind.csv", _csv(
        ("day", "hour", "wind_mps", "wind_power_W"),
        (dataset.day, dataset.hour, dataset.wind_speed, series.wind_total)))
    outputs.write_text("solar.csv", _csv(
        ("day", "hour", "irradiance_Wm2", "cell_temp_K", "solar_power_W"),
        (dataset.day, dataset.hour, dataset.irradiance_collector, t_cell, series.solar_total)))
    outputs.write_text("netload.csv", series.net.to_csv())
    return 0


def _snapshot_payload(approach: str, predictors: dict[str, Predictor], cfg: RunConfig, source: str):
    meta = {
        "kind": SNAPSHOT_KIND,
        "approach": approach,
        "targets": list(predictors),
        "window": cfg.pipeline.window,
        "horizon": cfg.pipeline.horizon,
        "seed": cfg.seed,
        "counts": dataclasses.asdict(cfg.setup.counts),
        "source": source,
    }
    arrays = {}
    for t, p in predictors.items():
        arrays[f"{t}.feature_mean"] = p.feature_stats.mean
        arrays[f"{t}.feature_std"] = p.feature_stats.std
        arrays[f"{t}.label_mean"] = p.label_stats.mean
        arrays[f"{t}.label_std"] = p.label_stats.std
    return {t: p.model for t, p in predictors.items()}, meta, arrays


def _train_one(approach: str, dataset, cfg: RunConfig):
    pipe = dataclasses.replace(cfg.pipeline, approach=approach)
    series = derive_series(dataset, cfg.setup)
    runner = run_direct if approach == "direct" else run_indirect
    log.info("training %s approach (%d epochs, hidden %d)", approach, pipe.epochs, pipe.hidden)
    bundle, report = runner(dataset, cfg.setup, pipe, cfg.metrics, series=series)
    predictors = {"net": bundle} if approach == "direct" else bundle
    return predictors, report


def cmd_train(args) -> int:
    cfg = _run_config(args)
    approach = args.approach
    outputs = Outputs(_out_dir(args, cfg), args.force)
    model_name = f"model_{approach}.npz"
    outputs.check(model_name, *_report_names(approach))
    dataset, source = _load_dataset(cfg)
    predictors, report = _train_one(approach, dataset, cfg)
    outputs.directory.mkdir(parents=True, exist_ok=True)
    models, meta, arrays = _snapshot_payload(approach, predictors, cfg, source)
    save_snapshot(outputs.path(model_name), models, meta=meta, arrays=arrays)
    log.info("wrote %s", outputs.path(model_name))
    for name, text in _report_files(outputs, report).items():
        outputs.write_text(name, text)
    _summary(report)
    return 0


def _report_names(approach: str) -> tuple[str, ...]:
    return (f"report_{approach}.json", f"predictions_{approach}.csv", f"loss_{approach}.csv",
            f"histogram_{approach}.csv")


def _summary(report: ForecastReport) -> None:
    m = report.metrics
    nrmse = "n/a" if m.nrmse is None else f"{m.nrmse:.5f}"
    print(f"{report.approach}: mae={m.mae:.5f} mse={m.mse:.5f} rmse={m.rmse:.5f} "
          f"nrmse={nrmse} within{m.tolerance_pct:g}%={m.tolerance_fraction:.4f}", file=sys.stderr)


def load_predictors(path) -> tuple[dict, dict[str, Predictor]]:
    """Rebuild the predictors stored by ``train`` from a snapshot file."""
    models, meta, arrays = load_snapshot(path)
    if meta.get("kind") != SNAPSHOT_KIND:
        raise SnapshotError(f"{path}: not a predictor snapshot (kind={meta.get('kind')!r})")
    predictors = {}
    for t in meta["targets"]:
        predictors[t] = Predictor(
            t, models[t],
            FeatureStats(arrays[f"{t}.feature_mean"], arrays[f"{t}.feature_std"]),
            FeatureStats(arrays[f"{t}.label_mean"], arrays[f"{t}.label_std"]),
            meta["window"], meta["horizon"])
    return meta, predictors


def cmd_predict(args) -> int:
    if args.model is None:
        raise CliError("predict needs --model")
    if args.input is None:
        raise CliError("predict needs --input")
    meta, predictors = load_predictors(args.model)
    target = _file_target(Path(args.out) if args.out else None, "predictions.csv", args.force)
    dataset = read_csv(args.input, allow_leap=True, require_full_year=False)
    offset = meta["window"] + meta["horizon"] - 1
    if len(dataset) <= offset:
        raise CliError(f"input has {len(dataset)} rows; at least {offset + 1} are needed "
                       f"for window {meta['window']} and horizon {meta['horizon']}")
    outputs = {t: p.predict_dataset(dataset) for t, p in predictors.items()}
    rows = next(iter(outputs.values()))[0]
    day, hour = dataset.day[rows], dataset.hour[rows]
    if meta["approach"] == "direct":
        text = _csv(("day", "hour", "predicted_kW"), (day, hour, outputs["net"][1]))
    else:
        counts = PlantCounts(**meta["counts"])
        d, w, s = (outputs[t][1] for t in INDIRECT_TARGETS)
        net = compose_net_load(d, w, s, counts)
        text = _csv(("day", "hour", "predicted_kW", "demand_unit_kW", "wind_W", "solar_W"),
                    (day, hour, net.values, d, w, s))
    with open(target, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)
    log.info("wrote %s (%d rows)", target, len(rows))
    return 0


def cmd_compare(args) -> int:
    cfg = _run_config(args)
    outputs = Outputs(_out_dir(args, cfg), args.force)
    names = ["comparison.json", "comparison.csv"]
    for a in ("direct", "indirect"):
        names += [f"model_{a}.npz", *_report_names(a)]
    outputs.check(*names)
    dataset, source = _load_dataset(cfg)
    reports = {}
    for approach in ("direct", "indirect"):
        predictors, report = _train_one(approach, dataset, cfg)
        reports[approach] = report
        outputs.directory.mkdir(parents=True, exist_ok=True)
        models, meta, arrays = _snapshot_payload(approach, predictors, cfg, source)
        save_snapshot(outputs.path(f"model_{approach}.npz"), models, meta=meta, arrays=arrays)
        for name, text in _report_files(outputs, report).items():
            outputs.write_text(name, text)
        _summary(report)
    table = compare_approaches(reports["direct"], reports["indirect"])
    outputs.write_text("comparison.json", json.dumps(table, indent=2, sort_keys=True) + "\n")
    outputs.write_text("comparison.csv", comparison_csv(table))
    sys.stdout.write(comparison_csv(table))
    print(f"nRMSE ordering: {table['ordering_nrmse']} "
          f"(reference values: direct 0.09642, indirect 0.09453)", file=sys.stderr)
    return 0


# --- argument parsing -------------------------------------------------------

def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", type=Path, default=default, help="JSON run configuration")
    parser.add_argument("--seed", type=int, default=default, help="root seed (overrides config)")
    parser.add_argument("--out", type=Path, default=default, help="output directory or file")
    parser.add_argument("--force", action="store_true",
                        default=argparse.SUPPRESS if suppress else False,
                        help="overwrite existing outputs")
    parser.add_argument("-v", "--verbose", action="count",
                        default=argparse.SUPPRESS if suppress else 0,
                        help="more progress output on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlforecast",
                                     description="Microgrid net-load forecasting with stacked LSTMs.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic hourly year as CSV")
    _global_flags(p, suppress=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("derive", help="write wind, solar and net-load series")
    _global_flags(p, suppress=True)
    p.add_argument("--input", help="weather/demand CSV (default: config or synthetic year)")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("train", help="train one approach and write snapshot and report")
    _global_flags(p, suppress=True)
    p.add_argument("--approach", choices=("direct", "indirect"), default="direct")
    p.add_argument("--epochs", type=int, help="override pipeline.epochs")
    p.add_argument("--input", help="weather/demand CSV (default: config or synthetic year)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict net load with a trained snapshot")
    _global_flags(p, suppress=True)
    p.add_argument("--model", help="snapshot written by 'train'")
    p.add_argument("--input", help="weather/demand CSV")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("compare", help="train both approaches and compare them")
    _global_flags(p, suppress=True)
    p.add_argument("--epochs", type=int, help="override pipeline.epochs")
    p.add_argument("--input", help="weather/demand CSV (default: config or synthetic year)")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (CliError, DataError, SnapshotError, ThermalSolveError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (ValueError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
