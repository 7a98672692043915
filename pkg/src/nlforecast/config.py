"""Run configuration: one JSON document, validated into typed objects.

Example (every section and key is optional; defaults shown)::

    {
      "input_csv": "year.csv",
      "output_dir": "out",
      "seed": 0,
      "allow_leap": false,
      "counts":   {"residential_units": 60, "pv_modules": 100, "wind_turbines": 3},
      "turbine":  {"blade_diameter": 5.6, "efficiency": 0.35, "air_density": 1.225,
                   "cut_in": 3.0, "rated": 11.0, "cut_out": 25.0},
      "pv":       {"rated_power": 430.0, "ref_irradiance": 1000.0, "ref_cell_temp": 298.15,
                   "gamma_ref": 0.0026, "surface_area": 1.95, "absorptivity": 0.9,
                   "emissivity_cell": 0.9, "emissivity_ambient": 0.9,
                   "characteristic_length": 1.0},
      "air":      {"conductivity": 0.0263, "density": 1.1774, "expansion_coeff": 0.003333,
                   "specific_heat": 1005.7, "dynamic_viscosity": 1.846e-05, "gravity": 9.81,
                   "stefan_boltzmann": 5.669e-08},
      "pipeline": {"window": 24, "horizon": 1, "epochs": 100, "batch_size": 32,
                   "early_stop_patience": null, "indirect_patience": 10, "hidden": 32,
                   "dense": 32, "dropout": 0.4, "l2": 0.001, "lr": 0.001},
      "metrics":  {"bin_width_pct": 10, "tolerance_pct": 20, "floor_fraction": 0.01,
                   "histogram_samples": null}
    }

``turbine`` may give ``rated_power`` (W) instead of ``efficiency``; the
efficiency is then back-solved so the curve stays continuous at rated speed.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .forecast import MetricOptions, PipelineConfig, PlantSetup
from .netload import PlantCounts
from .solar import AirProperties, PvArraySpec
from .wind import TurbineSpec


class ConfigError(ValueError):
    """Invalid configuration; ``key`` is the dotted path of the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    input_csv: Path | None = None
    output_dir: Path | None = None
    seed: int = 0
    allow_leap: bool = False
    setup: PlantSetup = field(default_factory=PlantSetup)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    metrics: MetricOptions = field(default_factory=MetricOptions)
    base_dir: Path = Path(".")

    def resolve(self, path) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


_TOP_KEYS = {"input_csv", "output_dir", "seed", "allow_leap", "counts", "turbine", "pv", "air",
             "pipeline", "metrics"}


def _section(doc: dict, name: str) -> dict:
    value = doc.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(name, "must be an object")
    return value


def _build(cls, section: str, values: dict, exclude=()):
    allowed = {f.name for f in dataclasses.fields(cls)} - set(exclude)
    for key in values:
        if key not in allowed:
            raise ConfigError(f"{section}.{key}", "unknown key")
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        key = _guess_key(str(exc), values)
        raise ConfigError(f"{section}.{key}" if key else section, str(exc)) from None


def _guess_key(message: str, values: dict) -> str | None:
    for key in sorted(values, key=len, reverse=True):
        if key in message:
            return key
    return None


def _check_types(section: str, values: dict, cls) -> None:
    """Reject strings/lists where numbers are expected before dataclass checks run."""
    for f in dataclasses.fields(cls):
        if f.name not in values:
            continue
        v = values[f.name]
        if v is None:
            continue
        if f.name in ("approach",):
            if not isinstance(v, str):
                raise ConfigError(f"{section}.{f.name}", "must be a string")
            continue
        if f.name == "split":
            if not (isinstance(v, list) and len(v) == 3):
                raise ConfigError(f"{section}.{f.name}", "must be a list of three fractions")
            continue
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{section}.{f.name}", f"must be a number, got {v!r}")


def parse_config(doc: dict, base_dir=".", overrides: dict | None = None) -> RunConfig:
    """Validate a config mapping; ``overrides`` are applied on top (CLI flags)."""
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    for key in doc:
        if key not in _TOP_KEYS:
            raise ConfigError(key, "unknown key")
    overrides = overrides or {}
    seed = overrides.get("seed", doc.get("seed", 0))
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed", f"must be a non-negative integer, got {seed!r}")
    allow_leap = doc.get("allow_leap", False)
    if not isinstance(allow_leap, bool):
        raise ConfigError("allow_leap", "must be true or false")

    counts_doc = _section(doc, "counts")
    for key, value in counts_doc.items():
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"counts.{key}", f"must be a positive integer, got {value!r}")
    counts = _build(PlantCounts, "counts", counts_doc)

    turbine_doc = dict(_section(doc, "turbine"))
    rated_power = turbine_doc.pop("rated_power", None)
    _check_types("turbine", turbine_doc, TurbineSpec)
    turbine_doc.setdefault("blade_diameter", 5.6)
    if rated_power is not None:
        if "efficiency" in turbine_doc:
            raise ConfigError("turbine.rated_power", "give either rated_power or efficiency, not both")
        if isinstance(rated_power, bool) or not isinstance(rated_power, (int, float)) or rated_power <= 0:
            raise ConfigError("turbine.rated_power", f"must be a positive number, got {rated_power!r}")
        for key in turbine_doc:
            if key not in {f.name for f in dataclasses.fields(TurbineSpec)}:
                raise ConfigError(f"turbine.{key}", "unknown key")
        try:
            turbine = TurbineSpec.from_rated_power(rated_power, **turbine_doc)
        except ValueError as exc:
            raise ConfigError("turbine.rated_power", str(exc)) from None
    else:
        turbine_doc.setdefault("efficiency", 0.35)
        turbine = _build(TurbineSpec, "turbine", turbine_doc)

    pv_doc = _section(doc, "pv")
    _check_types("pv", pv_doc, PvArraySpec)
    pv = _build(PvArraySpec, "pv", pv_doc)
    air_doc = _section(doc, "air")
    _check_types("air", air_doc, AirProperties)
    air = _build(AirProperties, "air", air_doc)

    pipe_doc = dict(_section(doc, "pipeline"))
    pipe_doc.update(overrides.get("pipeline", {}))
    if "seed" in pipe_doc:
        raise ConfigError("pipeline.seed", "set the root 'seed' key instead")
    _check_types("pipeline", pipe_doc, PipelineConfig)
    for key in ("window", "horizon", "epochs", "batch_size", "hidden", "dense",
                "early_stop_patience", "indirect_patience"):
        v = pipe_doc.get(key)
        if v is not None and (isinstance(v, bool) or not isinstance(v, int)):
            raise ConfigError(f"pipeline.{key}", f"must be an integer, got {v!r}")
    pipe_doc["seed"] = seed
    pipeline = _build(PipelineConfig, "pipeline", pipe_doc)

    metrics_doc = _section(doc, "metrics")
    _check_types("metrics", metrics_doc, MetricOptions)
    metrics = _build(MetricOptions, "metrics", metrics_doc)

    base = Path(base_dir)
    input_csv = overrides.get("input_csv", doc.get("input_csv"))
    output_dir = overrides.get("output_dir", doc.get("output_dir"))
    for key, value in (("input_csv", input_csv), ("output_dir", output_dir)):
        if value is not None and not isinstance(value, (str, Path)):
            raise ConfigError(key, "must be a path string")
    cfg = RunConfig(
        input_csv=Path(input_csv) if input_csv is not None else None,
        output_dir=Path(output_dir) if output_dir is not None else None,
        seed=seed, allow_leap=allow_leap,
        setup=PlantSetup(turbine=turbine, pv=pv, air=air, counts=counts),
        pipeline=pipeline, metrics=metrics, base_dir=base)
    if cfg.input_csv is not None and not cfg.resolve(cfg.input_csv).is_file():
        raise ConfigError("input_csv", f"file not found: {cfg.resolve(cfg.input_csv)}")
    return cfg


def load_config(path, overrides: dict | None = None) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return parse_config(doc, base_dir=path.parent, overrides=overrides)


def default_config_document() -> dict:
    """The full default configuration as a JSON-compatible mapping."""
    setup = PlantSetup()
    pipe = dataclasses.asdict(PipelineConfig())
    pipe.pop("seed")
    pipe.pop("approach")
    pipe["split"] = list(pipe["split"])
    return {
        "seed": 0,
        "allow_leap": False,
        "counts": dataclasses.asdict(setup.counts),
        "turbine": dataclasses.asdict(setup.turbine),
        "pv": dataclasses.asdict(setup.pv),
        "air": dataclasses.asdict(setup.air),
        "pipeline": pipe,
        "metrics": dataclasses.asdict(MetricOptions()),
    }
