import json

import pytest

from nlforecast.config import ConfigError, default_config_document, load_config, parse_config


def test_defaults():
    cfg = parse_config({})
    assert cfg.seed == 0
    assert cfg.setup.counts.residential_units == 60
    assert cfg.setup.turbine.blade_diameter == 5.6
    assert cfg.pipeline.epochs == 100 and cfg.pipeline.window == 24
    assert cfg.metrics.tolerance_pct == 20.0


def test_default_document_round_trips():
    doc = json.loads(json.dumps(default_config_document()))
    cfg = parse_config(doc)
    assert cfg == parse_config({})


@pytest.mark.parametrize("doc,key", [
    ({"turbine": {"efficency": 0.3}}, "turbine.efficency"),
    ({"turbine": {"efficiency": 1.5}}, "turbine.efficiency"),
    ({"pv": {"absorptivity": "high"}}, "pv.absorptivity"),
    ({"pv": {"surface_area": -1}}, "pv.surface_area"),
    ({"air": {"density": 0}}, "air.density"),
    ({"counts": {"pv_modules": 2.5}}, "counts.pv_modules"),
    ({"pipeline": {"window": 0}}, "pipeline.window"),
    ({"pipeline": {"epochs": "ten"}}, "pipeline.epochs"),
    ({"pipeline": {"approach": "sideways"}}, "pipeline.approach"),
    ({"pipeline": {"seed": 3}}, "pipeline.seed"),
    ({"seed": -1}, "seed"),
    ({"colour": "red"}, "colour"),
    ({"pv": [1, 2]}, "pv"),
    ({"input_csv": "does/not/exist.csv"}, "input_csv"),
])
def test_errors_name_the_key(doc, key):
    with pytest.raises(ConfigError) as info:
        parse_config(doc)
    assert info.value.key == key
    assert f"'{key}'" in str(info.value)


def test_rated_power_alternative():
    cfg = parse_config({"turbine": {"rated_power": 5000.0, "blade_diameter": 5.0}})
    assert cfg.setup.turbine.rated_power == pytest.approx(5000.0, rel=1e-12)
    with pytest.raises(ConfigError, match="turbine.rated_power"):
        parse_config({"turbine": {"rated_power": 5000.0, "efficiency": 0.3}})


def test_overrides_win():
    cfg = parse_config({"seed": 3, "pipeline": {"epochs": 7}},
                       overrides={"seed": 9, "pipeline": {"epochs": 2}})
    assert cfg.seed == 9 and cfg.pipeline.seed == 9 and cfg.pipeline.epochs == 2


def test_load_relative_paths(tmp_path):
    (tmp_path / "year.csv").write_text("x")
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"input_csv": "year.csv", "output_dir": "out"}))
    cfg = load_config(path)
    assert cfg.resolve(cfg.input_csv) == tmp_path / "year.csv"
    assert cfg.resolve(cfg.output_dir) == tmp_path / "out"


def test_load_bad_json(tmp_path):
    path = tmp_path / "run.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(path)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")
