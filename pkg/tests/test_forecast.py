import dataclasses
import json

import numpy as np
import pytest

from nlforecast.data import generate_synthetic_year, split_dataset
from nlforecast.forecast import (REFERENCE_RESULTS, PipelineConfig, PlantSetup, compare_approaches,
                                 comparison_csv, derive_series, run_direct, run_indirect)
from nlforecast.metrics import compute_metrics
from nlforecast.netload import compose_net_load

SMALL = PipelineConfig(epochs=2, hidden=4, dense=4, window=6, batch_size=64, indirect_patience=None)
SETUP = PlantSetup()


@pytest.fixture(scope="module")
def year():
    return generate_synthetic_year(0)


@pytest.fixture(scope="module")
def direct(year):
    return run_direct(year, SETUP, SMALL)


@pytest.fixture(scope="module")
def indirect(year, monkeypatch_module):
    monkeypatch_module.setenv("NETLOAD_THREADS", "1")
    return run_indirect(year, SETUP, SMALL)


@pytest.fixture(scope="module")
def monkeypatch_module():
    mp = pytest.MonkeyPatch()
    yield mp
    mp.undo()


def test_direct_report_shape(year, direct):
    predictor, report = direct
    split = split_dataset(len(year))
    n_test = len(split.test) - SMALL.window
    assert len(report.predicted) == len(report.actual) == n_test
    assert report.partition == {"n": 8760, "train": [0, 7008], "validation": [7008, 7884],
                                "test": [7884, 8760], "window": 6, "horizon": 1}
    assert report.test_day[0] == year.day[7884 + 6] and report.test_hour[0] == year.hour[7884 + 6]
    assert len(report.loss_curves["net"]) == 2
    assert np.all(np.isfinite(report.predicted))
    doc = report.to_dict()
    assert doc["reference"] == REFERENCE_RESULTS["direct"]
    assert doc["metrics"]["nrmse"] is not None and doc["seed"] == 0
    assert doc["kernel_backend"] in ("cython", "python")


def test_direct_actual_is_derived_net_load(year, direct):
    _, report = direct
    net = derive_series(year, SETUP).net.values
    assert np.array_equal(report.actual, net[7884 + 6:])


def test_direct_deterministic(year, direct):
    _, again = run_direct(year, SETUP, SMALL)
    assert again.to_json() == direct[1].to_json()


def test_seed_changes_result(year, direct):
    _, other = run_direct(year, SETUP, dataclasses.replace(SMALL, seed=1))
    assert other.to_json() != direct[1].to_json()
    assert other.to_dict()["seed"] == 1


def test_test_partition_isolated(year, direct):
    """Changing anything inside the test block must not change training."""
    rng = np.random.default_rng(0)
    demand = np.array(year.demand_unit)
    wind = np.array(year.wind_speed)
    demand[7884:] = rng.uniform(0, 5, 876)
    wind[7884:] = rng.uniform(0, 20, 876)
    altered = year.replace(demand_unit=demand, wind_speed=wind)
    predictor, report = run_direct(altered, SETUP, SMALL)
    for k, v in direct[0].model.params.items():
        assert np.array_equal(predictor.model.params[k], v)
    assert report.loss_curves == direct[1].loss_curves
    assert np.array_equal(predictor.feature_stats.mean, direct[0].feature_stats.mean)


def test_predict_dataset_matches_report(year, direct):
    predictor, report = direct
    rows, pred = predictor.predict_dataset(year)
    assert rows[0] == SMALL.window
    keep = rows >= 7884 + SMALL.window
    assert pred[keep].tobytes() == report.predicted.tobytes()


def test_indirect_report(year, indirect):
    bundle, report = indirect
    assert set(bundle) == {"demand", "wind", "solar"}
    assert set(report.components) == {"demand", "wind", "solar"}
    series = derive_series(year, SETUP)
    d, w, s = (report.components[t]["predicted"] for t in ("demand", "wind", "solar"))
    assert np.array_equal(report.predicted, compose_net_load(d, w, s, SETUP.counts).values)
    assert np.array_equal(report.components["wind"]["actual"], series.wind_total[7884 + 6:])
    doc = json.loads(report.to_json())
    assert doc["components"]["solar"]["metrics"]["mae"] >= 0
    assert set(doc["loss_curves"]) == {"demand", "wind", "solar"}


def test_indirect_deterministic_across_worker_counts(year, indirect, monkeypatch):
    monkeypatch.setenv("NETLOAD_THREADS", "3")
    _, again = run_indirect(year, SETUP, SMALL)
    assert again.to_json() == indirect[1].to_json()


def test_indirect_no_renewables(year, monkeypatch):
    monkeypatch.setenv("NETLOAD_THREADS", "1")
    calm = year.replace(wind_speed=np.zeros(len(year)), irradiance_collector=np.zeros(len(year)))
    cfg = dataclasses.replace(SMALL, epochs=1)
    _, report = run_indirect(calm, SETUP, cfg)
    demand_pred = report.components["demand"]["predicted"]
    assert np.all(report.components["wind"]["predicted"] == 0.0)
    assert np.all(report.components["solar"]["predicted"] == 0.0)
    np.testing.assert_array_equal(report.predicted, 60 * demand_pred)


def test_compare_matches_recomputation(direct, indirect):
    table = compare_approaches(direct[1], indirect[1])
    d = compute_metrics(direct[1].predicted, direct[1].actual)
    i = compute_metrics(indirect[1].predicted, indirect[1].actual)
    for row in table["rows"]:
        name = row["metric"]
        dv, iv = getattr(d, name), getattr(i, name)
        assert row["direct"] == dv and row["indirect"] == iv
        better_low = name != "tolerance_fraction"
        expected = ("indirect" if (iv < dv) == better_low else "direct") if iv != dv else "tie"
        assert row["winner"] == expected
    assert table["reference"]["direct"]["nrmse"] == 0.09642
    assert table["reference"]["indirect"]["nrmse"] == 0.09453
    assert table["ordering_nrmse"] in ("indirect < direct", "indirect > direct", "equal")
    csv = comparison_csv(table)
    assert csv.splitlines()[0].startswith("metric,direct,indirect,delta,winner")
    assert len(csv.splitlines()) == 6


def test_compare_rejects_mismatched_partitions(year, direct):
    _, other = run_direct(year, SETUP, dataclasses.replace(SMALL, window=5, epochs=0))
    with pytest.raises(ValueError, match="partition"):
        compare_approaches(direct[1], other)


def test_zero_epochs_still_reports(year):
    _, report = run_direct(year, SETUP, dataclasses.replace(SMALL, epochs=0))
    assert report.loss_curves["net"] == []
    assert np.all(np.isfinite(report.predicted))


def test_pipeline_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(approach="both")
    with pytest.raises(ValueError):
        PipelineConfig(window=0)
