import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlforecast.wind import TurbineSpec, fleet_wind_power, swept_area, turbine_power

SPEC = TurbineSpec(blade_diameter=5.6, efficiency=0.35)


def test_swept_area_values():
    assert swept_area(2.0) == pytest.approx(math.pi, rel=1e-15)
    assert swept_area(1.0) == pytest.approx(math.pi / 4, rel=1e-15)
    # pi/4 * 31.36 with pi to 30 digits, evaluated in exact rational arithmetic
    pi30 = Fraction("3.141592653589793238462643383280")
    exact = pi30 / 4 * Fraction("5.6") ** 2
    assert swept_area(5.6) == pytest.approx(float(exact), rel=1e-12)
    assert str(swept_area(5.6)).startswith("24.630086")


@pytest.mark.parametrize("d", [0.0, -1.0])
def test_swept_area_rejects_nonpositive(d):
    with pytest.raises(ValueError):
        swept_area(d)


def test_branches():
    assert turbine_power(SPEC.cut_in / 2, SPEC) == 0.0
    assert turbine_power((SPEC.rated + SPEC.cut_out) / 2, SPEC) == SPEC.rated_power
    assert turbine_power(SPEC.cut_out, SPEC) == SPEC.rated_power
    assert turbine_power(SPEC.cut_out + 1e-9, SPEC) == 0.0
    assert turbine_power(30.0, SPEC) == 0.0


def test_hand_value():
    spec = TurbineSpec(blade_diameter=4.0, efficiency=0.35, air_density=1.2)
    expected = 0.5 * 1.2 * 4 * math.pi * 216 * 0.35
    assert turbine_power(6.0, spec) == pytest.approx(expected, rel=1e-14)
    # 0.6 * 4pi * 216 * 0.35 = 570.0106 W
    assert turbine_power(6.0, spec) == pytest.approx(570.0106, abs=1e-4)


def test_continuity_at_rated():
    left = turbine_power(np.nextafter(SPEC.rated, 0), SPEC)
    right = turbine_power(SPEC.rated, SPEC)
    assert abs(left - right) <= 1e-9 * SPEC.rated_power


def test_jumps_only_at_cut_in_and_cut_out():
    eps = 1e-9
    assert turbine_power(SPEC.cut_in - eps, SPEC) == 0.0
    assert turbine_power(SPEC.cut_in, SPEC) > 0.0
    assert turbine_power(SPEC.cut_out, SPEC) == SPEC.rated_power
    assert turbine_power(SPEC.cut_out + eps, SPEC) == 0.0


def test_rated_power_derived():
    expected = 0.5 * SPEC.air_density * SPEC.area * SPEC.rated ** 3 * SPEC.efficiency
    assert SPEC.rated_power == pytest.approx(expected, rel=1e-15)


def test_from_rated_power_back_solves_efficiency():
    spec = TurbineSpec.from_rated_power(SPEC.rated_power, 5.6)
    assert spec.efficiency == pytest.approx(0.35, rel=1e-14)
    with pytest.raises(ValueError):
        TurbineSpec.from_rated_power(1e9, 5.6)  # efficiency > 1


@pytest.mark.parametrize("kwargs", [
    {"blade_diameter": 0.0, "efficiency": 0.3},
    {"blade_diameter": 5.0, "efficiency": 0.0},
    {"blade_diameter": 5.0, "efficiency": 1.1},
    {"blade_diameter": 5.0, "efficiency": 0.3, "cut_in": 12.0},
    {"blade_diameter": 5.0, "efficiency": 0.3, "rated": 30.0},
])
def test_spec_invariants(kwargs):
    with pytest.raises(ValueError):
        TurbineSpec(**kwargs)


@pytest.mark.parametrize("v", [float("nan"), float("inf"), -1.0])
def test_bad_speed(v):
    with pytest.raises(ValueError):
        turbine_power(v, SPEC)


@given(st.floats(0.0, 60.0))
def test_bounded(v):
    p = turbine_power(v, SPEC)
    assert 0.0 <= p <= SPEC.rated_power


def test_monotone_between_cut_in_and_cut_out():
    v = np.linspace(SPEC.cut_in, SPEC.cut_out, 20001)
    assert np.all(np.diff(turbine_power(v, SPEC)) >= 0)


def _classify(v, spec):
    """Brute-force branch label straight from the piecewise definition."""
    if v < spec.cut_in or v > spec.cut_out:
        return "zero"
    if v < spec.rated:
        return "cubic"
    return "rated"


def test_branch_membership_against_classifier():
    rng = np.random.default_rng(11)
    speeds = np.concatenate([rng.uniform(0, 30, 9990),
                             [SPEC.cut_in, SPEC.rated, SPEC.cut_out, 0.0, 2.999, 11.001,
                              24.999, 25.001, 3.001, 10.999]])
    out = turbine_power(speeds, SPEC)
    for v, p in zip(speeds, out):
        label = _classify(v, SPEC)
        if label == "zero":
            assert p == 0.0
        elif label == "cubic":
            assert p == pytest.approx(0.5 * SPEC.air_density * SPEC.area * v ** 3 * SPEC.efficiency,
                                      rel=1e-14)
        else:
            assert p == SPEC.rated_power


def test_fleet_scaling():
    rng = np.random.default_rng(3)
    v = rng.uniform(0, 30, 500)
    assert np.array_equal(fleet_wind_power(v, SPEC, 3), 3 * turbine_power(v, SPEC))
    assert np.all(fleet_wind_power(np.full(5, 2.0), SPEC, 3) == 0.0)
    assert fleet_wind_power([SPEC.rated], SPEC, 3)[0] == 3 * SPEC.rated_power
    with pytest.raises(ValueError):
        fleet_wind_power(v, SPEC, 0)
