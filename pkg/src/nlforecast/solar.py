"""PV output with a steady-state heat balance for the cell temperature.

Cell temperature satisfies ``q_s + q_c + q_r - P_pv = 0`` with absorbed
irradiance ``q_s``, net long-wave radiation ``q_r`` and convection ``q_c``
(free + forced).  Electrical output is linear in irradiance and derated by
the cell temperature relative to STC.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels

STEFAN_BOLTZMANN = 5.669e-8  # W/(m^2 K^4), value used by the thermal model
FORCED_CONVECTION_THRESHOLD = 3.3037  # m/s, laminar/turbulent switch


class ThermalSolveError(RuntimeError):
    pass


@dataclass(frozen=True)
class PvArraySpec:
    """Per-module electrical and thermal parameters (defaults: a 430 W module)."""

    rated_power: float = 430.0  # W at STC
    ref_irradiance: float = 1000.0  # W/m^2
    ref_cell_temp: float = 298.15  # K
    gamma_ref: float = 0.0026  # 1/K
    surface_area: float = 1.95  # m^2
    absorptivity: float = 0.9
    emissivity_cell: float = 0.9
    emissivity_ambient: float = 0.9
    characteristic_length: float = 1.0  # m

    def __post_init__(self):
        for name in ("rated_power", "ref_irradiance", "ref_cell_temp", "gamma_ref",
                     "surface_area", "characteristic_length"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("absorptivity", "emissivity_cell", "emissivity_ambient"):
            if not 0 < getattr(self, name) <= 1:
                raise ValueError(f"{name} must be in (0, 1], got {getattr(self, name)}")


@dataclass(frozen=True)
class AirProperties:
    """Air near 300 K (textbook values) plus gravity and the radiation constant."""

    conductivity: float = 0.0263  # W/(m K)
    density: float = 1.1774  # kg/m^3
    expansion_coeff: float = 1.0 / 300.0  # 1/K
    specific_heat: float = 1005.7  # J/(kg K)
    dynamic_viscosity: float = 1.846e-5  # Pa s
    gravity: float = 9.81  # m/s^2
    stefan_boltzmann: float = STEFAN_BOLTZMANN

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class HeatBalanceTerms:
    q_s: float
    q_r: float
    q_c: float
    p_pv: float

    @property
    def residual(self) -> float:
        return self.q_s + self.q_c + self.q_r - self.p_pv


def _finite(*values):
    for v in values:
        if not np.isfinite(v).all():
            raise ValueError("inputs must be finite")


def pv_power(irradiance, t_cell, spec: PvArraySpec, clamp: bool = True):
    """Module output in W; negative values are clipped to 0 unless ``clamp=False``."""
    _finite(irradiance, t_cell)
    p = (np.asarray(irradiance, dtype=np.float64) / spec.ref_irradiance * spec.rated_power
         * (1.0 - spec.gamma_ref * (np.asarray(t_cell, dtype=np.float64) - spec.ref_cell_temp)))
    if clamp:
        p = np.maximum(p, 0.0)
    return float(p) if np.ndim(p) == 0 else p


def heat_absorption(irradiance, spec: PvArraySpec):
    return spec.absorptivity * irradiance * spec.surface_area


def heat_radiation(t_cell, t_amb, spec: PvArraySpec, air: AirProperties):
    return spec.surface_area * air.stefan_boltzmann * (
        spec.emissivity_ambient * t_amb ** 4 - spec.emissivity_cell * t_cell ** 4)


def free_convection_coeff(t_cell, t_amb, air: AirProperties, length: float):
    """Buoyancy-driven coefficient; zero when the cell is not warmer than the air."""
    grouped = (air.gravity * air.density * air.expansion_coeff * air.specific_heat
               / (air.dynamic_viscosity * air.conductivity)) ** (1.0 / 3.0)
    dt = np.maximum(np.asarray(t_cell, dtype=np.float64) - t_amb, 0.0)
    out = 0.1 * air.conductivity / length * grouped * dt ** (1.0 / 3.0)
    return float(out) if np.ndim(out) == 0 else out


def reynolds(v, air: AirProperties, length: float):
    return air.density * v * length / air.dynamic_viscosity


def prandtl(air: AirProperties) -> float:
    return air.dynamic_viscosity * air.specific_heat / air.conductivity


def forced_convection_laminar(v, air: AirProperties, length: float):
    return 0.664 * air.conductivity / length * np.sqrt(reynolds(v, air, length)) * prandtl(air) ** (1.0 / 3.0)


def forced_convection_turbulent(v, air: AirProperties, length: float):
    return 0.037 * air.conductivity / length * reynolds(v, air, length) ** 0.8 * prandtl(air) ** (1.0 / 3.0)


def forced_convection_coeff(v, air: AirProperties, length: float):
    """Flat-plate forced convection: laminar below 3.3037 m/s, turbulent above."""
    v = np.asarray(v, dtype=np.float64)
    if (v < 0).any():
        raise ValueError("wind speed must be >= 0")
    out = np.where(v < FORCED_CONVECTION_THRESHOLD,
                   forced_convection_laminar(v, air, length),
                   forced_convection_turbulent(v, air, length))
    return float(out) if out.ndim == 0 else out


def heat_balance_terms(t_cell, irradiance, t_amb, v, spec: PvArraySpec,
                       air: AirProperties) -> HeatBalanceTerms:
    L = spec.characteristic_length
    h_c = free_convection_coeff(t_cell, t_amb, air, L) + forced_convection_coeff(v, air, L)
    return HeatBalanceTerms(
        q_s=float(heat_absorption(irradiance, spec)),
        q_r=float(heat_radiation(t_cell, t_amb, spec, air)),
        q_c=float(-h_c * spec.surface_area * (t_cell - t_amb)),
        p_pv=float(pv_power(irradiance, t_cell, spec, clamp=False)),
    )


def heat_balance_residual(t_cell, irradiance, t_amb, v, spec: PvArraySpec,
                          air: AirProperties) -> float:
    """q_s + q_c + q_r - P_pv in W (P_pv unclamped); decreasing in ``t_cell``."""
    if not t_cell > 0:
        raise ValueError("cell temperature must be > 0 K")
    return _kernels.heat_balance_residual(float(t_cell), float(irradiance), float(t_amb),
                                          float(v), pack_params(spec, air))


def pack_params(spec: PvArraySpec, air: AirProperties) -> tuple:
    """Flat parameter tuple in the order the solver kernels expect."""
    return (spec.rated_power, spec.ref_irradiance, spec.ref_cell_temp, spec.gamma_ref,
            spec.surface_area, spec.absorptivity, spec.emissivity_cell, spec.emissivity_ambient,
            spec.characteristic_length, air.conductivity, air.density, air.expansion_coeff,
            air.specific_heat, air.dynamic_viscosity, air.gravity, air.stefan_boltzmann,
            FORCED_CONVECTION_THRESHOLD)


def _check_inputs(irradiance, t_amb, v):
    _finite(irradiance, t_amb, v)
    if np.any(np.asarray(irradiance) < 0):
        raise ValueError("irradiance must be >= 0")
    if np.any(np.asarray(t_amb) <= 0):
        raise ValueError("ambient temperature must be > 0 K")
    if np.any(np.asarray(v) < 0):
        raise ValueError("wind speed must be >= 0")


def solve_cell_temperature(irradiance, t_amb, v, spec: PvArraySpec, air: AirProperties) -> float:
    """Cell temperature in K balancing the heat flows, by bracketed bisection.

    The bracket starts at [T_a - 20 K, T_a + 120 K] and each side is doubled
    (up to 5 times) until the residual changes sign.
    """
    _check_inputs(irradiance, t_amb, v)
    t, status = _kernels.solve_cell_temperature(float(irradiance), float(t_amb), float(v),
                                                pack_params(spec, air))
    if status == 1:
        raise ThermalSolveError(
            f"no sign change of the heat balance after 5 bracket doublings "
            f"(I={irradiance}, T_a={t_amb}, v={v}); check PV/air parameters")
    if status != 0:
        raise ThermalSolveError(f"bisection did not converge (I={irradiance}, T_a={t_amb}, v={v})")
    return t


def solve_cell_temperatures(irradiance, t_amb, v, spec: PvArraySpec,
                            air: AirProperties) -> np.ndarray:
    """Vector version of :func:`solve_cell_temperature`."""
    irr = np.ascontiguousarray(irradiance, dtype=np.float64)
    ta = np.ascontiguousarray(t_amb, dtype=np.float64)
    ws = np.ascontiguousarray(v, dtype=np.float64)
    _check_inputs(irr, ta, ws)
    temps, status = _kernels.solve_cell_temperature_many(irr, ta, ws, pack_params(spec, air))
    bad = np.flatnonzero(status)
    if bad.size:
        k = int(bad[0])
        raise ThermalSolveError(
            f"cell temperature solve failed at index {k} (status {int(status[k])}, "
            f"I={irr[k]}, T_a={ta[k]}, v={ws[k]})")
    return temps


def array_solar_power(dataset, spec: PvArraySpec, air: AirProperties, count: int) -> np.ndarray:
    """Fleet PV output in W for every hour of ``dataset``; dark hours are 0 without a solve."""
    if int(count) != count or count < 1:
        raise ValueError(f"module count must be a positive integer, got {count}")
    irr = np.asarray(dataset.irradiance_collector, dtype=np.float64)
    out = np.zeros(len(irr))
    lit = np.flatnonzero(irr > 0)
    if lit.size:
        t_cell = solve_cell_temperatures(irr[lit], np.asarray(dataset.temp_ambient)[lit],
                                         np.asarray(dataset.wind_speed)[lit], spec, air)
        out[lit] = count * pv_power(irr[lit], t_cell, spec)
    return out


def cell_temperatures(dataset, spec: PvArraySpec, air: AirProperties) -> np.ndarray:
    """Solved cell temperature per hour; dark hours report the ambient temperature."""
    irr = np.asarray(dataset.irradiance_collector, dtype=np.float64)
    out = np.array(dataset.temp_ambient, dtype=np.float64)
    lit = np.flatnonzero(irr > 0)
    if lit.size:
        out[lit] = solve_cell_temperatures(irr[lit], out[lit],
                                           np.asarray(dataset.wind_speed)[lit], spec, air)
    return out


def threshold_branch_ratio(air: AirProperties, length: float) -> float:
    """Turbulent / laminar forced coefficient at the 3.3037 m/s switch."""
    v = FORCED_CONVECTION_THRESHOLD
    return float(forced_convection_turbulent(v, air, length) / forced_convection_laminar(v, air, length))


__all__ = [
    "AirProperties",
    "HeatBalanceTerms",
    "PvArraySpec",
    "STEFAN_BOLTZMANN",
    "ThermalSolveError",
    "array_solar_power",
    "cell_temperatures",
    "forced_convection_coeff",
    "free_convection_coeff",
    "heat_absorption",
    "heat_balance_residual",
    "heat_balance_terms",
    "heat_radiation",
    "pv_power",
    "solve_cell_temperature",
    "solve_cell_temperatures",
    "threshold_branch_ratio",
]
