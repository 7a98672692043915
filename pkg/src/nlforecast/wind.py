"""Wind turbine power curve (cubic below rated speed, flat to cut-out)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def swept_area(diameter: float) -> float:
    """Rotor swept area pi/4 * D^2 in m^2."""
    if not diameter > 0:
        raise ValueError(f"blade diameter must be > 0, got {diameter}")
    return math.pi / 4.0 * diameter ** 2


@dataclass(frozen=True)
class TurbineSpec:
    blade_diameter: float  # m
    efficiency: float  # (0, 1]
    air_density: float = 1.225  # kg/m^3
    cut_in: float = 3.0  # m/s
    rated: float = 11.0  # m/s
    cut_out: float = 25.0  # m/s

    def __post_init__(self):
        if not self.blade_diameter > 0:
            raise ValueError(f"blade_diameter must be > 0, got {self.blade_diameter}")
        if not 0 < self.efficiency <= 1:
            raise ValueError(f"efficiency must be in (0, 1], got {self.efficiency}")
        if not self.air_density > 0:
            raise ValueError(f"air_density must be > 0, got {self.air_density}")
        if not 0 <= self.cut_in < self.rated < self.cut_out:
            raise ValueError("speeds must satisfy 0 <= cut_in < rated < cut_out, got "
                             f"{self.cut_in}, {self.rated}, {self.cut_out}")

    @property
    def area(self) -> float:
        return swept_area(self.blade_diameter)

    @property
    def rated_power(self) -> float:
        """Output at rated speed; equal to the cubic branch there, so the curve is continuous."""
        return self.aerodynamic_power(self.rated)

    def aerodynamic_power(self, v):
        return 0.5 * self.air_density * self.area * np.asarray(v, dtype=np.float64) ** 3 * self.efficiency

    @classmethod
    def from_rated_power(cls, rated_power: float, blade_diameter: float, **kwargs) -> "TurbineSpec":
        """Build a spec from a nameplate rating by back-solving the efficiency."""
        rho = kwargs.get("air_density", cls.air_density)
        v_r = kwargs.get("rated", cls.rated)
        eff = rated_power / (0.5 * rho * swept_area(blade_diameter) * v_r ** 3)
        return cls(blade_diameter=blade_diameter, efficiency=eff, **kwargs)


def turbine_power(v, spec: TurbineSpec):
    """Single-turbine electrical output in W for wind speed(s) ``v``."""
    speed = np.asarray(v, dtype=np.float64)
    if not np.isfinite(speed).all():
        raise ValueError("wind speed must be finite")
    if (speed < 0).any():
        raise ValueError("wind speed must be >= 0")
    cubic = spec.aerodynamic_power(speed)
    out = np.where(speed < spec.cut_in, 0.0,
                   np.where(speed < spec.rated, cubic,
                            np.where(speed <= spec.cut_out, spec.rated_power, 0.0)))
    return float(out) if out.ndim == 0 else out


def fleet_wind_power(speeds, spec: TurbineSpec, count: int) -> np.ndarray:
    """Total output in W of ``count`` identical turbines."""
    if int(count) != count or count < 1:
        raise ValueError(f"turbine count must be a positive integer, got {count}")
    return count * np.atleast_1d(turbine_power(speeds, spec))
