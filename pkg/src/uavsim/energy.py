"""Rotary-wing propulsion power and mission energy accounting.

Propulsion power is the standard three-term rotary-wing model
    P(v) = P0 (1 + 3 v^2 / U_tip^2)                        blade profile
         + Pi sqrt(sqrt(1 + v^4 / (4 v0^4)) - v^2/(2 v0^2)) induced
         + 0.5 d0 rho s A v^3                               parasite
so hover power is exactly P0 + Pi. Level flight over distance d costs
E(v, d) = P(v) d / v; take-off and landing are charged with the same
formula applied to the altitude (a deliberate modeling simplification).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InfeasibleMissionError, ValidationError


@dataclass(frozen=True)
class PowerParams:
    """Rotary-wing cargo-UAV power model constants (typical values)."""

    blade_profile_power: float = 79.86   # P0, W
    induced_power: float = 88.63         # Pi, W
    tip_speed: float = 120.0             # U_tip, m/s
    mean_rotor_induced_velocity: float = 4.03  # v0, m/s
    fuselage_drag_ratio: float = 0.6     # d0
    air_density: float = 1.225           # rho, kg/m^3
    rotor_solidity: float = 0.05         # s
    rotor_disc_area: float = 0.503       # A, m^2

    def validate(self) -> None:
        for name, value in self.__dict__.items():
            if value <= 0:
                raise ValidationError(f"power parameter {name} must be positive, got {value}")


@dataclass(frozen=True)
class EnergyBudget:
    """Mission energy bookkeeping: capacity, emergency reserve, cruise speed, altitude."""

    capacity: float             # E_C, J
    reserve: float = 0.0        # E_S, J
    speed: float = 30.0         # v, m/s
    altitude: float = 80.0      # h, m

    def validate(self) -> None:
        if not self.capacity > self.reserve >= 0:
            raise ValidationError(
                f"need capacity > reserve >= 0, got ({self.capacity}, {self.reserve})")
        if self.speed <= 0:
            raise ValidationError(f"speed must be positive, got {self.speed}")


def propulsion_power(v: float, params: PowerParams) -> float:
    """Propulsion power (W) at level speed v (m/s); v = 0 gives hover power."""
    if v < 0:
        raise ValidationError(f"speed must be nonnegative, got {v}")
    p0 = params.blade_profile_power
    pi_h = params.induced_power
    v0 = params.mean_rotor_induced_velocity
    blade = p0 * (1.0 + 3.0 * v**2 / params.tip_speed**2)
    induced = pi_h * math.sqrt(math.sqrt(1.0 + v**4 / (4.0 * v0**4)) - v**2 / (2.0 * v0**2))
    parasite = 0.5 * params.fuselage_drag_ratio * params.air_density \
        * params.rotor_solidity * params.rotor_disc_area * v**3
    return blade + induced + parasite


def segment_energy(v: float, d: float, params: PowerParams) -> float:
    """Energy (J) to fly distance d (m) at constant speed v > 0."""
    if v <= 0:
        raise ValidationError(f"segment speed must be positive, got {v}")
    if d < 0:
        raise ValidationError(f"distance must be nonnegative, got {d}")
    return propulsion_power(v, params) * d / v


def available_energy(budget: EnergyBudget, params: PowerParams) -> float:
    """Energy left for horizontal travel after reserve and take-off/landing legs."""
    budget.validate()
    e_vertical = segment_energy(budget.speed, budget.altitude, params)
    available = budget.capacity - budget.reserve - 2.0 * e_vertical
    if available <= 0:
        raise InfeasibleMissionError(
            f"no energy left for horizontal flight "
            f"(capacity={budget.capacity}, reserve={budget.reserve}, "
            f"vertical legs={2.0 * e_vertical:.1f} J)")
    return available


def mission_energy(points, v: float, params: PowerParams) -> float:
    """Total energy (J) over a polyline of (x, y) waypoints in meters.

    A single waypoint costs nothing; energy is additive over segments.
    """
    pts = list(points)
    if not pts:
        raise ValidationError("trajectory must contain at least one waypoint")
    total = 0.0
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        total += segment_energy(v, math.hypot(x1 - x0, y1 - y0), params)
    return total


def battery_percent(mission_j: float, budget: EnergyBudget, params: PowerParams,
                    include_vertical: bool = True) -> float:
    """Battery consumption as % of usable energy (capacity - reserve).

    include_vertical charges the take-off and landing legs as well; the
    denominator is always capacity - reserve.
    """
    used = mission_j
    if include_vertical:
        used += 2.0 * segment_energy(budget.speed, budget.altitude, params)
    return 100.0 * used / (budget.capacity - budget.reserve)
