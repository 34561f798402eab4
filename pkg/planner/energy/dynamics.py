"""Longitudinal-dynamics power and energy of a vehicle over a speed profile."""

import math

import numpy as np
from pydantic import BaseModel
from scipy.integrate import trapezoid

from ..errors import ParameterError
from .types import SpeedProfile, VehicleParams

JOULES_PER_KWH = 3.6e6


class EdgeEnergyBreakdown(BaseModel):
    """Energy terms of one road section, in kWh at the battery."""

    aerodynamic: float
    rolling: float
    inertial: float
    gravitational: float
    total: float


def instantaneous_power(
    params: VehicleParams, v: float, dv_dt: float, grade_angle: float
) -> float:
    """
    Electrical power drawn at one instant, in watts.

    Sum of aerodynamic drag, rolling resistance, inertial and grade terms divided
    by the powertrain efficiency. Negative while decelerating or going downhill.
    """
    if v < 0:
        raise ParameterError(f"speed must be non-negative, got {v}")
    if abs(grade_angle) >= math.pi / 2:
        raise ParameterError(f"grade angle {grade_angle} rad is not below pi/2")

    aerodynamic = 0.5 * params.air_density * params.frontal_area * params.drag_coeff
    aerodynamic *= v**3
    rolling = params.mass * params.gravity * params.rolling_coeff * v
    inertial = params.mass * dv_dt * v
    grade = params.mass * params.gravity * math.tan(grade_angle) * v
    return (aerodynamic + rolling + inertial + grade) / params.powertrain_eff


def _traction_terms(
    params: VehicleParams, profile: SpeedProfile
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    speeds = profile.speeds
    times = profile.times
    accel = np.gradient(speeds, times)
    aerodynamic = (
        0.5 * params.air_density * params.frontal_area * params.drag_coeff * speeds**3
    )
    rolling = params.mass * params.gravity * params.rolling_coeff * speeds
    inertial = params.mass * accel * speeds
    return aerodynamic, rolling, inertial


def gravitational_energy(params: VehicleParams, delta_z: float) -> float:
    """Analytic grade term in kWh: -m g delta_z / eta, delta_z = z(to) - z(from)."""
    return -params.mass * params.gravity * delta_z / params.powertrain_eff / (
        JOULES_PER_KWH
    )


def edge_energy_breakdown(
    params: VehicleParams,
    profile: SpeedProfile,
    delta_z: float,
    clamp_regen: bool = False,
) -> EdgeEnergyBreakdown:
    """
    Energy of one road section split into its terms.

    Aerodynamic, rolling and inertial power are integrated with the trapezoidal
    rule at the native sample spacing; the grade term is added analytically.
    With `clamp_regen`, negative traction power is clamped to zero before
    integration and the clamped total is attributed to `inertial`.
    """
    if len(profile.samples) < 2:
        raise ParameterError("edge energy needs a profile with at least 2 samples")

    times = profile.times
    eta = params.powertrain_eff
    aerodynamic, rolling, inertial = _traction_terms(params, profile)
    aero_kwh = trapezoid(aerodynamic, times) / eta / JOULES_PER_KWH
    rolling_kwh = trapezoid(rolling, times) / eta / JOULES_PER_KWH

    if clamp_regen:
        traction = np.clip(aerodynamic + rolling + inertial, 0.0, None)
        traction_kwh = trapezoid(traction, times) / eta / JOULES_PER_KWH
        inertial_kwh = traction_kwh - aero_kwh - rolling_kwh
    else:
        inertial_kwh = trapezoid(inertial, times) / eta / JOULES_PER_KWH
        traction_kwh = aero_kwh + rolling_kwh + inertial_kwh

    gravity_kwh = gravitational_energy(params, delta_z)
    return EdgeEnergyBreakdown(
        aerodynamic=aero_kwh,
        rolling=rolling_kwh,
        inertial=inertial_kwh,
        gravitational=gravity_kwh,
        total=traction_kwh + gravity_kwh,
    )


def edge_energy(
    params: VehicleParams,
    profile: SpeedProfile,
    delta_z: float,
    clamp_regen: bool = False,
) -> float:
    """
    Energy in kWh to drive one road section.

    Args:
        params: Vehicle parameters
        profile: Representative speed profile of the section
        delta_z: Elevation gain z(to) - z(from) in meters
        clamp_regen: Ignore recovered energy (negative traction power)

    Returns:
        Energy at the battery in kWh; negative when the descent outweighs losses
    """
    return edge_energy_breakdown(params, profile, delta_z, clamp_regen).total
