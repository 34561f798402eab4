"""Lifetime-loss terms and the money cost of battery degradation."""

import logging
import math
from typing import Literal, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import trapezoid

from ..errors import ParameterError

logger = logging.getLogger(__name__)

KELVIN_OFFSET = 273.15


class DegradationParams(BaseModel):
    """Constants of the degradation model; every field can be overridden in JSON."""

    c_bat: float = Field(12000.0, ge=0.0, description="battery replacement cost")
    a: float = Field(3.73e-4, gt=0.0)
    b: float = Field(636.0, gt=0.0)
    m_a: float = Field(1.6e-5, gt=0.0)
    d_a: float = Field(6.4e-6, gt=0.0)
    y_p: float = Field(15.0, gt=0.0, description="years")
    cf_max: float = Field(0.8, gt=0.0, le=1.0)
    r_th: float = Field(2.0, gt=0.0, description="°C/kW")
    t_amb: float = Field(25.0, description="°C")
    nhy: float = Field(8760.0, gt=0.0, description="hours per year")
    nl_scale: float = Field(145.71, gt=0.0)
    nl_exponent: float = Field(0.6844, gt=0.0)
    temperature_unit: Literal["kelvin", "celsius"] = "kelvin"

    model_config = ConfigDict(extra="forbid", frozen=True)


class CycleDecomposition(BaseModel):
    """Depths of discharge of the subcycles of a trace, as fractions of capacity."""

    dods: tuple[float, ...] = ()

    @property
    def count(self) -> int:
        return len(self.dods)

    @property
    def dod_avg(self) -> float:
        return math.fsum(self.dods) / len(self.dods) if self.dods else 0.0


class DegradationReport(BaseModel):
    """The three lifetime-loss terms of one vehicle and their money cost."""

    temperature_loss: float
    soc_loss: float
    dod_loss: float
    cost: float
    soc_avg: float
    subcycles: CycleDecomposition
    implied_cycle_life: float

    @property
    def total_loss(self) -> float:
        return self.temperature_loss + self.soc_loss + self.dod_loss


def lifespan_years(temperature_c: float, params: DegradationParams) -> float:
    """
    Lifespan l_y = a * exp(b / T) at a cell temperature given in °C.

    With `temperature_unit="kelvin"` the temperature is shifted to kelvin before
    evaluation; with "celsius" it is used as is.
    """
    t = temperature_c + KELVIN_OFFSET if params.temperature_unit == "kelvin" else (
        temperature_c
    )
    if not math.isfinite(t) or t <= 0:
        raise ParameterError(
            f"temperature {temperature_c} °C is not positive "
            f"in {params.temperature_unit}"
        )
    return params.a * math.exp(params.b / t)


def lifetime_loss_temperature(
    charge_power_kw: Sequence[float],
    interval_hours: float,
    t_max: float,
    params: DegradationParams,
) -> float:
    """
    Lifetime loss from cell temperature while charging and idling.

    Args:
        charge_power_kw: Power of each charging interval (piecewise constant)
        interval_hours: Length of one interval in hours
        t_max: Hours the battery is not driving (charging plus idle)
        params: Model constants

    Returns:
        Dimensionless loss over the horizon
    """
    if interval_hours < 0 or t_max < 0:
        raise ParameterError("durations must be non-negative")
    t_ch = len(charge_power_kw) * interval_hours
    if t_ch > t_max + 1e-9:
        raise ParameterError(f"charging time {t_ch} h exceeds available {t_max} h")

    charging = math.fsum(
        interval_hours
        / (params.nhy * lifespan_years(params.t_amb + params.r_th * abs(p), params))
        for p in charge_power_kw
    )
    idle = max(t_max - t_ch, 0.0) / (params.nhy * lifespan_years(params.t_amb, params))
    return charging + idle


def lifetime_loss_soc(soc_avg: float, params: DegradationParams) -> float:
    """Loss from the average state of charge; zero at soc_avg = d_a / m_a."""
    if not 0.0 <= soc_avg <= 1.0:
        raise ParameterError(f"average SOC must lie in [0, 1], got {soc_avg}")
    return (params.m_a * soc_avg - params.d_a) / (
        params.cf_max * params.y_p * params.nhy
    )


def cycles_to_failure(dod: float, params: DegradationParams | None = None) -> float:
    """Cycle life N_l(DOD) = (DOD / 145.71) ** (-1 / 0.6844), DOD as a fraction."""
    params = params or DegradationParams()
    if not 0.0 < dod <= 1.0:
        raise ParameterError(f"depth of discharge must lie in (0, 1], got {dod}")
    return (dod / params.nl_scale) ** (-1.0 / params.nl_exponent)


def extract_subcycles(trace: Sequence[float], capacity: float) -> CycleDecomposition:
    """
    Split a SOC trace (kWh) into discharge subcycles.

    Every maximal run without an increase is one subcycle; its depth is the
    drop over the run divided by the capacity. Runs without a drop are skipped.
    """
    if capacity <= 0:
        raise ParameterError("capacity must be positive")
    dods: list[float] = []
    if len(trace) == 0:
        return CycleDecomposition()

    start = trace[0]
    previous = trace[0]
    for level in trace[1:]:
        if level > previous:
            if start > previous:
                dods.append(min((start - previous) / capacity, 1.0))
            start = level
        previous = level
    if start > previous:
        dods.append(min((start - previous) / capacity, 1.0))
    return CycleDecomposition(dods=tuple(dods))


def lifetime_loss_dod(
    decomposition: CycleDecomposition, params: DegradationParams | None = None
) -> float:
    """Energy-throughput loss: sum(DOD_i) / (N_l(DOD_avg) * DOD_avg)."""
    if decomposition.count == 0:
        return 0.0
    avg = decomposition.dod_avg
    return math.fsum(decomposition.dods) / (cycles_to_failure(avg, params) * avg)


def average_soc(trace: Sequence[float], capacity: float) -> float:
    """Trapezoidal time-average of the trace as a fraction of capacity."""
    levels = np.asarray(trace, dtype=float)
    if len(levels) < 2:
        raise ParameterError("a SOC trace needs at least 2 points")
    return float(trapezoid(levels) / (len(levels) - 1) / capacity)


def degradation_cost(
    trace: Sequence[float],
    charge_power_kw: Sequence[float],
    interval_hours: float,
    t_max: float,
    capacity: float,
    params: DegradationParams,
) -> DegradationReport:
    """
    Money cost of the battery life a day's operation consumes.

    Args:
        trace: SOC in kWh at every interval boundary
        charge_power_kw: Power of each charging or discharging interval
        interval_hours: Interval length in hours
        t_max: Hours not spent driving
        capacity: Battery capacity in kWh
        params: Model constants

    Returns:
        The three loss terms, their money cost and the subcycle decomposition
    """
    soc_avg = min(max(average_soc(trace, capacity), 0.0), 1.0)
    decomposition = extract_subcycles(trace, capacity)
    temperature_loss = lifetime_loss_temperature(
        charge_power_kw, interval_hours, t_max, params
    )
    soc_loss = lifetime_loss_soc(soc_avg, params)
    dod_loss = lifetime_loss_dod(decomposition, params)
    return DegradationReport(
        temperature_loss=temperature_loss,
        soc_loss=soc_loss,
        dod_loss=dod_loss,
        cost=params.c_bat * (temperature_loss + soc_loss + dod_loss),
        soc_avg=soc_avg,
        subcycles=decomposition,
        implied_cycle_life=1.0 / dod_loss if dod_loss > 0 else math.inf,
    )
