"""Tariff and degradation cost of a schedule."""

import math

import numpy as np

from ..degradation.model import DegradationReport, degradation_cost
from .constraints import check_schedule
from .soc import SocTrace, simulate_soc
from .types import CostBreakdown, Schedule, ScheduleInstance


def vehicle_degradation(
    instance: ScheduleInstance, schedule: Schedule, trace: SocTrace
) -> list[DegradationReport]:
    """Degradation report of every vehicle.

    The idle-temperature term covers the horizon minus driving time.
    """
    assignment, actions, stations = schedule.arrays()
    h = instance.horizon.interval_hours
    occupancy = instance.occupancy()
    busy = (
        assignment @ occupancy
        if occupancy.size
        else np.zeros_like(actions)
    )
    rates = [s.rate_kw for s in instance.stations]
    reports = []
    for k, vehicle in enumerate(instance.vehicles):
        powers = [rates[stations[k, i]] for i in np.flatnonzero(actions[k] != 0)]
        driving = float(np.count_nonzero(busy[k])) * h
        reports.append(
            degradation_cost(
                trace.vehicle(k),
                powers,
                h,
                instance.horizon.hours - driving,
                vehicle.capacity_kwh,
                instance.degradation,
            )
        )
    return reports


def evaluate_cost(
    schedule: Schedule, instance: ScheduleInstance, check: bool = True
) -> CostBreakdown:
    """
    Tariff paid for charging, minus discharge revenue, plus degradation.

    Every action is priced at its station's per-interval tariff. Degradation is
    added only when the instance enables it.

    Args:
        schedule: The schedule to price
        instance: The scheduling instance
        check: Return the infinite sentinel for schedules that violate a constraint

    Returns:
        The cost breakdown; `total` is +inf for infeasible schedules
    """
    trace = simulate_soc(instance, schedule)
    if check and check_schedule(schedule, instance, trace):
        return CostBreakdown.infeasible()

    _, actions, stations = schedule.arrays()
    tariff_terms: list[float] = []
    revenue_terms: list[float] = []
    for k, i in zip(*np.nonzero(actions)):
        price = instance.stations[stations[k, i]].tariff[i]
        (tariff_terms if actions[k, i] == 1 else revenue_terms).append(price)
    tariff = math.fsum(tariff_terms)
    revenue = math.fsum(revenue_terms)

    reports: list[DegradationReport] = []
    degradation = 0.0
    if instance.use_degradation:
        reports = vehicle_degradation(instance, schedule, trace)
        degradation = math.fsum(r.cost for r in reports)

    return CostBreakdown(
        tariff=tariff,
        revenue=revenue,
        degradation=degradation,
        total=tariff - revenue + degradation,
        degradation_reports=tuple(reports),
    )
