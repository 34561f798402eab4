"""Constraint checks of a schedule against its instance."""

import numpy as np

from ..violations import Violation
from .soc import SocTrace, reroute_sessions, simulate_soc
from .types import Schedule, ScheduleInstance

SOC_EPS = 1e-9


def check_schedule(
    schedule: Schedule, instance: ScheduleInstance, trace: SocTrace | None = None
) -> list[Violation]:
    """
    Every constraint the schedule violates; empty when it is feasible.

    Checks assignment coverage, route overlap per vehicle, charging while on a
    route, discharge permission, SOC bounds, the start/end SOC condition, idle
    travel time around remote-station sessions and station headcount.

    Args:
        schedule: The schedule to check
        instance: The scheduling instance
        trace: Precomputed SOC trace, simulated when omitted

    Returns:
        The violations, in the order above
    """
    violations = list(schedule.structural_violations)
    assignment, actions, stations = schedule.arrays()
    n = instance.horizon.intervals
    occupancy = instance.occupancy()

    for s in range(len(instance.tasks)):
        owners = int(assignment[:, s].sum()) if assignment.size else 0
        if owners != 1:
            violations.append(
                Violation(
                    kind="assignment",
                    index=s,
                    message=f"route {s} is assigned to {owners} vehicles",
                )
            )

    busy = assignment @ occupancy if occupancy.size else np.zeros_like(actions)
    for k in range(len(instance.vehicles)):
        for i in np.flatnonzero(busy[k] > 1):
            violations.append(
                Violation(
                    kind="overlap",
                    vehicle=k,
                    index=int(i),
                    message="two assigned routes occupy the same interval",
                )
            )
        for i in np.flatnonzero((busy[k] > 0) & (actions[k] != 0)):
            violations.append(
                Violation(
                    kind="charge_while_driving",
                    vehicle=k,
                    index=int(i),
                    message="charging action while the vehicle is on a route",
                )
            )
        for i in np.flatnonzero(actions[k] == -1):
            if not instance.discharge_slot(int(stations[k, i])):
                violations.append(
                    Violation(
                        kind="discharge_not_allowed",
                        vehicle=k,
                        index=int(i),
                        message=f"station {stations[k, i]} does not accept discharge",
                    )
                )

    if trace is None:
        trace = simulate_soc(instance, schedule)
    levels = trace.array()
    tolerance = instance.soc_tolerance
    for k, vehicle in enumerate(instance.vehicles):
        low = np.flatnonzero(levels[k] < vehicle.soc_min - SOC_EPS)
        high = np.flatnonzero(levels[k] > vehicle.soc_max + SOC_EPS)
        for i in (*low, *high):
            violations.append(
                Violation(
                    kind="soc_bounds",
                    vehicle=k,
                    index=int(i),
                    message=(
                        f"SOC {levels[k, i]:.4f} kWh outside "
                        f"[{vehicle.soc_min}, {vehicle.soc_max}]"
                    ),
                )
            )
        if abs(levels[k, 0] - vehicle.soc_max) > SOC_EPS:
            violations.append(
                Violation(
                    kind="boundary",
                    vehicle=k,
                    index=0,
                    message=f"initial SOC {levels[k, 0]:.4f} differs from soc_max",
                )
            )
        if levels[k, -1] < vehicle.soc_max - tolerance - SOC_EPS:
            violations.append(
                Violation(
                    kind="boundary",
                    vehicle=k,
                    index=n,
                    message=(
                        f"final SOC {levels[k, -1]:.4f} kWh is more than "
                        f"{tolerance:.4f} below soc_max"
                    ),
                )
            )

    for session in reroute_sessions(instance, schedule):
        delta = instance.stations[session.station].reroute_intervals
        travel = [
            *range(session.first - delta, session.first),
            *range(session.last + 1, session.last + 1 + delta),
        ]
        for i in travel:
            k = session.vehicle
            if not 0 <= i < n:
                violations.append(
                    Violation(
                        kind="reroute",
                        vehicle=k,
                        index=i,
                        message="reroute travel falls outside the horizon",
                    )
                )
            elif busy[k, i] + abs(actions[k, i]) != 0:
                violations.append(
                    Violation(
                        kind="reroute",
                        vehicle=k,
                        index=i,
                        message=(
                            f"vehicle is not idle while travelling to station "
                            f"{instance.stations[session.station].id}"
                        ),
                    )
                )

    for x, station in enumerate(instance.stations):
        headcount = ((actions != 0) & (stations == x)).sum(axis=0)
        for i in np.flatnonzero(headcount > np.array(station.availability)):
            violations.append(
                Violation(
                    kind="availability",
                    index=int(i),
                    message=(
                        f"{headcount[i]} vehicles at station {station.id}, "
                        f"{station.availability[i]} spots"
                    ),
                )
            )
    return violations
