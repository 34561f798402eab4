"""Forward propagation of service time, load and battery along a stop sequence."""

import math
from typing import Sequence

from ..errors import InstanceError
from ..violations import Violation
from .types import EvrpInstance, Route


def validate_route(
    instance: EvrpInstance,
    stops: Sequence[int],
    initial_energy: float | None = None,
) -> Route | list[Violation]:
    """
    Check a stop sequence against every routing constraint.

    Service times are earliest-feasible: w_j = max(a_j, w_i + dwell + t_ij). The
    depot departure is just in time for the first stop. Battery starts at
    `initial_energy` (default: the full battery) and drops by the edge energy of
    each leg; a station stop recharges it by `station_charge_kwh`, capped at the
    battery capacity.

    Args:
        instance: The routing instance
        stops: Stop indices, depot start first and depot end last
        initial_energy: Battery level at departure in kWh

    Returns:
        The annotated route, or every violated constraint with its stop position

    Raises:
        InstanceError: If a stop index does not exist
    """
    for stop in stops:
        instance.location(stop)

    violations: list[Violation] = []
    m = instance.m
    end = instance.end_stop
    if len(stops) < 2 or stops[0] != 0 or stops[-1] != end:
        violations.append(
            Violation(kind="flow", message="route must run from depot start to end")
        )
        return violations

    seen: set[int] = set()
    for pos, stop in enumerate(stops[1:-1], start=1):
        if stop in (0, end):
            violations.append(
                Violation(kind="depot_revisit", index=pos, message="depot inside route")
            )
        elif stop in seen and not instance.is_station(stop):
            violations.append(
                Violation(kind="flow", index=pos, message=f"stop {stop} visited twice")
            )
        seen.add(stop)

    for pos, stop in enumerate(stops):
        if 1 <= stop <= m:
            delivery = stop + m
            if delivery not in stops[pos + 1 :]:
                violations.append(
                    Violation(
                        kind="pairing",
                        index=pos,
                        message=f"request {stop - 1} is not delivered after pickup",
                    )
                )
        elif m < stop <= 2 * m and stop - m not in stops[:pos]:
            violations.append(
                Violation(
                    kind="pairing",
                    index=pos,
                    message=f"request {stop - m - 1} is delivered before pickup",
                )
            )

    graph = instance.energy_graph
    locations = [instance.location(s) for s in stops]
    energy = instance.battery if initial_energy is None else initial_energy
    charge = instance.station_charge_kwh

    first_leg = graph.time(locations[0], locations[1])
    first_a = instance.window(stops[1])[0]
    departure = max(0.0, first_a - first_leg)

    times = [departure]
    loads = [0]
    battery = [energy]
    leg_energies: list[float] = []
    leg_times: list[float] = []
    load = 0
    for pos in range(1, len(stops)):
        i, j = locations[pos - 1], locations[pos]
        leg_energy = graph.energy(i, j)
        leg_time = graph.time(i, j)
        leg_energies.append(leg_energy)
        leg_times.append(leg_time)

        a, b = instance.window(stops[pos])
        dwell = instance.dwell_s if pos > 1 else 0.0
        w = max(a, times[-1] + dwell + leg_time)
        if w > b:
            violations.append(
                Violation(
                    kind="window",
                    index=pos,
                    message=f"service at {w:.1f} s is after window end {b:.1f} s",
                )
            )
        times.append(w)

        load += instance.load_change(stops[pos])
        if load < 0 or load > instance.capacity:
            violations.append(
                Violation(
                    kind="capacity",
                    index=pos,
                    message=f"load {load} outside [0, {instance.capacity}]",
                )
            )
        loads.append(load)

        energy -= leg_energy
        if energy < instance.e_min:
            violations.append(
                Violation(
                    kind="battery",
                    index=pos,
                    message=f"battery {energy:.4f} kWh below e_min {instance.e_min}",
                )
            )
        if instance.is_station(stops[pos]):
            energy = min(
                instance.battery,
                energy + (charge if charge is not None else instance.battery),
            )
        battery.append(energy)

    if (
        instance.max_route_duration_s is not None
        and times[-1] - departure > instance.max_route_duration_s
    ):
        violations.append(
            Violation(
                kind="duration",
                index=len(stops) - 1,
                message=(
                    f"route lasts {times[-1] - departure:.1f} s, limit is "
                    f"{instance.max_route_duration_s:.1f} s"
                ),
            )
        )

    if violations:
        return violations
    return Route(
        stops=tuple(stops),
        locations=tuple(locations),
        service_times=tuple(times),
        loads=tuple(loads),
        battery=tuple(battery),
        leg_energies=tuple(leg_energies),
        leg_times=tuple(leg_times),
        energy_kwh=math.fsum(leg_energies),
    )


def require_route(instance: EvrpInstance, stops: Sequence[int]) -> Route:
    """validate_route for sequences that must be feasible."""
    result = validate_route(instance, stops)
    if isinstance(result, list):
        raise InstanceError(
            f"route {list(stops)} is infeasible: {'; '.join(map(str, result))}"
        )
    return result
