"""Placement of solved routes on the scheduling horizon."""

import math

import numpy as np

from ..errors import ScheduleError
from ..routing.types import EvrpSolution, Route
from .types import Horizon, RouteTask


def route_task(route: Route, route_id: int, horizon: Horizon) -> RouteTask:
    """
    Locate one route on the horizon.

    The task spans the intervals from the route's departure to its return. Each
    leg's energy is spread over the intervals its travel time overlaps, in
    proportion to the overlap; instantaneous legs book to the interval they start
    in. A leg starts at the service time of the stop it leaves.
    """
    length = horizon.interval_s
    n = horizon.intervals
    end_time = n * length
    if route.departure_s < 0 or route.return_s > end_time:
        raise ScheduleError(
            f"route {route_id} runs {route.departure_s:.0f}-{route.return_s:.0f} s, "
            f"outside the {end_time:.0f} s horizon"
        )
    start = min(int(route.departure_s // length), n - 1)
    end = max(start, min(math.ceil(route.return_s / length) - 1, n - 1))

    energy = np.zeros(n)
    times = route.service_times
    for leg, (leg_energy, leg_time) in enumerate(
        zip(route.leg_energies, route.leg_times, strict=True)
    ):
        depart = times[leg]
        arrive = depart + leg_time
        if leg_time <= 0:
            energy[min(max(int(depart // length), start), end)] += leg_energy
            continue
        first = max(int(depart // length), start)
        last = min(math.ceil(arrive / length) - 1, end)
        for i in range(first, max(last, first) + 1):
            overlap = min(arrive, (i + 1) * length) - max(depart, i * length)
            if overlap > 0:
                energy[min(i, end)] += leg_energy * overlap / leg_time
    return RouteTask(route_id=route_id, start=start, end=end, energy=tuple(energy))


def route_tasks_from_solution(
    solution: EvrpSolution, horizon: Horizon
) -> list[RouteTask]:
    """RouteTasks of every route of a solution, in solution order."""
    return [route_task(route, s, horizon) for s, route in enumerate(solution.routes)]
