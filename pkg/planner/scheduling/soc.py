"""State-of-charge dynamics over the horizon."""

import numpy as np
from pydantic import BaseModel

from ..errors import ScheduleError
from .types import RouteTask, Schedule, ScheduleInstance


class RerouteSession(BaseModel):
    """Consecutive actions of one vehicle at one remote station."""

    vehicle: int
    station: int
    first: int
    last: int


class SocTrace(BaseModel):
    """SOC in kWh of every vehicle at interval boundaries 0..N."""

    levels: tuple[tuple[float, ...], ...]

    def array(self) -> np.ndarray:
        return np.array(self.levels, dtype=float)

    def vehicle(self, k: int) -> tuple[float, ...]:
        return self.levels[k]


def unavailability(task: RouteTask, i: int) -> int:
    """1 while the task's route occupies its vehicle at interval i, else 0."""
    return int(task.start <= i <= task.end)


def _check_stations(instance: ScheduleInstance, schedule: Schedule) -> None:
    n_stations = len(instance.stations)
    for k, (actions, stations) in enumerate(
        zip(schedule.actions, schedule.action_stations, strict=True)
    ):
        for i, (u, x) in enumerate(zip(actions, stations, strict=True)):
            if u != 0 and not 0 <= x < n_stations:
                raise ScheduleError(
                    f"vehicle {k} interval {i} references unknown station {x}"
                )
            if u not in (-1, 0, 1):
                raise ScheduleError(f"vehicle {k} interval {i} has action {u}")


def reroute_sessions(
    instance: ScheduleInstance, schedule: Schedule
) -> list[RerouteSession]:
    """Maximal runs of consecutive non-zero actions at the same remote station."""
    sessions: list[RerouteSession] = []
    for k, (actions, stations) in enumerate(
        zip(schedule.actions, schedule.action_stations, strict=True)
    ):
        current: RerouteSession | None = None
        for i, (u, x) in enumerate(zip(actions, stations, strict=True)):
            remote = u != 0 and instance.stations[x].is_remote
            if remote and current is not None and current.station == x:
                current.last = i
                continue
            if current is not None:
                sessions.append(current)
                current = None
            if remote:
                current = RerouteSession(vehicle=k, station=x, first=i, last=i)
        if current is not None:
            sessions.append(current)
    return sessions


def reroute_energy(instance: ScheduleInstance, schedule: Schedule) -> np.ndarray:
    """
    Reroute travel energy as a (K, N) array.

    Half of a station's round-trip energy is booked evenly on the travel intervals
    before a session and half on those after it. Travel intervals falling outside
    the horizon are clamped onto its first or last interval.
    """
    n = instance.horizon.intervals
    booked = np.zeros((len(instance.vehicles), n))
    for session in reroute_sessions(instance, schedule):
        station = instance.stations[session.station]
        delta = station.reroute_intervals
        half = station.reroute_kwh / 2.0 / delta
        for step in range(1, delta + 1):
            booked[session.vehicle, min(max(session.first - step, 0), n - 1)] += half
            booked[session.vehicle, min(max(session.last + step, 0), n - 1)] += half
    return booked


def charge_increments(instance: ScheduleInstance, schedule: Schedule) -> np.ndarray:
    """
    Battery change from charging actions as a (K, N) array.

    Charging adds eta * r * h; discharging removes r * h / eta.
    """
    _check_stations(instance, schedule)
    h = instance.horizon.interval_hours
    rate = np.array([s.rate_kw for s in instance.stations])
    eff = np.array([s.efficiency for s in instance.stations])
    _, actions, stations = schedule.arrays()
    safe = np.where(stations >= 0, stations, 0)
    gain = eff[safe] * rate[safe] * h
    loss = rate[safe] * h / eff[safe]
    return np.where(actions == 1, gain, np.where(actions == -1, -loss, 0.0))


def route_consumption(instance: ScheduleInstance, schedule: Schedule) -> np.ndarray:
    """Route energy drawn by each vehicle per interval, (K, N)."""
    assignment, _, _ = schedule.arrays()
    energy = instance.task_energy()
    if energy.shape[0] == 0:
        return np.zeros((len(instance.vehicles), instance.horizon.intervals))
    return assignment @ energy


def simulate_soc(
    instance: ScheduleInstance, schedule: Schedule, soc0: float | None = None
) -> SocTrace:
    """
    Propagate SOC(i) = SOC(i-1) + charge(i) - route energy(i) - reroute energy(i).

    Args:
        instance: The scheduling instance
        schedule: Assignment and charging actions
        soc0: Initial SOC of every vehicle in kWh (defaults to each soc_max)

    Returns:
        SOC of every vehicle at the N+1 interval boundaries
    """
    delta = (
        charge_increments(instance, schedule)
        - route_consumption(instance, schedule)
        - reroute_energy(instance, schedule)
    )
    start = np.array(
        [soc0 if soc0 is not None else v.soc_max for v in instance.vehicles]
    )
    levels = np.concatenate(
        [start[:, None], start[:, None] + np.cumsum(delta, axis=1)], axis=1
    )
    return SocTrace.model_construct(levels=tuple(tuple(row) for row in levels.tolist()))
