"""Horizon, stations, vehicles, route tasks and schedules."""

import math
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..degradation.model import DegradationParams, DegradationReport
from ..errors import ParameterError, ScheduleError
from ..violations import Violation


class Horizon(BaseModel):
    """The discretized planning window."""

    intervals: int = Field(..., ge=1)
    interval_s: float = Field(1800.0, gt=0.0)
    start_hour: float = Field(7.0, ge=0.0, description="wall-clock start, hours")

    model_config = ConfigDict(extra="forbid", frozen=True)

    @property
    def interval_hours(self) -> float:
        return self.interval_s / 3600.0

    @property
    def hours(self) -> float:
        return self.intervals * self.interval_hours

    def clock(self, interval: int) -> str:
        """Wall-clock label HH:MM of an interval start."""
        minutes = int(round((self.start_hour * 60 + interval * self.interval_s / 60)))
        return f"{(minutes // 60) % 24:02d}:{minutes % 60:02d}"


class RouteTask(BaseModel):
    """A route located on the horizon with the energy it draws per interval."""

    route_id: int
    start: int = Field(..., ge=0)
    end: int = Field(..., ge=0)
    energy: tuple[float, ...]

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _inside(self) -> "RouteTask":
        if self.start > self.end:
            raise ParameterError(f"task {self.route_id} starts after it ends")
        if self.end >= len(self.energy):
            raise ParameterError(f"task {self.route_id} ends past the horizon")
        for i, e in enumerate(self.energy):
            if e != 0.0 and not self.start <= i <= self.end:
                raise ParameterError(
                    f"task {self.route_id} books energy outside [{self.start}, "
                    f"{self.end}] at interval {i}"
                )
        return self

    @property
    def total_energy(self) -> float:
        return math.fsum(self.energy)


class Station(BaseModel):
    """A charging point; `reroute_intervals == 0` marks a station at the depot."""

    id: str
    rate_kw: float = Field(..., gt=0.0)
    efficiency: float = Field(..., gt=0.0, le=1.0)
    tariff: tuple[float, ...] = Field(..., description="money per action interval")
    availability: tuple[int, ...]
    reroute_intervals: int = Field(0, ge=0)
    reroute_kwh: float = Field(0.0, ge=0.0, description="round trip from the depot")
    allows_discharge: bool = False

    model_config = ConfigDict(extra="forbid", frozen=True)

    @model_validator(mode="after")
    def _series(self) -> "Station":
        if len(self.tariff) != len(self.availability):
            raise ParameterError(f"station {self.id}: tariff and availability differ")
        if any(a < 0 for a in self.availability):
            raise ParameterError(f"station {self.id}: negative availability")
        if self.reroute_intervals == 0 and self.reroute_kwh != 0.0:
            raise ParameterError(f"depot station {self.id} cannot cost reroute energy")
        return self

    @property
    def is_remote(self) -> bool:
        return self.reroute_intervals > 0


class Vehicle(BaseModel):
    """Battery limits of one vehicle, in kWh."""

    id: str
    capacity_kwh: float = Field(..., gt=0.0)
    soc_min: float = Field(..., ge=0.0)
    soc_max: float = Field(..., gt=0.0)

    model_config = ConfigDict(extra="forbid", frozen=True)

    @model_validator(mode="after")
    def _bounds(self) -> "Vehicle":
        if not self.soc_min < self.soc_max <= self.capacity_kwh:
            raise ParameterError(
                f"vehicle {self.id}: need soc_min < soc_max <= capacity"
            )
        return self


class ScheduleInstance(BaseModel):
    """Everything the assignment and charge scheduler needs."""

    horizon: Horizon
    vehicles: tuple[Vehicle, ...]
    stations: tuple[Station, ...]
    tasks: tuple[RouteTask, ...] = ()
    allow_discharge: bool = False
    use_degradation: bool = True
    degradation: DegradationParams = DegradationParams()

    model_config = ConfigDict(extra="forbid", frozen=True)

    @model_validator(mode="after")
    def _dimensions(self) -> "ScheduleInstance":
        n = self.horizon.intervals
        if not self.vehicles:
            raise ParameterError("a schedule needs at least one vehicle")
        if not self.stations:
            raise ParameterError("a schedule needs at least one station")
        for station in self.stations:
            if len(station.tariff) != n:
                raise ScheduleError(
                    f"station {station.id} has {len(station.tariff)} tariff values "
                    f"for {n} intervals"
                )
        for task in self.tasks:
            if len(task.energy) != n:
                raise ScheduleError(f"task {task.route_id} does not span the horizon")
        return self

    @property
    def soc_tolerance(self) -> float:
        """Largest single charge increment; the end-of-horizon SOC may miss by this."""
        h = self.horizon.interval_hours
        return max(s.efficiency * s.rate_kw * h for s in self.stations)

    def discharge_slot(self, station: int) -> bool:
        return self.allow_discharge and self.stations[station].allows_discharge

    def task_energy(self) -> np.ndarray:
        """Route energies as an (S, N) array."""
        if not self.tasks:
            return np.zeros((0, self.horizon.intervals))
        return np.array([t.energy for t in self.tasks], dtype=float)

    def occupancy(self) -> np.ndarray:
        """Unavailability d_s(i) of every task as an (S, N) 0/1 array."""
        occ = np.zeros((len(self.tasks), self.horizon.intervals), dtype=int)
        for s, task in enumerate(self.tasks):
            occ[s, task.start : task.end + 1] = 1
        return occ


class CostBreakdown(BaseModel):
    """Objective value split into tariff, discharge revenue and degradation."""

    tariff: float
    revenue: float
    degradation: float
    total: float
    degradation_reports: tuple[DegradationReport, ...] = ()

    @classmethod
    def infeasible(cls) -> "CostBreakdown":
        return cls(tariff=math.inf, revenue=0.0, degradation=math.inf, total=math.inf)


class Schedule(BaseModel):
    """Assignment matrix a[k][s] and per-vehicle action timelines.

    `actions[k][i]` is -1 (discharge), 0 or +1 (charge) and
    `action_stations[k][i]` the station index of that action (-1 when idle).
    """

    assignment: tuple[tuple[int, ...], ...]
    actions: tuple[tuple[int, ...], ...]
    action_stations: tuple[tuple[int, ...], ...]
    structural_violations: tuple[Violation, ...] = ()
    soc: tuple[tuple[float, ...], ...] | None = None
    cost: CostBreakdown | None = None

    @classmethod
    def from_arrays(
        cls,
        assignment: Any,
        actions: Any,
        action_stations: Any,
        structural_violations: tuple[Violation, ...] = (),
    ) -> "Schedule":
        return cls.model_construct(
            assignment=tuple(tuple(int(x) for x in row) for row in assignment),
            actions=tuple(tuple(int(x) for x in row) for row in actions),
            action_stations=tuple(
                tuple(int(x) for x in row) for row in action_stations
            ),
            structural_violations=structural_violations,
            soc=None,
            cost=None,
        )

    @classmethod
    def empty(cls, instance: ScheduleInstance) -> "Schedule":
        k, s = len(instance.vehicles), len(instance.tasks)
        n = instance.horizon.intervals
        return cls.from_arrays(
            np.zeros((k, s), dtype=int),
            np.zeros((k, n), dtype=int),
            np.full((k, n), -1, dtype=int),
        )

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        assignment = np.array(self.assignment, dtype=int)
        return (
            assignment,
            np.array(self.actions, dtype=int),
            np.array(self.action_stations, dtype=int),
        )

    def vehicle_of(self, route: int) -> int | None:
        owners = [k for k, row in enumerate(self.assignment) if row[route]]
        return owners[0] if len(owners) == 1 else None
