"""Routing instance, route and solution models.

Stops are addressed by index: 0 is the depot start, 1..m are pickups, m+1..2m the
matching deliveries, 2m+1 the depot end, and 2m+2.. the charging stations of the
energy graph in declaration order.
"""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..energy.types import EnergyGraph
from ..errors import InstanceError, ParameterError


class TransportRequest(BaseModel):
    """Carry `passengers` from `pickup` to `delivery` within the given windows."""

    pickup: str
    delivery: str
    passengers: int = Field(..., gt=0, alias="q")
    a: float = Field(..., ge=0.0, description="pickup window start, s")
    b: float = Field(..., ge=0.0, description="pickup window end, s")
    delivery_a: float | None = None
    delivery_b: float | None = None

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    @model_validator(mode="after")
    def _ordered_windows(self) -> "TransportRequest":
        if self.a > self.b:
            raise ParameterError(f"pickup window [{self.a}, {self.b}] is reversed")
        if (
            self.delivery_a is not None
            and self.delivery_b is not None
            and self.delivery_a > self.delivery_b
        ):
            raise ParameterError("delivery window is reversed")
        return self


class EvrpInstance(BaseModel):
    """A pickup-and-delivery routing problem over an energy graph."""

    energy_graph: EnergyGraph
    requests: tuple[TransportRequest, ...]
    capacity: int = Field(..., gt=0, description="passengers")
    battery: float = Field(..., gt=0.0, description="kWh")
    e_min: float = Field(0.0, ge=0.0, description="kWh")
    big_m: float = Field(86400.0, gt=0.0, description="s")
    max_routes: int | None = Field(None, gt=0)
    max_route_duration_s: float | None = Field(None, gt=0.0)
    max_ride_s: float = Field(3600.0, ge=0.0)
    dwell_s: float = Field(0.0, ge=0.0)
    station_charge_kwh: float | None = Field(
        None, gt=0.0, description="energy added per station stop; None is a full charge"
    )
    use_station_stops: bool = False

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def _consistent(self) -> "EvrpInstance":
        if self.battery <= self.e_min:
            raise ParameterError("battery capacity must exceed e_min")
        nodes = set(self.energy_graph.nodes)
        for r, request in enumerate(self.requests):
            for node in (request.pickup, request.delivery):
                if node not in nodes:
                    raise InstanceError(f"request {r} uses unknown node {node!r}")
        latest = max((self.window(s)[1] for s in range(1, self.end_stop)), default=0.0)
        if self.big_m <= latest:
            raise ParameterError(f"big_m ({self.big_m}) must exceed every window end")
        return self

    @property
    def m(self) -> int:
        return len(self.requests)

    @property
    def end_stop(self) -> int:
        return 2 * self.m + 1

    @property
    def route_limit(self) -> int:
        return self.max_routes if self.max_routes is not None else max(self.m, 1)

    def station_stops(self) -> list[int]:
        return [self.end_stop + 1 + k for k in range(len(self.energy_graph.stations))]

    def location(self, stop: int) -> str:
        """Energy-graph node of a stop index."""
        m = self.m
        if stop == 0 or stop == self.end_stop:
            return self.energy_graph.depot
        if 1 <= stop <= m:
            return self.requests[stop - 1].pickup
        if m < stop <= 2 * m:
            return self.requests[stop - m - 1].delivery
        k = stop - self.end_stop - 1
        if 0 <= k < len(self.energy_graph.stations):
            return self.energy_graph.stations[k]
        raise InstanceError(f"unknown stop index {stop}")

    def load_change(self, stop: int) -> int:
        m = self.m
        if 1 <= stop <= m:
            return self.requests[stop - 1].passengers
        if m < stop <= 2 * m:
            return -self.requests[stop - m - 1].passengers
        return 0

    def window(self, stop: int) -> tuple[float, float]:
        """Service window [a, b] of a stop, in seconds since the horizon start."""
        m = self.m
        if 1 <= stop <= m:
            request = self.requests[stop - 1]
            return request.a, request.b
        if m < stop <= 2 * m:
            request = self.requests[stop - m - 1]
            a = request.delivery_a if request.delivery_a is not None else request.a
            b = (
                request.delivery_b
                if request.delivery_b is not None
                else request.b + self.max_ride_s
            )
            return a, b
        return 0.0, self.big_m

    def is_station(self, stop: int) -> bool:
        return stop > self.end_stop


class Route(BaseModel):
    """A depot-to-depot walk annotated with service time, load and battery."""

    stops: tuple[int, ...]
    locations: tuple[str, ...]
    service_times: tuple[float, ...]
    loads: tuple[int, ...]
    battery: tuple[float, ...]
    leg_energies: tuple[float, ...]
    leg_times: tuple[float, ...]
    energy_kwh: float

    @property
    def departure_s(self) -> float:
        return self.service_times[0]

    @property
    def return_s(self) -> float:
        return self.service_times[-1]

    @property
    def duration_s(self) -> float:
        return self.return_s - self.departure_s

    def requests_served(self, m: int) -> list[int]:
        return [s - 1 for s in self.stops if 1 <= s <= m]


class EvrpSolution(BaseModel):
    """A set of routes covering every request exactly once."""

    routes: tuple[Route, ...]
    total_energy: float
    status: Literal["optimal", "limits_exhausted", "heuristic"]
    nodes_explored: int = 0
