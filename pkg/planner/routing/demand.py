"""Recurring transport demand expanded into individual requests."""

from pydantic import BaseModel, ConfigDict, Field

from ..errors import ParameterError
from .types import TransportRequest


class DemandGroup(BaseModel):
    """Passengers travelling from one origin to one destination every hour."""

    origin: str
    destination: str
    passengers: int = Field(..., gt=0)

    model_config = ConfigDict(extra="forbid", frozen=True)


class HourlyDemand(BaseModel):
    """A demand template repeated each hour from `first_hour` to `last_hour`."""

    groups: tuple[DemandGroup, ...]
    first_hour: int = Field(8, ge=0, le=47)
    last_hour: int = Field(16, ge=0, le=47)
    window_s: float = Field(1800.0, ge=0.0)
    horizon_start_hour: float = Field(7.0, ge=0.0)
    fare: float = Field(5.0, ge=0.0, description="paid per passenger")

    model_config = ConfigDict(extra="forbid", frozen=True)


def hourly_demand(demand: HourlyDemand) -> list[TransportRequest]:
    """
    Requests for every group and every hour, in hour-major order.

    Pickup windows open on the hour and stay open for `window_s`; times are
    seconds since the horizon start. Delivery windows are left to the instance's
    maximum ride time.
    """
    if demand.last_hour < demand.first_hour:
        raise ParameterError("last_hour precedes first_hour")
    offset = demand.horizon_start_hour * 3600.0
    requests = []
    for hour in range(demand.first_hour, demand.last_hour + 1):
        a = hour * 3600.0 - offset
        if a < 0:
            raise ParameterError(f"hour {hour} starts before the horizon")
        for group in demand.groups:
            requests.append(
                TransportRequest(
                    pickup=group.origin,
                    delivery=group.destination,
                    passengers=group.passengers,
                    a=a,
                    b=a + demand.window_s,
                )
            )
    return requests


def passenger_revenue(demand: HourlyDemand) -> float:
    """Fare income of the whole demand; reported only, never optimized."""
    hours = demand.last_hour - demand.first_hour + 1
    return hours * sum(g.passengers for g in demand.groups) * demand.fare
