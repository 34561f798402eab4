"""Builders for small scheduling fixtures."""

from planner.scheduling.types import RouteTask, Station


def depot_station(
    n: int,
    tariff: list[float] | None = None,
    rate_kw: float = 3.0,
    efficiency: float = 0.9,
    availability: int = 2,
    allows_discharge: bool = False,
    station_id: str = "RS2",
) -> Station:
    return Station(
        id=station_id,
        rate_kw=rate_kw,
        efficiency=efficiency,
        tariff=tuple(tariff if tariff is not None else [0.1] * n),
        availability=(availability,) * n,
        allows_discharge=allows_discharge,
    )


def task(route_id: int, start: int, end: int, n: int, energy: float) -> RouteTask:
    """A route drawing `energy` kWh spread evenly over [start, end]."""
    per_interval = energy / (end - start + 1)
    profile = [per_interval if start <= i <= end else 0.0 for i in range(n)]
    return RouteTask(route_id=route_id, start=start, end=end, energy=tuple(profile))

