"""Greedy cheapest-feasible-insertion routing for instances past exact scale."""

import logging
import math

import logfire
import numpy as np

from ..errors import InfeasibleInstanceError
from .types import EvrpInstance, EvrpSolution, Route
from .validation import validate_route

logger = logging.getLogger(__name__)


def _insert_request(
    instance: EvrpInstance, routes: list[Route], r: int
) -> tuple[int, Route] | None:
    """Cheapest feasible placement of request r; index len(routes) opens a route."""
    m = instance.m
    pickup, delivery = r + 1, r + 1 + m
    best: tuple[float, int, Route] | None = None

    for index, route in enumerate(routes):
        stops = route.stops
        for i in range(1, len(stops)):
            for j in range(i, len(stops)):
                trial = [*stops[:i], pickup, *stops[i:j], delivery, *stops[j:]]
                result = validate_route(instance, trial)
                if isinstance(result, list):
                    continue
                delta = result.energy_kwh - route.energy_kwh
                if best is None or delta < best[0]:
                    best = (delta, index, result)

    if len(routes) < instance.route_limit:
        result = validate_route(instance, [0, pickup, delivery, instance.end_stop])
        if not isinstance(result, list) and (
            best is None or result.energy_kwh < best[0]
        ):
            best = (result.energy_kwh, len(routes), result)

    return None if best is None else (best[1], best[2])


def _construct(instance: EvrpInstance, order: list[int]) -> list[Route]:
    routes: list[Route] = []
    for r in order:
        placement = _insert_request(instance, routes, r)
        if placement is None:
            request = instance.requests[r]
            raise InfeasibleInstanceError(
                f"request {r} ({request.pickup} -> {request.delivery}) cannot be "
                "inserted into any feasible route",
                request=r,
            )
        index, route = placement
        if index == len(routes):
            routes.append(route)
        else:
            routes[index] = route
    return routes


def solve_insertion_heuristic(
    instance: EvrpInstance, seed: int, restarts: int = 8
) -> EvrpSolution:
    """
    Cheapest feasible insertion over seeded random request orders.

    Each restart inserts the requests one by one, in an order drawn from the
    seeded generator, at the pickup/delivery positions that add the least energy
    (or opens a new route when that is cheaper). The best restart wins.

    Args:
        instance: The routing instance
        seed: Seed of the request-order generator
        restarts: Number of request orders to try

    Returns:
        A feasible solution with status "heuristic"
    """
    rng = np.random.default_rng(seed)
    best: list[Route] | None = None
    best_cost = math.inf
    last_error: InfeasibleInstanceError | None = None

    with logfire.span("insertion_heuristic", requests=instance.m, restarts=restarts):
        for _ in range(max(restarts, 1)):
            order = [int(r) for r in rng.permutation(instance.m)]
            try:
                routes = _construct(instance, order)
            except InfeasibleInstanceError as e:
                last_error = e
                continue
            cost = math.fsum(r.energy_kwh for r in routes)
            if cost < best_cost:
                best, best_cost = routes, cost

    if best is None:
        assert last_error is not None
        raise last_error
    ordered = tuple(sorted(best, key=lambda r: (r.departure_s, r.stops)))
    logger.info(f"Insertion heuristic: {len(ordered)} routes, {best_cost:.4f} kWh")
    return EvrpSolution(routes=ordered, total_energy=best_cost, status="heuristic")
