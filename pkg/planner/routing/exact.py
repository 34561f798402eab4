"""Exact routing by route enumeration and set-partition branch-and-bound."""

import logging
import math
import time
from dataclasses import dataclass, field

import logfire

from ..errors import InfeasibleInstanceError
from .types import EvrpInstance, EvrpSolution, Route
from .validation import validate_route

logger = logging.getLogger(__name__)

# Lower bounds are float sums; this keeps rounding from pruning a tied optimum.
BOUND_SLACK = 1e-9


class _LimitReached(Exception):
    pass


@dataclass
class _Budget:
    node_limit: int
    deadline: float
    nodes: int = 0
    exhausted: bool = False

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.node_limit or time.monotonic() > self.deadline:
            self.exhausted = True
            raise _LimitReached


@dataclass(order=True)
class _Candidate:
    cost: float
    stops: tuple[int, ...]
    mask: int = field(compare=False)
    route: Route = field(compare=False)


def _route_key(route: Route) -> tuple[float, tuple[int, ...]]:
    return route.energy_kwh, route.stops


def enumerate_routes(instance: EvrpInstance, budget: _Budget) -> dict[int, Route]:
    """
    Cheapest feasible route for every subset of requests that one route can serve.

    Depth-first over partial stop sequences, pruned by windows, load, battery and
    route duration. Keys are request bitmasks.
    """
    m = instance.m
    graph = instance.energy_graph
    depot = graph.depot
    best: dict[int, Route] = {}
    stations = instance.station_stops() if instance.use_station_stops else []
    max_duration = instance.max_route_duration_s

    def record(path: list[int]) -> None:
        result = validate_route(instance, [*path, instance.end_stop])
        if isinstance(result, list):
            return
        mask = 0
        for s in path:
            if 1 <= s <= m:
                mask |= 1 << (s - 1)
        current = best.get(mask)
        if current is None or _route_key(result) < _route_key(current):
            best[mask] = result

    def extend(
        path: list[int],
        loc: str,
        w: float,
        load: int,
        energy: float,
        open_requests: frozenset[int],
        served: frozenset[int],
        departure: float,
    ) -> None:
        budget.tick()
        if served and not open_requests:
            record(path)

        candidates: list[int] = []
        for r in range(m):
            if r not in served and r not in open_requests:
                candidates.append(r + 1)
        candidates.extend(r + 1 + m for r in sorted(open_requests))
        if path[-1] not in stations:
            candidates.extend(s for s in stations if s not in path)

        for stop in candidates:
            nxt = instance.location(stop)
            new_load = load + instance.load_change(stop)
            if new_load > instance.capacity:
                continue
            a, b = instance.window(stop)
            dwell = instance.dwell_s if len(path) > 1 else 0.0
            if len(path) == 1:
                start = max(0.0, a - graph.time(depot, nxt))
            else:
                start = departure
            arrival = max(a, w + dwell + graph.time(loc, nxt))
            if arrival > b:
                continue
            if max_duration is not None and arrival - start > max_duration:
                continue
            new_energy = energy - graph.energy(loc, nxt)
            if new_energy < instance.e_min:
                continue
            if instance.is_station(stop):
                charge = instance.station_charge_kwh or instance.battery
                new_energy = min(instance.battery, new_energy + charge)

            if 1 <= stop <= m:
                new_open = open_requests | {stop - 1}
                new_served = served
            elif m < stop <= 2 * m:
                new_open = open_requests - {stop - m - 1}
                new_served = served | {stop - m - 1}
            else:
                new_open, new_served = open_requests, served
            path.append(stop)
            extend(
                path, nxt, arrival, new_load, new_energy, new_open, new_served, start
            )
            path.pop()

    for r in range(m):
        record([0, r + 1, r + 1 + m])
    try:
        extend([0], depot, 0.0, 0, instance.battery, frozenset(), frozenset(), 0.0)
    except _LimitReached:
        logger.warning(f"Route enumeration stopped after {budget.nodes} nodes")
    return best


def _solution_key(routes: list[Route]) -> tuple[tuple[int, ...], ...]:
    return tuple(sorted(r.stops for r in routes))


def solve_exact(
    instance: EvrpInstance,
    node_limit: int = 2_000_000,
    time_limit: float = 60.0,
) -> EvrpSolution:
    """
    Minimum-energy route set covering every request exactly once.

    Feasible routes are enumerated first, keeping the cheapest per request subset.
    A branch-and-bound over set partitions then branches on the lowest uncovered
    request; the bound charges each uncovered request its cheapest per-request
    share of any candidate route. Equal-energy solutions are broken by the
    lexicographically smallest sorted route encoding.

    Args:
        instance: The routing instance
        node_limit: Search nodes allowed across enumeration and branching
        time_limit: Wall-clock seconds allowed

    Returns:
        An optimal solution, or the incumbent with status "limits_exhausted"

    Raises:
        InfeasibleInstanceError: If a request can be served by no feasible route
    """
    m = instance.m
    if m == 0:
        return EvrpSolution(routes=(), total_energy=0.0, status="optimal")

    budget = _Budget(node_limit=node_limit, deadline=time.monotonic() + time_limit)
    with logfire.span("branch_and_bound", requests=m):
        subsets = enumerate_routes(instance, budget)
        covered_any = 0
        for mask in subsets:
            covered_any |= mask
        for r in range(m):
            if not covered_any >> r & 1 and not budget.exhausted:
                request = instance.requests[r]
                raise InfeasibleInstanceError(
                    f"request {r} ({request.pickup} -> {request.delivery}) is served "
                    "by no feasible route",
                    request=r,
                )

        candidates = sorted(
            _Candidate(route.energy_kwh, route.stops, mask, route)
            for mask, route in subsets.items()
        )
        by_request: list[list[_Candidate]] = [[] for _ in range(m)]
        share = [math.inf] * m
        for cand in candidates:
            size = bin(cand.mask).count("1")
            for r in range(m):
                if cand.mask >> r & 1:
                    by_request[r].append(cand)
                    share[r] = min(share[r], cand.cost / size)

        full = (1 << m) - 1
        best_routes: list[Route] | None = None
        best_cost = math.inf
        best_key: tuple[tuple[int, ...], ...] = ()

        def search(covered: int, chosen: list[Route], remaining_bound: float) -> None:
            nonlocal best_routes, best_cost, best_key
            budget.tick()
            if covered == full:
                cost = math.fsum(r.energy_kwh for r in chosen)
                key = _solution_key(chosen)
                if cost < best_cost or (
                    cost == best_cost and best_routes is not None and key < best_key
                ):
                    best_routes, best_cost, best_key = list(chosen), cost, key
                return
            if len(chosen) >= instance.route_limit:
                return
            partial = math.fsum(r.energy_kwh for r in chosen)
            if partial + remaining_bound > best_cost + BOUND_SLACK:
                return
            r = next(i for i in range(m) if not covered >> i & 1)
            for cand in by_request[r]:
                if cand.mask & covered:
                    continue
                released = math.fsum(
                    share[i] for i in range(m) if cand.mask >> i & 1
                )
                chosen.append(cand.route)
                search(covered | cand.mask, chosen, remaining_bound - released)
                chosen.pop()

        singles = [subsets.get(1 << r) for r in range(m)]
        if m <= instance.route_limit and all(r is not None for r in singles):
            best_routes = [r for r in singles if r is not None]
            best_cost = math.fsum(r.energy_kwh for r in best_routes)
            best_key = _solution_key(best_routes)

        try:
            if not budget.exhausted and all(math.isfinite(s) for s in share):
                search(0, [], math.fsum(share))
        except _LimitReached:
            logger.warning(f"Branch-and-bound stopped after {budget.nodes} nodes")

    if best_routes is None:
        reason = "search limits reached" if budget.exhausted else "route limit too low"
        raise InfeasibleInstanceError(f"no feasible route set found ({reason})")

    status = "limits_exhausted" if budget.exhausted else "optimal"
    routes = tuple(sorted(best_routes, key=lambda r: (r.departure_s, r.stops)))
    logfire.info(
        "Exact routing finished",
        status=status,
        routes=len(routes),
        total_energy=round(best_cost, 6),
        nodes=budget.nodes,
    )
    return EvrpSolution(
        routes=routes,
        total_energy=best_cost,
        status=status,
        nodes_explored=budget.nodes,
    )
