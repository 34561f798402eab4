"""A constructive feasible schedule used to seed the evolutionary search."""

import logging
import math

import numpy as np

from ..errors import InitializationError
from .cost import evaluate_cost
from .types import Schedule, ScheduleInstance

logger = logging.getLogger(__name__)

EPS = 1e-9


def balanced_assignment(instance: ScheduleInstance) -> np.ndarray:
    """
    Assign routes in start order to the least-loaded vehicle that is free.

    Raises:
        InitializationError: If some route overlaps a route on every vehicle
    """
    k_count = len(instance.vehicles)
    occupancy = instance.occupancy()
    assignment = np.zeros((k_count, len(instance.tasks)), dtype=int)
    load = np.zeros(k_count)
    busy = np.zeros((k_count, instance.horizon.intervals), dtype=int)
    order = sorted(range(len(instance.tasks)), key=lambda s: instance.tasks[s].start)
    for s in order:
        free = [k for k in range(k_count) if not np.any(busy[k] & occupancy[s])]
        if not free:
            raise InitializationError(f"route {s} overlaps a route on every vehicle")
        k = min(free, key=lambda v: (load[v], v))
        assignment[k, s] = 1
        busy[k] |= occupancy[s]
        load[k] += instance.tasks[s].total_energy
    return assignment


class _GreedyState:
    def __init__(self, instance: ScheduleInstance, assignment: np.ndarray) -> None:
        self.instance = instance
        h = instance.horizon.interval_hours
        n = instance.horizon.intervals
        k_count = len(instance.vehicles)
        self.assignment = assignment
        occupancy = instance.occupancy()
        self.busy = assignment @ occupancy if occupancy.size else np.zeros((k_count, n))
        energy = instance.task_energy()
        self.consumption = (
            assignment @ energy if energy.shape[0] else np.zeros((k_count, n))
        )
        self.actions = np.zeros((k_count, n), dtype=int)
        self.stations = np.full((k_count, n), -1, dtype=int)
        self.headcount = np.zeros((len(instance.stations), n), dtype=int)
        self.depot = [x for x, s in enumerate(instance.stations) if not s.is_remote]
        self.gain = [s.efficiency * s.rate_kw * h for s in instance.stations]
        self.loss = [s.rate_kw * h / s.efficiency for s in instance.stations]

    def levels(self, k: int) -> np.ndarray:
        delta = np.zeros(self.instance.horizon.intervals)
        for i in np.flatnonzero(self.actions[k]):
            x = self.stations[k, i]
            delta[i] = self.gain[x] if self.actions[k, i] == 1 else -self.loss[x]
        delta -= self.consumption[k]
        soc_max = self.instance.vehicles[k].soc_max
        return np.concatenate([[soc_max], soc_max + np.cumsum(delta)])

    def free(self, k: int, i: int, x: int) -> bool:
        return (
            self.busy[k, i] == 0
            and self.actions[k, i] == 0
            and self.headcount[x, i] < self.instance.stations[x].availability[i]
        )

    def set(self, k: int, i: int, x: int, u: int) -> None:
        self.actions[k, i] = u
        self.stations[k, i] = x
        self.headcount[x, i] += 1

    def clear(self, k: int, i: int) -> None:
        self.headcount[self.stations[k, i], i] -= 1
        self.actions[k, i] = 0
        self.stations[k, i] = -1

    def fill(self, k: int) -> bool:
        """Add cheapest charging actions until vehicle k meets its SOC limits."""
        vehicle = self.instance.vehicles[k]
        tolerance = self.instance.soc_tolerance
        n = self.instance.horizon.intervals
        while True:
            levels = self.levels(k)
            low = np.flatnonzero(levels < vehicle.soc_min - EPS)
            if low.size:
                latest = int(low[0]) - 1
            elif levels[-1] < vehicle.soc_max - tolerance - EPS:
                latest = n - 1
            else:
                return True
            best: tuple[float, int, int] | None = None
            for i in range(latest + 1):
                headroom = vehicle.soc_max - float(levels[i + 1 :].max())
                for x in self.depot:
                    if not self.free(k, i, x) or self.gain[x] > headroom + EPS:
                        continue
                    key = (self.instance.stations[x].tariff[i], -i, x)
                    if best is None or key < best:
                        best = key
            if best is None:
                return False
            self.set(k, -best[1], best[2], 1)

    def top_up(self, k: int) -> None:
        """Charge at the earliest idle depot slots whose gain fits under soc_max."""
        soc_max = self.instance.vehicles[k].soc_max
        for i in range(self.instance.horizon.intervals):
            headroom = soc_max - float(self.levels(k)[i + 1 :].max())
            for x in self.depot:
                if self.free(k, i, x) and self.gain[x] <= headroom + EPS:
                    self.set(k, i, x, 1)
                    break

    def refill(self, k: int) -> bool:
        for i in np.flatnonzero(self.actions[k] == 1):
            self.clear(k, int(i))
        return self.fill(k)

    def schedule(self) -> Schedule:
        return Schedule.from_arrays(self.assignment, self.actions, self.stations)


def greedy_schedule(instance: ScheduleInstance) -> Schedule:
    """
    A feasible schedule built without search.

    Routes go to vehicles by balanced assignment. Each vehicle then charges at the
    cheapest idle depot slots that keep it within its SOC limits. When
    degradation is priced, a second pattern that tops the battery up right after
    each route is also built and the cheaper of the two is kept. When discharge
    is allowed, discharges at the best-paid idle slots are kept whenever they
    lower the total cost after recharging.

    Raises:
        InitializationError: If no feasible schedule can be built this way
    """
    assignment = balanced_assignment(instance)
    state = _GreedyState(instance, assignment)
    if not state.depot:
        raise InitializationError("greedy schedule needs a station at the depot")
    for k in range(len(instance.vehicles)):
        if not state.fill(k):
            raise InitializationError(f"cannot keep vehicle {k} within its SOC limits")

    if instance.use_degradation:
        topped = _GreedyState(instance, assignment)
        for k in range(len(instance.vehicles)):
            topped.top_up(k)
        feasible = all(topped.fill(k) for k in range(len(instance.vehicles)))
        if feasible and (
            evaluate_cost(topped.schedule(), instance).total
            < evaluate_cost(state.schedule(), instance).total
        ):
            logger.debug("Greedy keeps the travel-charge pattern")
            state = topped

    if instance.allow_discharge:
        best_total = evaluate_cost(state.schedule(), instance).total
        n = instance.horizon.intervals
        candidates = sorted(
            (
                (-instance.stations[x].tariff[i], i, k, x)
                for k in range(len(instance.vehicles))
                for i in range(n)
                for x in state.depot
                if instance.discharge_slot(x)
            ),
        )
        for _, i, k, x in candidates:
            if not state.free(k, i, x):
                continue
            saved = (state.actions[k].copy(), state.stations[k].copy())
            saved_heads = state.headcount.copy()
            state.set(k, i, x, -1)
            feasible = state.refill(k)
            total = evaluate_cost(state.schedule(), instance).total if feasible else (
                math.inf
            )
            if total < best_total:
                best_total = total
                continue
            state.actions[k], state.stations[k] = saved
            state.headcount = saved_heads

    schedule = state.schedule()
    logger.debug(f"Greedy schedule: {int(np.count_nonzero(state.actions))} actions")
    return schedule
