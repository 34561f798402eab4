"""Binary differential evolution over encoded schedules."""

import functools
import logging
import math
import time
from collections import Counter

import logfire
import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..errors import InitializationError, ParameterError
from ..logging.setup import log_generation_metrics
from .constraints import check_schedule
from .cost import evaluate_cost
from .encoding import SlotLayout, decode, encode
from .greedy import greedy_schedule
from .soc import simulate_soc
from .types import Schedule, ScheduleInstance

logger = logging.getLogger(__name__)


class DEParams(BaseModel):
    """Search settings; `population_size` defaults to ten times the vector length.

    `fitness_cache_size` bounds how many distinct vectors keep their cost.
    """

    population_size: int | None = Field(None, ge=4)
    crossover_rate: float = Field(0.3, ge=0.0, le=1.0)
    generations: int = Field(100, ge=0)
    seed: int = Field(0, ge=0)
    init_budget_factor: int = Field(50, ge=1)
    discharge_probability: float = Field(0.1, ge=0.0, le=1.0)
    log_every: int = Field(10, ge=1)
    fitness_cache_size: int = Field(4096, ge=0)

    model_config = ConfigDict(extra="forbid", frozen=True)


class DEResult(BaseModel):
    """Best schedule found and how the search got there."""

    schedule: Schedule
    best_cost_series: tuple[float, ...]
    population_size: int
    vector_length: int
    initial_feasible: int
    greedy_seeded: bool
    greedy_won: bool
    elapsed_s: float = 0.0


def de_mutate(x1: np.ndarray, x2: np.ndarray, x3: np.ndarray) -> np.ndarray:
    """Donor vector x1 OR (x2 XOR x3)."""
    if not len(x1) == len(x2) == len(x3):
        raise ParameterError(
            f"mutation needs equal lengths, got {len(x1)}, {len(x2)}, {len(x3)}"
        )
    return np.bitwise_or(x1, np.bitwise_xor(x2, x3)).astype(np.uint8)


def draw_run_length(c_r: float, m_v: int, rng: np.random.Generator) -> int:
    """Run length L: grows by one while a uniform draw is <= C_r, up to m_v + 1."""
    if not 0.0 <= c_r <= 1.0:
        raise ParameterError(f"crossover rate must lie in [0, 1], got {c_r}")
    length = 1
    while rng.random() <= c_r and length <= m_v:
        length += 1
    return length


def de_crossover(
    target: np.ndarray, donor: np.ndarray, c_r: float, rng: np.random.Generator
) -> np.ndarray:
    """
    Exponential crossover.

    Draws a start n_v uniformly in [1, m_v] and a run length L, then copies the
    donor bits at positions n_v+1 .. n_v+L-1 (1-based, wrapping around) into a
    copy of the target.
    """
    if len(target) != len(donor):
        raise ParameterError("crossover needs vectors of equal length")
    if not 0.0 <= c_r <= 1.0:
        raise ParameterError(f"crossover rate must lie in [0, 1], got {c_r}")
    m_v = len(target)
    trial = np.array(target, dtype=np.uint8, copy=True)
    if m_v == 0:
        return trial
    start = int(rng.integers(1, m_v + 1))
    length = draw_run_length(c_r, m_v, rng)
    positions = [(start + j - 1) % m_v for j in range(1, length)]
    trial[positions] = np.asarray(donor, dtype=np.uint8)[positions]
    return trial


def random_schedule(
    instance: ScheduleInstance, rng: np.random.Generator, discharge_probability: float
) -> Schedule:
    """
    A random candidate: uniform assignment, charging bits at idle intervals.

    The charging density of each vehicle matches the energy its routes draw.
    """
    k_count = len(instance.vehicles)
    n = instance.horizon.intervals
    s_count = len(instance.tasks)
    assignment = np.zeros((k_count, s_count), dtype=int)
    if s_count:
        assignment[rng.integers(0, k_count, size=s_count), np.arange(s_count)] = 1
    occupancy = instance.occupancy()
    busy = assignment @ occupancy if occupancy.size else np.zeros((k_count, n), int)
    need = (
        assignment @ instance.task_energy()
        if s_count
        else np.zeros((k_count, n))
    ).sum(axis=1)
    h = instance.horizon.interval_hours
    mean_gain = float(
        np.mean([s.efficiency * s.rate_kw * h for s in instance.stations])
    )

    actions = np.zeros((k_count, n), dtype=int)
    stations = np.full((k_count, n), -1, dtype=int)
    for k in range(k_count):
        idle = np.flatnonzero(busy[k] == 0)
        if idle.size == 0:
            continue
        density = min(1.0, (need[k] / mean_gain + 0.5) / idle.size)
        for i in idle[rng.random(idle.size) < density]:
            x = int(rng.integers(0, len(instance.stations)))
            u = -1 if instance.discharge_slot(x) and (
                rng.random() < discharge_probability
            ) else 1
            actions[k, i] = u
            stations[k, i] = x
    return Schedule.from_arrays(assignment, actions, stations)


def de_optimize(instance: ScheduleInstance, params: DEParams | None = None) -> DEResult:
    """
    Minimize tariff plus degradation cost with binary differential evolution.

    The population holds one greedy feasible schedule plus random candidates that
    passed every constraint. Each generation, every target i gets a donor
    x_r1 OR (x_r2 XOR x_r3) from three other members and an exponential
    crossover trial; the trial replaces the target when its cost is lower or
    equal. Infeasible trials cost +inf. Every individual draws from its own
    generator seeded by (seed, generation, index).

    Args:
        instance: The scheduling instance
        params: Search settings

    Returns:
        The best schedule, with its SOC trace and cost, and the per-generation best
        cost (generation 0 included)

    Raises:
        InitializationError: If no feasible individual is found
    """
    params = params or DEParams()
    layout = SlotLayout(instance)
    m_v = layout.length
    pop_size = params.population_size or max(10 * m_v, 4)
    started = time.monotonic()
    @functools.lru_cache(maxsize=params.fitness_cache_size)
    def cost_of(key: bytes) -> float:
        bits = np.frombuffer(key, dtype=np.uint8)
        return evaluate_cost(decode(bits, instance, layout), instance).total

    def fitness(bits: np.ndarray) -> float:
        return cost_of(np.asarray(bits, dtype=np.uint8).tobytes())

    with logfire.span("de_optimize", vector_length=m_v, population_size=pop_size):
        population: list[np.ndarray] = []
        greedy_bits: np.ndarray | None = None
        try:
            greedy_bits = encode(greedy_schedule(instance), instance, layout)
            if math.isfinite(fitness(greedy_bits)):
                population.append(greedy_bits)
            else:
                greedy_bits = None
        except InitializationError as e:
            logger.warning(f"No greedy seed: {e}")

        init_rng = np.random.default_rng([params.seed, 0])
        rejected: Counter[str] = Counter()
        budget = params.init_budget_factor * pop_size
        draws = 0
        while len(population) < pop_size and draws < budget:
            draws += 1
            candidate = random_schedule(
                instance, init_rng, params.discharge_probability
            )
            violations = check_schedule(candidate, instance)
            if violations:
                rejected.update(v.kind for v in violations)
                continue
            population.append(encode(candidate, instance, layout))
        initial_feasible = len(population)

        if not population:
            raise InitializationError(
                f"no feasible schedule after {draws} random draws",
                diagnostics={"draws": draws, "violations": dict(rejected)},
            )
        for i in range(pop_size - initial_feasible):
            population.append(population[i % initial_feasible].copy())

        costs = np.array([fitness(x) for x in population])
        series = [float(costs.min())]
        log_generation_metrics(0, series[0], initial_feasible, 0, pop_size)

        for generation in range(1, params.generations + 1):
            next_population = list(population)
            next_costs = costs.copy()
            feasible = accepted = 0
            for i in range(pop_size):
                rng = np.random.default_rng([params.seed, generation, i])
                others = [j for j in range(pop_size) if j != i]
                r1, r2, r3 = rng.choice(others, size=3, replace=False)
                donor = de_mutate(population[r1], population[r2], population[r3])
                trial = de_crossover(population[i], donor, params.crossover_rate, rng)
                cost = fitness(trial)
                if math.isfinite(cost):
                    feasible += 1
                if cost <= costs[i]:
                    next_population[i] = trial
                    next_costs[i] = cost
                    accepted += 1
            population, costs = next_population, next_costs
            series.append(float(costs.min()))
            if generation % params.log_every == 0 or generation == params.generations:
                log_generation_metrics(
                    generation, series[-1], feasible, accepted, pop_size
                )

    best_bits = population[int(np.argmin(costs))]
    greedy_won = greedy_bits is not None and np.array_equal(best_bits, greedy_bits)
    if greedy_won:
        logger.info("Greedy seed is the final answer")
    best = decode(best_bits, instance, layout)
    best = best.model_copy(
        update={
            "soc": simulate_soc(instance, best).levels,
            "cost": evaluate_cost(best, instance),
        }
    )
    return DEResult(
        schedule=best,
        best_cost_series=tuple(series),
        population_size=pop_size,
        vector_length=m_v,
        initial_feasible=initial_feasible,
        greedy_seeded=greedy_bits is not None,
        greedy_won=greedy_won,
        elapsed_s=time.monotonic() - started,
    )
