"""Tests for SOC dynamics, schedule constraints, cost and the DE search."""

import itertools
import math
from collections.abc import Callable
from typing import Any

import numpy as np
import pytest
from scipy.stats import chisquare

from planner.errors import InitializationError, ParameterError, ScheduleError
from planner.routing.types import Route
from planner.scheduling import evolution
from planner.scheduling.constraints import check_schedule
from planner.scheduling.cost import evaluate_cost
from planner.scheduling.encoding import decode, encode, vector_length
from planner.scheduling.evolution import (
    DEParams,
    de_crossover,
    de_mutate,
    de_optimize,
    draw_run_length,
    random_schedule,
)
from planner.scheduling.greedy import balanced_assignment, greedy_schedule
from planner.scheduling.soc import (
    charge_increments,
    reroute_sessions,
    simulate_soc,
    unavailability,
)
from planner.scheduling.tasks import route_task
from planner.scheduling.types import Horizon, Schedule, ScheduleInstance, Station

from .helpers import depot_station, task

ScheduleFactory = Callable[..., ScheduleInstance]


def schedule_of(
    instance: ScheduleInstance,
    owners: list[int] | None = None,
    actions: dict[tuple[int, int], tuple[int, int]] | None = None,
) -> Schedule:
    """Schedule from route owners and {(vehicle, interval): (action, station)}."""
    k, n, s = len(instance.vehicles), instance.horizon.intervals, len(instance.tasks)
    assignment = np.zeros((k, s), dtype=int)
    for route, vehicle in enumerate(owners or [0] * s):
        assignment[vehicle, route] = 1
    u = np.zeros((k, n), dtype=int)
    x = np.full((k, n), -1, dtype=int)
    for (vehicle, i), (action, station) in (actions or {}).items():
        u[vehicle, i], x[vehicle, i] = action, station
    return Schedule.from_arrays(assignment, u, x)


def remote_station(n: int, reroute_intervals: int = 1) -> Station:
    return Station(
        id="RS3",
        rate_kw=6.0,
        efficiency=0.9,
        tariff=(0.1,) * n,
        availability=(1,) * n,
        reroute_intervals=reroute_intervals,
        reroute_kwh=1.168,
    )


@pytest.mark.parametrize(("i", "expected"), [(5, 1), (7, 0), (4, 1), (3, 0)])
def test_unavailability(i: int, expected: int) -> None:
    assert unavailability(task(0, 4, 6, 10, 1.0), i) == expected


def test_single_point_task_is_closed() -> None:
    assert unavailability(task(0, 4, 4, 10, 1.0), 4) == 1


def test_soc_is_constant_without_activity(
    make_schedule_instance: ScheduleFactory
) -> None:
    instance = make_schedule_instance()
    trace = simulate_soc(instance, schedule_of(instance), soc0=15.0)
    assert trace.vehicle(0) == (15.0,) * 7


def test_one_charge_action_adds_a_quantum(
    make_schedule_instance: ScheduleFactory
) -> None:
    instance = make_schedule_instance()
    schedule = schedule_of(instance, actions={(0, 2): (1, 0)})
    trace = simulate_soc(instance, schedule, 10.0)
    assert trace.vehicle(0)[3] - trace.vehicle(0)[2] == pytest.approx(1.35)
    assert trace.vehicle(0)[-1] == pytest.approx(11.35)


def test_discharge_costs_more_than_it_delivers(
    make_schedule_instance: ScheduleFactory,
) -> None:
    instance = make_schedule_instance(
        stations=(depot_station(6, allows_discharge=True),), allow_discharge=True
    )
    schedule = schedule_of(instance, actions={(0, 1): (-1, 0)})
    increments = charge_increments(instance, schedule)
    assert increments[0, 1] == pytest.approx(-1.5 / 0.9)


def test_route_energy_telescopes(make_schedule_instance: ScheduleFactory) -> None:
    instance = make_schedule_instance(tasks=(task(0, 1, 3, 6, 1.288),))
    trace = simulate_soc(instance, schedule_of(instance))
    assert trace.vehicle(0)[-1] == pytest.approx(22.8 - 1.288, abs=1e-12)


def test_unknown_station_is_a_schedule_error(
    make_schedule_instance: ScheduleFactory,
) -> None:
    instance = make_schedule_instance()
    with pytest.raises(ScheduleError):
        simulate_soc(instance, schedule_of(instance, actions={(0, 0): (1, 5)}))


@pytest.mark.slow
def test_soc_conservation_on_random_schedules(
    make_schedule_instance: ScheduleFactory, rng: np.random.Generator
) -> None:
    n = 12
    instance = make_schedule_instance(
        n=n,
        vehicles=2,
        tasks=(task(0, 1, 2, n, 2.0), task(1, 4, 6, n, 3.5), task(2, 8, 9, n, 1.1)),
        stations=(depot_station(n, allows_discharge=True), remote_station(n)),
        allow_discharge=True,
    )
    gain = [s.efficiency * s.rate_kw * 0.5 for s in instance.stations]
    loss = [s.rate_kw * 0.5 / s.efficiency for s in instance.stations]
    route_energy = [t.total_energy for t in instance.tasks]

    for _ in range(1000):
        schedule = random_schedule(instance, rng, discharge_probability=0.3)
        levels = simulate_soc(instance, schedule).array()
        assignment, actions, stations = schedule.arrays()
        sessions = reroute_sessions(instance, schedule)
        for k in range(2):
            charged = math.fsum(
                gain[stations[k, i]] if actions[k, i] == 1 else -loss[stations[k, i]]
                for i in np.flatnonzero(actions[k])
            )
            driven = math.fsum(e for e, a in zip(route_energy, assignment[k]) if a)
            rerouted = 1.168 * sum(1 for s in sessions if s.vehicle == k)
            assert levels[k, -1] - levels[k, 0] == pytest.approx(
                charged - driven - rerouted, abs=1e-9
            )


def test_idle_schedule_is_feasible(make_schedule_instance: ScheduleFactory) -> None:
    instance = make_schedule_instance()
    assert check_schedule(schedule_of(instance), instance) == []


def test_overlapping_routes_on_one_vehicle(
    make_schedule_instance: ScheduleFactory,
) -> None:
    instance = make_schedule_instance(
        tasks=(task(0, 1, 2, 6, 0.5), task(1, 1, 2, 6, 0.5))
    )
    violations = check_schedule(schedule_of(instance, owners=[0, 0]), instance)
    assert [v.index for v in violations if v.kind == "overlap"] == [1, 2]


def test_unassigned_route(make_schedule_instance: ScheduleFactory) -> None:
    instance = make_schedule_instance(vehicles=2, tasks=(task(0, 1, 2, 6, 0.5),))
    schedule = Schedule.from_arrays(
        np.zeros((2, 1), dtype=int), np.zeros((2, 6), dtype=int), np.full((2, 6), -1)
    )
    assert [v.kind for v in check_schedule(schedule, instance)] == ["assignment"]


def test_charging_during_a_route(make_schedule_instance: ScheduleFactory) -> None:
    instance = make_schedule_instance(tasks=(task(0, 1, 2, 6, 1.35),))
    schedule = schedule_of(instance, actions={(0, 2): (1, 0)})
    kinds = {v.kind for v in check_schedule(schedule, instance)}
    assert "charge_while_driving" in kinds


def test_discharge_needs_permission(make_schedule_instance: ScheduleFactory) -> None:
    instance = make_schedule_instance(
        stations=(depot_station(6, allows_discharge=True),)
    )
    schedule = schedule_of(instance, actions={(0, 1): (-1, 0), (0, 2): (1, 0)})
    kinds = [v.kind for v in check_schedule(schedule, instance)]
    assert "discharge_not_allowed" in kinds


def test_soc_floor_and_final_level(make_schedule_instance: ScheduleFactory) -> None:
    instance = make_schedule_instance(tasks=(task(0, 1, 3, 6, 19.0),))
    violations = check_schedule(schedule_of(instance), instance)
    kinds = [v.kind for v in violations]
    assert "soc_bounds" in kinds
    assert any(v.kind == "boundary" and v.index == 6 for v in violations)


def test_final_level_tolerates_one_quantum(
    make_schedule_instance: ScheduleFactory
) -> None:
    instance = make_schedule_instance(tasks=(task(0, 1, 2, 6, 1.35),))
    assert check_schedule(schedule_of(instance), instance) == []


def test_remote_session_needs_idle_travel(
    make_schedule_instance: ScheduleFactory
) -> None:
    n = 8
    instance = make_schedule_instance(
        n=n,
        tasks=(task(0, 1, 2, n, 1.0),),
        stations=(depot_station(n), remote_station(n)),
    )
    blocked = schedule_of(instance, actions={(0, 3): (1, 1)})
    clear = schedule_of(instance, actions={(0, 4): (1, 1)})

    blocked_violations = check_schedule(blocked, instance)
    assert [(v.kind, v.index) for v in blocked_violations if v.kind == "reroute"] == [
        ("reroute", 2)
    ]
    assert not [v for v in check_schedule(clear, instance) if v.kind == "reroute"]
    levels = simulate_soc(instance, clear).vehicle(0)
    assert levels[4] - levels[3] == pytest.approx(-0.584)
    assert levels[6] - levels[5] == pytest.approx(-0.584)


def test_station_headcount(make_schedule_instance: ScheduleFactory) -> None:
    instance = make_schedule_instance(
        vehicles=2,
        tasks=(task(0, 0, 1, 6, 1.35), task(1, 0, 1, 6, 1.35)),
        stations=(depot_station(6, availability=1),),
    )
    schedule = schedule_of(
        instance, owners=[0, 1], actions={(0, 3): (1, 0), (1, 3): (1, 0)}
    )
    violations = check_schedule(schedule, instance)
    assert [(v.kind, v.index) for v in violations] == [("availability", 3)]


def test_tariff_is_summed_per_action(make_schedule_instance: ScheduleFactory) -> None:
    instance = make_schedule_instance(
        n=4,
        tasks=(task(0, 0, 0, 4, 2.7),),
        stations=(depot_station(4, tariff=[0.5] * 4),),
    )
    schedule = schedule_of(instance, actions={(0, 1): (1, 0), (0, 3): (1, 0)})
    cost = evaluate_cost(schedule, instance)
    assert (cost.tariff, cost.revenue, cost.degradation, cost.total) == (
        1.0,
        0.0,
        0.0,
        1.0,
    )


def test_idle_day_costs_only_degradation(
    make_schedule_instance: ScheduleFactory
) -> None:
    instance = make_schedule_instance(use_degradation=True)
    cost = evaluate_cost(schedule_of(instance), instance)
    (report,) = cost.degradation_reports

    assert cost.tariff == 0.0
    assert report.dod_loss == 0.0
    assert report.soc_avg == pytest.approx(0.95)
    assert cost.degradation == pytest.approx(report.cost)


def test_discharge_earns_the_local_tariff(
    make_schedule_instance: ScheduleFactory
) -> None:
    tariff = [0.08, 0.08, 0.6, 0.6, 0.08, 0.08]
    instance = make_schedule_instance(
        stations=(depot_station(6, tariff=tariff, allows_discharge=True),),
        allow_discharge=True,
    )
    schedule = schedule_of(instance, actions={(0, 2): (-1, 0), (0, 5): (1, 0)})
    cost = evaluate_cost(schedule, instance)
    assert cost.revenue == pytest.approx(0.6)
    assert cost.total == pytest.approx(0.08 - 0.6)


def test_infeasible_schedule_costs_infinity(
    make_schedule_instance: ScheduleFactory
) -> None:
    instance = make_schedule_instance(tasks=(task(0, 1, 3, 6, 19.0),))
    assert evaluate_cost(schedule_of(instance), instance).total == math.inf


def test_vector_length() -> None:
    instance = ScheduleInstance(
        horizon=Horizon(intervals=3),
        vehicles=tuple(
            {"id": f"EV{k}", "capacity_kwh": 24.0, "soc_min": 4.8, "soc_max": 22.8}
            for k in range(2)
        ),
        stations=(depot_station(3),),
        tasks=(task(0, 0, 0, 3, 0.5), task(1, 2, 2, 3, 0.5)),
    )
    assert vector_length(instance) == 10


def test_discharge_doubles_the_slot(make_schedule_instance: ScheduleFactory) -> None:
    instance = make_schedule_instance(
        n=3,
        stations=(depot_station(3, allows_discharge=True),),
        allow_discharge=True,
    )
    assert vector_length(instance) == 6


def test_zero_vector_has_no_actions(make_schedule_instance: ScheduleFactory) -> None:
    instance = make_schedule_instance(tasks=(task(0, 1, 1, 6, 0.5),))
    bits = np.zeros(vector_length(instance), dtype=np.uint8)
    bits[-1] = 1
    schedule = decode(bits, instance)
    assert schedule.actions == ((0,) * 6,)
    assert schedule.assignment == ((1,),)


def test_greedy_schedule_survives_encoding(
    make_schedule_instance: ScheduleFactory
) -> None:
    instance = make_schedule_instance(
        n=8, vehicles=2, tasks=(task(0, 1, 2, 8, 3.0), task(1, 2, 4, 8, 4.0))
    )
    schedule = greedy_schedule(instance)
    assert decode(encode(schedule, instance), instance) == schedule


def test_decode_flags_double_actions(make_schedule_instance: ScheduleFactory) -> None:
    instance = make_schedule_instance(
        n=2, stations=(depot_station(2), depot_station(2, station_id="RS4"))
    )
    bits = np.array([1, 1, 0, 0], dtype=np.uint8)
    schedule = decode(bits, instance)

    assert schedule.actions == ((1, 0),)
    assert schedule.action_stations == ((0, -1),)
    assert "multiple_actions" in {v.kind for v in check_schedule(schedule, instance)}


def test_decode_rejects_wrong_length(make_schedule_instance: ScheduleFactory) -> None:
    instance = make_schedule_instance()
    with pytest.raises(ParameterError):
        decode(np.zeros(3, dtype=np.uint8), instance)


def test_encode_rejects_discharge_without_slot(
    make_schedule_instance: ScheduleFactory,
) -> None:
    instance = make_schedule_instance()
    with pytest.raises(ScheduleError):
        encode(schedule_of(instance, actions={(0, 1): (-1, 0)}), instance)


def bits(text: str) -> np.ndarray:
    return np.array([int(c) for c in text], dtype=np.uint8)


def test_mutation_examples() -> None:
    assert de_mutate(bits("0101"), bits("0011"), bits("0110")).tolist() == [0, 1, 0, 1]
    assert de_mutate(bits("1001"), bits("0110"), bits("0110")).tolist() == [1, 0, 0, 1]
    assert de_mutate(bits("1111"), bits("0011"), bits("0101")).tolist() == [1, 1, 1, 1]


def test_mutation_dominates_first_parent(rng: np.random.Generator) -> None:
    x1, x2, x3 = (rng.integers(0, 2, 32).astype(np.uint8) for _ in range(3))
    donor = de_mutate(x1, x2, x3)
    assert np.all(donor >= x1)


def test_mutation_length_mismatch() -> None:
    with pytest.raises(ParameterError):
        de_mutate(bits("01"), bits("011"), bits("010"))


def test_crossover_without_rate_keeps_target(rng: np.random.Generator) -> None:
    target, donor = bits("00000000"), bits("11111111")
    for _ in range(50):
        assert de_crossover(target, donor, 0.0, rng).tolist() == target.tolist()


def test_crossover_with_identical_donor(rng: np.random.Generator) -> None:
    target = bits("01101001")
    assert de_crossover(target, target.copy(), 0.9, rng).tolist() == target.tolist()


def test_crossover_copies_a_contiguous_run(rng: np.random.Generator) -> None:
    target, donor = np.zeros(8, dtype=np.uint8), np.ones(8, dtype=np.uint8)
    for _ in range(200):
        trial = de_crossover(target, donor, 0.6, rng)
        ones = np.flatnonzero(trial)
        if ones.size in (0, 8):
            continue
        # wrapped runs are contiguous on the circle: exactly one 0->1 edge
        rises = np.count_nonzero((np.roll(trial, 1) == 0) & (trial == 1))
        assert rises == 1


def test_crossover_rejects_bad_rate(rng: np.random.Generator) -> None:
    with pytest.raises(ParameterError):
        de_crossover(bits("01"), bits("10"), 1.5, rng)


def test_run_length_follows_truncated_geometric_law() -> None:
    rng = np.random.default_rng(11)
    c_r, m_v, draws = 0.3, 8, 100_000
    lengths = np.array([draw_run_length(c_r, m_v, rng) for _ in range(draws)])

    # lengths of 5 and more are pooled so every cell expects enough draws
    probabilities = [(1 - c_r) * c_r ** (ell - 1) for ell in range(1, 5)]
    probabilities.append(c_r**4)
    observed = [np.count_nonzero(lengths == ell) for ell in range(1, 5)]
    observed.append(np.count_nonzero(lengths >= 5))

    assert lengths.max() <= m_v + 1
    assert chisquare(observed, np.array(probabilities) * draws).pvalue > 0.01


def test_greedy_is_feasible(make_schedule_instance: ScheduleFactory) -> None:
    instance = make_schedule_instance(
        n=12,
        vehicles=2,
        tasks=(task(0, 1, 3, 12, 3.0), task(1, 2, 5, 12, 4.0), task(2, 6, 8, 12, 2.5)),
    )
    schedule = greedy_schedule(instance)
    assert check_schedule(schedule, instance) == []


def test_greedy_balances_the_load(make_schedule_instance: ScheduleFactory) -> None:
    instance = make_schedule_instance(
        n=12,
        vehicles=2,
        tasks=(task(0, 1, 2, 12, 3.0), task(1, 4, 5, 12, 3.0)),
    )
    assert balanced_assignment(instance).tolist() == [[1, 0], [0, 1]]


def test_greedy_picks_cheap_intervals(make_schedule_instance: ScheduleFactory) -> None:
    tariff = [0.12] * 4 + [0.08] * 4
    instance = make_schedule_instance(
        n=8, tasks=(task(0, 0, 1, 8, 2.7),), stations=(depot_station(8, tariff=tariff),)
    )
    schedule = greedy_schedule(instance)
    charged = [i for i, u in enumerate(schedule.actions[0]) if u == 1]
    assert charged and all(i >= 4 for i in charged)


def test_greedy_needs_a_free_vehicle(make_schedule_instance: ScheduleFactory) -> None:
    instance = make_schedule_instance(
        tasks=(task(0, 1, 2, 6, 1.0), task(1, 2, 3, 6, 1.0))
    )
    with pytest.raises(InitializationError):
        greedy_schedule(instance)


def test_greedy_needs_a_depot_station(make_schedule_instance: ScheduleFactory) -> None:
    instance = make_schedule_instance(n=8, stations=(remote_station(8),))
    with pytest.raises(InitializationError):
        greedy_schedule(instance)


def test_greedy_sells_when_the_gap_pays(
    make_schedule_instance: ScheduleFactory
) -> None:
    tariff = [0.08] * 4 + [0.6] * 2 + [0.08] * 4
    instance = make_schedule_instance(
        n=10,
        stations=(depot_station(10, tariff=tariff, allows_discharge=True),),
        allow_discharge=True,
    )
    schedule = greedy_schedule(instance)
    assert -1 in schedule.actions[0]
    assert evaluate_cost(schedule, instance).total < 0


def test_route_task_books_legs_by_overlap() -> None:
    route = Route(
        stops=(0, 1, 2, 3),
        locations=("hotel", "airport_1", "mall", "hotel"),
        service_times=(1500.0, 2100.0, 2700.0, 3000.0),
        loads=(0, 1, 0, 0),
        battery=(24.0, 23.4, 23.1, 23.0),
        leg_energies=(0.6, 0.3, 0.1),
        leg_times=(600.0, 600.0, 300.0),
        energy_kwh=1.0,
    )
    result = route_task(route, 0, Horizon(intervals=4))

    assert (result.start, result.end) == (0, 1)
    assert result.energy == pytest.approx((0.3, 0.7, 0.0, 0.0))
    assert result.total_energy == pytest.approx(1.0)


def test_route_task_outside_horizon() -> None:
    route = Route(
        stops=(0, 1, 2, 3),
        locations=("hotel", "airport_1", "mall", "hotel"),
        service_times=(6000.0, 6600.0, 7200.0, 7500.0),
        loads=(0, 1, 0, 0),
        battery=(24.0, 23.4, 23.1, 23.0),
        leg_energies=(0.6, 0.3, 0.1),
        leg_times=(600.0, 600.0, 300.0),
        energy_kwh=1.0,
    )
    with pytest.raises(ScheduleError):
        route_task(route, 0, Horizon(intervals=4))


def test_de_finds_the_single_cheap_interval(
    make_schedule_instance: ScheduleFactory
) -> None:
    tariff = [0.5, 0.5, 0.5, 0.5, 0.1, 0.5]
    instance = make_schedule_instance(
        tasks=(task(0, 1, 1, 6, 2.7),), stations=(depot_station(6, tariff=tariff),)
    )
    for seed in range(20):
        result = de_optimize(instance, DEParams(seed=seed, generations=5))
        assert result.schedule.actions[0] == (0, 0, 0, 0, 1, 0)
        assert result.schedule.cost is not None
        assert result.schedule.cost.total == pytest.approx(0.1)


def test_de_fails_without_feasible_schedules(
    make_schedule_instance: ScheduleFactory,
) -> None:
    instance = make_schedule_instance(
        n=4, tasks=(task(0, 0, 3, 4, 30.0),), stations=(depot_station(4),)
    )
    with pytest.raises(InitializationError) as excinfo:
        de_optimize(instance, DEParams(population_size=4, generations=1))
    assert excinfo.value.diagnostics["draws"] > 0


def test_fitness_cache_only_saves_evaluations(
    make_schedule_instance: ScheduleFactory, mocker: Any
) -> None:
    """Test that disabling the cost cache changes the work done, not the search."""
    tariff = [0.5, 0.5, 0.5, 0.5, 0.1, 0.5]
    instance = make_schedule_instance(
        tasks=(task(0, 1, 1, 6, 2.7),), stations=(depot_station(6, tariff=tariff),)
    )
    spy = mocker.spy(evolution, "evaluate_cost")

    cached = de_optimize(instance, DEParams(seed=3, generations=5))
    cached_calls = spy.call_count
    spy.reset_mock()
    uncached = de_optimize(
        instance, DEParams(seed=3, generations=5, fitness_cache_size=0)
    )

    assert uncached.best_cost_series == cached.best_cost_series
    assert uncached.schedule == cached.schedule
    assert spy.call_count > cached_calls


@pytest.mark.slow
def test_de_matches_exhaustive_optimum(make_schedule_instance: ScheduleFactory) -> None:
    n = 10
    tariff = [0.3, 0.3, 0.3, 0.3, 0.3, 0.15, 0.15, 0.2, 0.1, 0.25]
    instance = make_schedule_instance(
        n=n,
        tasks=(task(0, 2, 4, n, 4.0),),
        stations=(depot_station(n, tariff=tariff),),
        use_degradation=True,
    )
    m_v = vector_length(instance)
    assert m_v == 11
    optimum = min(
        evaluate_cost(decode(np.array(v, dtype=np.uint8), instance), instance).total
        for v in itertools.product((0, 1), repeat=m_v)
    )

    hits = 0
    for seed in range(20):
        result = de_optimize(instance, DEParams(seed=seed, generations=60))
        series = result.best_cost_series
        assert all(b <= a for a, b in zip(series, series[1:]))
        assert check_schedule(result.schedule, instance) == []
        hits += result.schedule.cost.total == pytest.approx(optimum, rel=1e-12)
    assert hits >= 18
