"""Scenario orchestration: filter, energy graph, routes, schedule, degradation."""

import logging
import time
from collections.abc import Iterator
from contextlib import contextmanager
from typing import Any, Literal

import logfire
from pydantic import BaseModel, Field

from ..degradation.model import DegradationReport
from ..energy.filters import FilterComparison, compare_filters, savitzky_golay
from ..energy.graph import (
    build_energy_graph,
    energy_graph_from_matrices,
    load_matrix_csv,
)
from ..energy.types import EnergyGraph, RoadGraph
from ..errors import ParseError, StageError
from ..logging.setup import log_stage_metrics
from ..routing.demand import hourly_demand, passenger_revenue
from ..routing.exact import solve_exact
from ..routing.heuristic import solve_insertion_heuristic
from ..routing.types import EvrpInstance, EvrpSolution, TransportRequest
from ..scheduling.cost import vehicle_degradation
from ..scheduling.evolution import DEResult, de_optimize
from ..scheduling.soc import simulate_soc
from ..scheduling.tasks import route_tasks_from_solution
from ..scheduling.types import ScheduleInstance
from .config import ScenarioConfig
from .ingest import ingest_gps, load_road_graph, synth_gps

logger = logging.getLogger(__name__)

Stage = Literal["filter", "energy", "routing", "scheduling", "degradation"]
STAGES: tuple[Stage, ...] = ("filter", "energy", "routing", "scheduling", "degradation")


class RunReport(BaseModel):
    """Outputs of every stage that ran, plus the config hash and stage timings.

    `stage_seconds` is informational only and never emitted.
    """

    scenario: str
    seed: int
    config_hash: str
    stages: tuple[Stage, ...] = ()
    filter_comparison: FilterComparison | None = None
    energy_graph: EnergyGraph | None = None
    routing_instance: EvrpInstance | None = None
    solution: EvrpSolution | None = None
    schedule_instance: ScheduleInstance | None = None
    de_result: DEResult | None = None
    degradation: tuple[DegradationReport, ...] = ()
    passenger_revenue: float = 0.0
    stage_seconds: dict[str, float] = Field(default_factory=dict)


@contextmanager
def _stage(name: Stage, timings: dict[str, float]) -> Iterator[dict[str, Any]]:
    """Run one stage inside a span; failures become StageError."""
    details: dict[str, Any] = {}
    started = time.perf_counter()
    with logfire.span("pipeline stage {stage}", stage=name):
        try:
            yield details
        except StageError:
            raise
        except Exception as e:
            logger.error(f"Stage {name} failed: {e}")
            raise StageError(name, e) from e
    timings[name] = time.perf_counter() - started
    log_stage_metrics(name, timings[name], **details)


def _filter_stage(config: ScenarioConfig) -> FilterComparison | None:
    settings = config.filter
    if settings.synthetic is not None:
        noisy = synth_gps(settings.synthetic, config.seed)
        clean = synth_gps(settings.synthetic, config.seed, noisy=False)
        return compare_filters(
            noisy,
            clean,
            settings.window,
            settings.poly_order,
            settings.process_var,
            settings.meas_var,
        )
    if settings.profile_file is not None:
        # no clean reference for a field log; smoothing it validates the settings
        savitzky_golay(
            ingest_gps(settings.profile_file), settings.window, settings.poly_order
        )
    return None


def _smoothed(graph: RoadGraph, window: int, poly_order: int) -> RoadGraph:
    edges = []
    for edge in graph.edges:
        profile = edge.profile
        if len(profile.samples) >= window:
            profile = savitzky_golay(profile, window, poly_order)
        edges.append(edge.model_copy(update={"profile": profile}))
    return graph.model_copy(update={"edges": tuple(edges)})


def _energy_stage(config: ScenarioConfig) -> EnergyGraph:
    stations = sorted({s.node for s in config.stations})
    if config.case_study:
        assert config.energy_matrix is not None and config.distance_matrix is not None
        nodes, energy = load_matrix_csv(config.energy_matrix)
        distance_nodes, distance = load_matrix_csv(config.distance_matrix)
        if nodes != distance_nodes:
            raise ParseError(
                f"energy nodes {nodes} differ from distance nodes {distance_nodes}",
                path=str(config.distance_matrix),
            )
        return energy_graph_from_matrices(
            nodes, energy, distance, config.average_speed_kmh, config.depot, stations
        )

    assert config.road_graph is not None
    graph = _smoothed(
        load_road_graph(config.road_graph, config.seed),
        config.filter.window,
        config.filter.poly_order,
    )
    node_set = config.node_set or [v.id for v in graph.vertices]
    return build_energy_graph(
        graph,
        config.vehicle,
        node_set,
        depot=config.depot,
        stations=stations,
        clamp_regen=config.clamp_regen,
    )


def scenario_requests(config: ScenarioConfig) -> list[TransportRequest]:
    if config.demand is not None:
        return hourly_demand(config.demand)
    return list(config.requests or [])


def routing_instance(config: ScenarioConfig, graph: EnergyGraph) -> EvrpInstance:
    routing = config.routing
    return EvrpInstance(
        energy_graph=graph,
        requests=tuple(scenario_requests(config)),
        capacity=routing.capacity,
        battery=routing.battery,
        e_min=routing.e_min,
        big_m=routing.big_m,
        max_routes=routing.max_routes,
        max_route_duration_s=routing.max_route_duration_s,
        max_ride_s=routing.max_ride_s,
        dwell_s=routing.dwell_s,
    )


def _routing_stage(config: ScenarioConfig, instance: EvrpInstance) -> EvrpSolution:
    routing = config.routing
    if routing.solver == "heuristic":
        return solve_insertion_heuristic(instance, config.seed, routing.restarts)
    return solve_exact(instance, routing.node_limit, routing.time_limit_s)


def schedule_instance(
    config: ScenarioConfig, graph: EnergyGraph, solution: EvrpSolution
) -> ScheduleInstance:
    horizon = config.horizon
    return ScheduleInstance(
        horizon=horizon,
        vehicles=tuple(config.vehicles),
        stations=tuple(s.to_station(horizon, graph) for s in config.stations),
        tasks=tuple(route_tasks_from_solution(solution, horizon)),
        allow_discharge=config.allow_discharge,
        use_degradation=config.use_degradation,
        degradation=config.degradation,
    )


def run_scenario(config: ScenarioConfig, until: Stage = "degradation") -> RunReport:
    """
    Run the planning pipeline for one scenario.

    Case-study configs build the energy graph straight from the shipped matrices;
    otherwise the road graph's profiles are smoothed and reduced to a minimum-energy
    graph. Demand is routed, the routes are scheduled on the fleet and every
    vehicle's battery wear is reported.

    Args:
        config: The scenario
        until: Last stage to run

    Returns:
        The report of every stage that ran

    Raises:
        StageError: Naming the failing stage and wrapping its cause
    """
    last = STAGES.index(until)
    timings: dict[str, float] = {}
    report = RunReport(
        scenario=config.name, seed=config.seed, config_hash=config.config_hash()
    )
    done: list[Stage] = []

    def finished(stage: Stage) -> bool:
        done.append(stage)
        return STAGES.index(stage) >= last

    with logfire.span("scenario_run", scenario=config.name, seed=config.seed):
        with _stage("filter", timings) as details:
            comparison = _filter_stage(config)
            if comparison is not None:
                details["savgol_rms"] = round(comparison.savgol_rms, 6)
        report = report.model_copy(update={"filter_comparison": comparison})
        if finished("filter"):
            return _finish(report, done, timings)

        with _stage("energy", timings) as details:
            graph = _energy_stage(config)
            details["nodes"] = len(graph.nodes)
        report = report.model_copy(update={"energy_graph": graph})
        if finished("energy"):
            return _finish(report, done, timings)

        with _stage("routing", timings) as details:
            instance = routing_instance(config, graph)
            solution = _routing_stage(config, instance)
            details.update(routes=len(solution.routes), status=solution.status)
        revenue = passenger_revenue(config.demand) if config.demand else 0.0
        report = report.model_copy(
            update={
                "routing_instance": instance,
                "solution": solution,
                "passenger_revenue": revenue,
            }
        )
        if finished("routing"):
            return _finish(report, done, timings)

        with _stage("scheduling", timings) as details:
            sched_instance = schedule_instance(config, graph, solution)
            result = de_optimize(sched_instance, config.de)
            details["total_cost"] = result.best_cost_series[-1]
        report = report.model_copy(
            update={"schedule_instance": sched_instance, "de_result": result}
        )
        if finished("scheduling"):
            return _finish(report, done, timings)

        with _stage("degradation", timings) as details:
            schedule = result.schedule
            trace = simulate_soc(sched_instance, schedule)
            reports = vehicle_degradation(sched_instance, schedule, trace)
            details["degradation_cost"] = sum(r.cost for r in reports)
        report = report.model_copy(update={"degradation": tuple(reports)})
        finished("degradation")
        return _finish(report, done, timings)


def _finish(
    report: RunReport, done: list[Stage], timings: dict[str, float]
) -> RunReport:
    logger.info(f"Scenario {report.scenario} ran stages {', '.join(done)}")
    return report.model_copy(update={"stages": tuple(done), "stage_seconds": timings})
