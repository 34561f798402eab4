"""Concurrent batches of scenario runs."""

import asyncio
import logging
import time
from typing import List

import logfire

from ..errors import StageError
from ..fleet.config import (
    ScenarioConfig,
    confined_scenario,
    data_file,
    load_scenario,
    shipped_scenario,
)
from ..fleet.pipeline import run_scenario
from ..logging.setup import (
    log_batch_item_error,
    log_batch_metrics,
    log_batch_summary,
)
from ..models import (
    MultipleScenariosRequest,
    MultipleScenariosResponse,
    ScenarioRun,
    ScenarioSummary,
)

logger = logging.getLogger(__name__)

DEFAULT_BATCH_SIZE = 4


def resolve_config(run: ScenarioRun) -> ScenarioConfig:
    """
    The scenario a batch item names, with its seed override applied.

    Batch items come from clients, so every file they name must sit in the
    shipped data directory.

    Raises:
        ParameterError: If a name or path points outside the data directory
    """
    if run.config is not None:
        config = confined_scenario(run.config)
    elif run.scenario is not None:
        config = load_scenario(shipped_scenario(run.scenario))
    else:
        assert run.path is not None
        config = load_scenario(data_file(run.path))
    return config.with_seed(run.seed) if run.seed is not None else config


def summarize_run(run: ScenarioRun) -> ScenarioSummary:
    """Run one scenario to the end and keep its headline figures."""
    config = resolve_config(run)
    report = run_scenario(config)
    solution = report.solution
    schedule = report.de_result.schedule if report.de_result else None
    logger.info(f"Scenario {config.name} (seed {config.seed}) finished")
    return ScenarioSummary(
        scenario=config.name,
        seed=config.seed,
        config_hash=report.config_hash,
        routes=len(solution.routes) if solution else None,
        route_energy_kwh=solution.total_energy if solution else None,
        total_cost=schedule.cost.total if schedule and schedule.cost else None,
        mean_dod=[r.subcycles.dod_avg for r in report.degradation],
    )


def _failure_summary(run: ScenarioRun, error: BaseException) -> ScenarioSummary:
    stage = error.stage if isinstance(error, StageError) else None
    cause = error.cause if isinstance(error, StageError) else error
    log_batch_item_error(cause, run.label, stage)
    return ScenarioSummary(
        status="error",
        scenario=run.label,
        seed=run.seed,
        error=f"{type(cause).__name__}: {cause}",
        stage=stage,
    )


async def process_batch(
    batch: List[ScenarioRun], batch_number: int
) -> List[ScenarioSummary]:
    """
    Run a batch of scenarios concurrently in worker threads.

    Args:
        batch: The scenario runs of this batch
        batch_number: The current batch number

    Returns:
        One summary per run, in request order
    """
    batch_start = time.perf_counter()
    results = await asyncio.gather(
        *[asyncio.to_thread(summarize_run, run) for run in batch],
        return_exceptions=True,
    )
    summaries = [
        result
        if isinstance(result, ScenarioSummary)
        else _failure_summary(run, result)
        for run, result in zip(batch, results, strict=True)
    ]
    log_batch_metrics(batch_number, summaries, time.perf_counter() - batch_start)
    return summaries


async def process_multiple_scenarios(
    request: MultipleScenariosRequest, batch_size: int = DEFAULT_BATCH_SIZE
) -> MultipleScenariosResponse:
    """
    Run scenario batches one after another; runs inside a batch are concurrent.

    A failing run is reported in its own summary and does not stop the others.
    """
    with logfire.span(
        "scenario_batch",
        attributes={"total_runs": len(request.runs), "batch_size": batch_size},
    ):
        started = time.perf_counter()
        summaries: List[ScenarioSummary] = []
        for i in range(0, len(request.runs), batch_size):
            batch_number = i // batch_size + 1
            batch = request.runs[i : i + batch_size]
            with logfire.span(
                "scenario_batch_{batch_number}",
                batch_number=batch_number,
                runs=len(batch),
            ):
                summaries.extend(await process_batch(batch, batch_number))

        log_batch_summary(summaries, time.perf_counter() - started)
        return MultipleScenariosResponse(responses=summaries)
