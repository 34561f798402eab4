"""Logfire configuration and logging helpers."""

import logging
from collections import Counter
from typing import TYPE_CHECKING, Optional, Sequence

import logfire
from fastapi import FastAPI

if TYPE_CHECKING:
    from ..models import ScenarioSummary

# Configure logging
logger = logging.getLogger(__name__)


def initialize_logfire(
    service_name: str = "ev-fleet-planner",
    service_version: str = "0.1.0",
    environment: str = "development",
) -> None:
    """
    Configure Logfire for the CLI or the service.

    Spans are only shipped when a LOGFIRE_TOKEN is present, so local runs and
    tests stay offline.

    Args:
        service_name: Name reported to Logfire
        service_version: Planner version
        environment: Value of FLEET_PLANNER_ENV
    """
    logfire.configure(
        service_name=service_name,
        service_version=service_version,
        environment=environment,
        send_to_logfire="if-token-present",
    )
    logfire.info("Logfire configured")


def setup_fastapi_logging(app: FastAPI) -> None:
    """Instrument the planning service and route stdlib logs at INFO."""
    logfire.instrument_fastapi(app)
    logging.basicConfig(level=logging.INFO)


def log_generation_metrics(
    generation: int,
    best_cost: float,
    feasible_trials: int,
    accepted_trials: int,
    population_size: int,
) -> None:
    """
    Log metrics for one generation of the evolutionary search.

    Args:
        generation: Generation index (0 is the initial population)
        best_cost: Best objective value in the population
        feasible_trials: Trial vectors that satisfied every constraint
        accepted_trials: Trial vectors that replaced their target
        population_size: Number of individuals
    """
    acceptance_rate = (
        f"{accepted_trials / population_size * 100:.1f}%"
        if population_size > 0
        else "0%"
    )
    logfire.info(
        "DE generation metrics",
        generation=generation,
        best_cost=round(best_cost, 6),
        feasible_trials=feasible_trials,
        accepted_trials=accepted_trials,
        acceptance_rate=acceptance_rate,
    )


def log_stage_metrics(stage: str, duration_seconds: float, **details: object) -> None:
    """
    Log the completion of a pipeline stage.

    Args:
        stage: Stage name (filter, energy, routing, scheduling, degradation)
        duration_seconds: Wall-clock time spent in the stage
        details: Stage-specific figures (counts, totals)
    """
    logfire.info(
        "Pipeline stage completed",
        stage=stage,
        duration_seconds=round(duration_seconds, 3),
        **details,
    )


def _success_rate(completed: int, total: int) -> str:
    return f"{completed / total * 100:.1f}%" if total > 0 else "0%"


def log_batch_metrics(
    batch_number: int, summaries: Sequence["ScenarioSummary"], duration: float
) -> None:
    """
    Log one finished batch of scenario runs.

    Args:
        batch_number: The current batch number (1-based)
        summaries: The batch's summaries, failures included
        duration: Wall-clock seconds the batch took
    """
    costs = [s.total_cost for s in summaries if s.total_cost is not None]
    completed = sum(s.status == "success" for s in summaries)
    logfire.info(
        "Scenario batch metrics",
        batch_number=batch_number,
        runs=len(summaries),
        completed=completed,
        success_rate=_success_rate(completed, len(summaries)),
        cheapest_cost=round(min(costs), 4) if costs else None,
        duration_seconds=round(duration, 2),
    )


def log_batch_summary(
    summaries: Sequence["ScenarioSummary"], total_duration: float
) -> None:
    """Log the outcome of a whole scenario batch, with failures counted by stage."""
    failed_stages = Counter(
        s.stage or "setup" for s in summaries if s.status != "success"
    )
    completed = len(summaries) - sum(failed_stages.values())
    logfire.info(
        "Scenario batch summary",
        total_runs=len(summaries),
        completed=completed,
        success_rate=_success_rate(completed, len(summaries)),
        failed_by_stage=dict(sorted(failed_stages.items())),
        total_duration_seconds=round(total_duration, 2),
    )


def log_batch_item_error(
    error: BaseException, scenario: str, stage: Optional[str]
) -> None:
    """Log a scenario run that failed inside a batch."""
    logfire.error(
        "Scenario run failed",
        scenario=scenario,
        stage=stage,
        error_type=type(error).__name__,
        error=str(error),
    )
    logger.error(f"Scenario {scenario} failed at {stage or 'setup'}: {error}")
