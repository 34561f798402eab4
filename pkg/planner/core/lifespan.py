"""Core lifespan events for the FastAPI application."""

import logging
from contextlib import asynccontextmanager
from typing import AsyncIterator

from fastapi import FastAPI

from ..errors import PlannerError
from ..fleet.config import load_scenario, shipped_scenario
from ..fleet.pipeline import run_scenario

logger = logging.getLogger(__name__)

CASE_STUDY_SCENARIO = "case_study_sc1"


@asynccontextmanager
async def lifespan(app: FastAPI) -> AsyncIterator[None]:
    """Load the shipped case-study energy graph once and keep it on app.state."""
    logger.info("Lifespan: loading the case-study energy graph...")
    try:
        config = load_scenario(shipped_scenario(CASE_STUDY_SCENARIO))
        report = run_scenario(config, until="energy")
        app.state.case_study_graph = report.energy_graph
        logger.info(
            f"Lifespan: case-study graph ready with {len(config.stations)} stations"
        )
    except PlannerError as e:
        logger.error(f"Lifespan: could not load the case-study graph: {e}")
        app.state.case_study_graph = None
    try:
        yield
    finally:
        logger.info("Lifespan: releasing the case-study graph")
        app.state.case_study_graph = None
