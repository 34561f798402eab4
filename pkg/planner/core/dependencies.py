"""Core dependencies for the FastAPI application."""

import logging
from typing import cast

from fastapi import HTTPException, Request

from ..energy.types import EnergyGraph

logger = logging.getLogger(__name__)


async def get_case_study_graph(request: Request) -> EnergyGraph:
    """The energy graph loaded during startup."""
    graph = getattr(request.app.state, "case_study_graph", None)
    if graph is None:
        logger.error("Case-study graph not found on request.app.state")
        raise HTTPException(status_code=500, detail="Case-study graph not available")
    return cast(EnergyGraph, graph)
