"""Routes for routing, scheduling and scenario runs."""

import asyncio
import logging

from fastapi import APIRouter, Depends, Request
from fastapi.responses import JSONResponse

from ..auth import verify_api_key
from ..batch.processor import process_multiple_scenarios
from ..core.dependencies import get_case_study_graph
from ..energy.types import EnergyGraph
from ..errors import InfeasibleInstanceError, InitializationError, PlannerError
from ..models import (
    EnergyMatrixResponse,
    ErrorResponse,
    MultipleScenariosRequest,
    MultipleScenariosResponse,
    RouteRequest,
    ScheduleRequest,
    ScheduleResponse,
)
from ..routing.exact import solve_exact
from ..routing.heuristic import solve_insertion_heuristic
from ..routing.types import EvrpSolution
from ..scheduling.evolution import de_optimize

router = APIRouter(prefix="/api/v1", tags=["Planning"])

logger = logging.getLogger(__name__)


async def planner_error_handler(request: Request, e: Exception) -> JSONResponse:
    """
    Answer a domain error with a 422 ErrorResponse.

    Covers errors raised while validating a request body as well as those raised
    by the solvers.
    """
    assert isinstance(e, PlannerError)
    logger.error(f"Error in {request.url.path}: {type(e).__name__}: {e}")
    content: dict[str, object] = {
        "status": "error",
        "error": type(e).__name__,
        "message": str(e),
    }
    if isinstance(e, InfeasibleInstanceError):
        content["request"] = e.request
    if isinstance(e, InitializationError):
        content["diagnostics"] = e.diagnostics
    return JSONResponse(status_code=422, content=content)


@router.post(
    "/routes", response_model=EvrpSolution, responses={422: {"model": ErrorResponse}}
)
async def solve_routes(
    route_request: RouteRequest, api_key: str = Depends(verify_api_key)
):
    """Solve a pickup-and-delivery routing instance."""
    if route_request.solver == "heuristic":
        return await asyncio.to_thread(
            solve_insertion_heuristic, route_request.instance, route_request.seed
        )
    return await asyncio.to_thread(
        solve_exact,
        route_request.instance,
        route_request.node_limit,
        route_request.time_limit_s,
    )


@router.post(
    "/schedules",
    response_model=ScheduleResponse,
    responses={422: {"model": ErrorResponse}},
)
async def optimize_schedule(
    schedule_request: ScheduleRequest, api_key: str = Depends(verify_api_key)
):
    """Assign routes and schedule charging with the evolutionary search."""
    result = await asyncio.to_thread(
        de_optimize, schedule_request.instance, schedule_request.de
    )
    return ScheduleResponse(
        schedule=result.schedule.model_copy(update={"cost": None}),
        cost=result.schedule.cost,
        best_cost_series=list(result.best_cost_series),
    )


@router.post("/scenarios", response_model=MultipleScenariosResponse)
async def run_scenarios(
    scenarios: MultipleScenariosRequest, api_key: str = Depends(verify_api_key)
):
    """Run scenarios concurrently; failures are reported per run."""
    return await process_multiple_scenarios(scenarios)


@router.get("/case-study/energy-matrix", response_model=EnergyMatrixResponse)
async def case_study_energy_matrix(
    api_key: str = Depends(verify_api_key),
    graph: EnergyGraph = Depends(get_case_study_graph),
):
    """Energy and travel-time matrices of the shipped case study."""
    return EnergyMatrixResponse(
        nodes=list(graph.nodes),
        depot=graph.depot,
        energy_kwh=graph.energy_matrix(),
        time_s=graph.time_matrix(),
    )
