"""Main FastAPI application."""

import logging

from fastapi import FastAPI

from . import __version__
from .config import environment, load_environment
from .core.lifespan import lifespan
from .errors import PlannerError
from .logging.setup import (
    initialize_logfire,
    setup_fastapi_logging,
)
from .routes import general, planning

load_environment()
initialize_logfire(
    service_name="ev-fleet-planner-api",
    service_version=__version__,
    environment=environment(),
)

logger = logging.getLogger(__name__)

app = FastAPI(
    title="EV Fleet Planner API",
    description="Energy-aware routing and charge scheduling for EV fleets",
    version=__version__,
    lifespan=lifespan,
)

setup_fastapi_logging(app)
app.add_exception_handler(PlannerError, planning.planner_error_handler)

app.include_router(general.router)
app.include_router(planning.router)
