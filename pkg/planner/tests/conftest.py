"""Shared fixtures for planner tests."""

import os
from collections.abc import Callable
from typing import AsyncGenerator, Dict, Generator

import httpx
import logfire
import numpy as np
import pytest
from asgi_lifespan import LifespanManager

from planner.energy.graph import energy_graph_from_matrices, load_matrix_csv
from planner.energy.types import EnergyGraph, VehicleParams
from planner.fleet.config import DATA_DIR, ScenarioConfig, load_scenario
from planner.fleet.pipeline import routing_instance
from planner.routing.types import EvrpInstance, TransportRequest
from planner.scheduling.types import (
    Horizon,
    RouteTask,
    ScheduleInstance,
    Station,
    Vehicle,
)

from .helpers import depot_station


@pytest.fixture(scope="session", autouse=True)
def quiet_logfire() -> None:
    """Keep logfire local during tests."""
    logfire.configure(send_to_logfire=False, console=False)


@pytest.fixture(autouse=True)
def setup_test_environment() -> Generator[None, None, None]:
    """Set the API key and clear the output-directory override."""
    original_api_key = os.environ.get("FLEET_PLANNER_API_KEY")
    original_out_dir = os.environ.pop("FLEET_PLANNER_OUT_DIR", None)
    os.environ["FLEET_PLANNER_API_KEY"] = "test_api_key"

    yield

    if original_api_key:
        os.environ["FLEET_PLANNER_API_KEY"] = original_api_key
    else:
        os.environ.pop("FLEET_PLANNER_API_KEY", None)
    if original_out_dir:
        os.environ["FLEET_PLANNER_OUT_DIR"] = original_out_dir
    else:
        os.environ.pop("FLEET_PLANNER_OUT_DIR", None)


@pytest.fixture
def auth_headers() -> Dict[str, str]:
    """Provide authentication headers for API requests."""
    return {"X-API-Key": "test_api_key"}


@pytest.fixture(scope="function")
async def client() -> AsyncGenerator[httpx.AsyncClient, None]:
    """An HTTP client talking to the app with its lifespan running."""
    from planner.main import app

    async with LifespanManager(app):
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://testserver"
        ) as ac:
            yield ac


@pytest.fixture
def vehicle_params() -> VehicleParams:
    """Vehicle parameters of the case-study shuttle."""
    return VehicleParams()


@pytest.fixture(scope="session")
def case_study_graph() -> EnergyGraph:
    """Shipped energy and distance matrices at 30 km/h, depot at the hotel."""
    nodes, energy = load_matrix_csv(DATA_DIR / "energy_kwh.csv")
    _, distance = load_matrix_csv(DATA_DIR / "distance_km.csv")
    return energy_graph_from_matrices(
        nodes, energy, distance, 30.0, depot="hotel", stations=["hotel", "public_rs"]
    )


@pytest.fixture(scope="session")
def sc1_config() -> ScenarioConfig:
    return load_scenario(DATA_DIR / "case_study_sc1.json")


@pytest.fixture(scope="session")
def case_study_instance(
    sc1_config: ScenarioConfig, case_study_graph: EnergyGraph
) -> EvrpInstance:
    """The hourly shuttle demand from 8:00 to 16:00."""
    return routing_instance(sc1_config, case_study_graph)


@pytest.fixture
def make_routing_instance(
    case_study_graph: EnergyGraph,
) -> Callable[..., EvrpInstance]:
    """Build instances over the case-study graph from (pickup, delivery, q, a, b)."""

    def build(*requests: tuple[str, str, int, float, float], **kwargs) -> EvrpInstance:
        settings = {"capacity": 4, "battery": 24.0} | kwargs
        return EvrpInstance(
            energy_graph=case_study_graph,
            requests=tuple(
                TransportRequest(pickup=p, delivery=d, passengers=q, a=a, b=b)
                for p, d, q, a, b in requests
            ),
            **settings,
        )

    return build


@pytest.fixture
def make_schedule_instance() -> Callable[..., ScheduleInstance]:
    """Small scheduling instances with depot stations and 24 kWh vehicles."""

    def build(
        n: int = 6,
        vehicles: int = 1,
        tasks: tuple[RouteTask, ...] = (),
        stations: tuple[Station, ...] | None = None,
        **kwargs,
    ) -> ScheduleInstance:
        return ScheduleInstance(
            horizon=Horizon(intervals=n),
            vehicles=tuple(
                Vehicle(
                    id=f"EV{k + 1}", capacity_kwh=24.0, soc_min=4.8, soc_max=22.8
                )
                for k in range(vehicles)
            ),
            stations=stations or (depot_station(n),),
            tasks=tasks,
            **({"use_degradation": False} | kwargs),
        )

    return build


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)
