"""Tests for the HTTP planning service."""

import json
import os
from collections.abc import Callable
from pathlib import Path
from typing import Any, Dict

import httpx

from planner import __version__
from planner.fleet.config import DATA_DIR
from planner.models import ScenarioSummary
from planner.routing.types import EvrpInstance
from planner.scheduling.types import ScheduleInstance

from .helpers import task


async def test_root(client: httpx.AsyncClient) -> None:
    """Test the root endpoint."""
    response = await client.get("/")
    assert response.status_code == 200
    data = response.json()
    assert data["name"] == "EV Fleet Planner"
    assert data["version"] == __version__


async def test_health(client: httpx.AsyncClient) -> None:
    """Test the health check endpoint."""
    response = await client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "healthy", "version": __version__}


async def test_missing_api_key(client: httpx.AsyncClient) -> None:
    """Test that a request without the key header is unauthenticated."""
    response = await client.get("/api/v1/case-study/energy-matrix")
    assert response.status_code == 401
    assert response.headers["WWW-Authenticate"] == "APIKey"


async def test_invalid_api_key(client: httpx.AsyncClient) -> None:
    """Test that a wrong key is refused."""
    response = await client.get(
        "/api/v1/case-study/energy-matrix", headers={"X-API-Key": "wrong"}
    )
    assert response.status_code == 403
    assert response.json()["detail"] == "Invalid API key"


async def test_unconfigured_api_key(
    client: httpx.AsyncClient, auth_headers: Dict[str, str]
) -> None:
    """Test that the server reports a missing key configuration."""
    os.environ.pop("FLEET_PLANNER_API_KEY", None)
    response = await client.get(
        "/api/v1/case-study/energy-matrix", headers=auth_headers
    )
    assert response.status_code == 500


async def test_case_study_energy_matrix(
    client: httpx.AsyncClient, auth_headers: Dict[str, str]
) -> None:
    """Test that the startup graph is served as matrices."""
    response = await client.get(
        "/api/v1/case-study/energy-matrix", headers=auth_headers
    )
    assert response.status_code == 200
    data = response.json()
    hotel = data["nodes"].index("hotel")
    mall = data["nodes"].index("mall")

    assert data["depot"] == "hotel"
    assert len(data["energy_kwh"]) == len(data["nodes"]) == 6
    assert abs(data["energy_kwh"][hotel][mall] - 0.183) < 1e-9
    assert data["time_s"][hotel][hotel] == 0.0


async def test_solve_routes(
    client: httpx.AsyncClient,
    auth_headers: Dict[str, str],
    make_routing_instance: Callable[..., EvrpInstance],
) -> None:
    """Test that the exact solver answers over HTTP."""
    instance = make_routing_instance(("airport_1", "mall", 1, 3600.0, 5400.0))
    response = await client.post(
        "/api/v1/routes",
        json={"instance": instance.model_dump(mode="json", by_alias=True)},
        headers=auth_headers,
    )
    assert response.status_code == 200
    data = response.json()
    assert data["status"] == "optimal"
    assert abs(data["total_energy"] - (0.593 + 0.79 + 0.321)) < 1e-9


async def test_infeasible_routes(
    client: httpx.AsyncClient,
    auth_headers: Dict[str, str],
    make_routing_instance: Callable[..., EvrpInstance],
) -> None:
    """Test that an unservable request is a 422 naming the request."""
    instance = make_routing_instance(("airport_1", "hotel", 1, 0.0, 100.0))
    response = await client.post(
        "/api/v1/routes",
        json={"instance": instance.model_dump(mode="json", by_alias=True)},
        headers=auth_headers,
    )
    assert response.status_code == 422
    data = response.json()
    assert data["error"] == "InfeasibleInstanceError"
    assert data["request"] == 0


async def test_optimize_schedule(
    client: httpx.AsyncClient,
    auth_headers: Dict[str, str],
    make_schedule_instance: Callable[..., ScheduleInstance],
) -> None:
    """Test that the evolutionary search answers over HTTP."""
    instance = make_schedule_instance(n=6, tasks=(task(0, 1, 2, 6, 3.0),))
    response = await client.post(
        "/api/v1/schedules",
        json={
            "instance": instance.model_dump(mode="json"),
            "de": {"population_size": 8, "generations": 3, "seed": 1},
        },
        headers=auth_headers,
    )
    assert response.status_code == 200
    data = response.json()
    assert data["status"] == "success"
    assert len(data["best_cost_series"]) == 4
    assert data["schedule"]["assignment"] == [[1]]
    assert data["cost"]["total"] == data["best_cost_series"][-1]


async def test_run_scenarios(
    client: httpx.AsyncClient, auth_headers: Dict[str, str], mocker: Any
) -> None:
    """Test the scenario batch endpoint with the runs mocked."""
    mock_run = mocker.patch("planner.batch.processor.summarize_run")
    mock_run.side_effect = lambda run: ScenarioSummary(
        scenario=run.label, seed=run.seed, routes=9
    )

    response = await client.post(
        "/api/v1/scenarios",
        json={
            "runs": [
                {"scenario": "case_study_sc1", "seed": 1},
                {"scenario": "case_study_sc2", "seed": 2},
            ]
        },
        headers=auth_headers,
    )
    assert response.status_code == 200
    responses = response.json()["responses"]
    assert [r["scenario"] for r in responses] == ["case_study_sc1", "case_study_sc2"]
    assert [r["seed"] for r in responses] == [1, 2]
    assert mock_run.call_count == 2


async def test_run_scenarios_rejects_empty_batch(
    client: httpx.AsyncClient, auth_headers: Dict[str, str]
) -> None:
    """Test that a batch needs at least one run."""
    response = await client.post(
        "/api/v1/scenarios", json={"runs": []}, headers=auth_headers
    )
    assert response.status_code == 422


async def test_unknown_node_in_body_is_a_domain_error(
    client: httpx.AsyncClient,
    auth_headers: Dict[str, str],
    make_routing_instance: Callable[..., EvrpInstance],
) -> None:
    """Test that body validation reports the routing error kind, not a pydantic one."""
    instance = make_routing_instance(("airport_1", "mall", 1, 3600.0, 5400.0))
    body = instance.model_dump(mode="json", by_alias=True)
    body["requests"][0]["pickup"] = "nowhere"

    response = await client.post(
        "/api/v1/routes", json={"instance": body}, headers=auth_headers
    )
    assert response.status_code == 422
    data = response.json()
    assert data["error"] == "InstanceError"
    assert "nowhere" in data["message"]


async def test_scenario_files_outside_the_data_directory(
    client: httpx.AsyncClient, auth_headers: Dict[str, str], tmp_path: Path
) -> None:
    """Test that an inline config cannot make the server read a foreign file."""
    secret = tmp_path / "secret.txt"
    secret.write_text("user,TOPSECRET\nroot,hunter2\n")
    raw = json.loads((DATA_DIR / "case_study_sc1.json").read_text())
    raw["energy_matrix"] = raw["distance_matrix"] = str(secret)

    response = await client.post(
        "/api/v1/scenarios", json={"runs": [{"config": raw}]}, headers=auth_headers
    )
    assert response.status_code == 200
    summary = response.json()["responses"][0]
    assert summary["status"] == "error"
    assert summary["error"].startswith("ParameterError")
    assert "TOPSECRET" not in response.text
    assert "hunter2" not in response.text
