"""Pydantic models for API requests and responses."""

from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .fleet.config import ScenarioConfig
from .routing.types import EvrpInstance, EvrpSolution
from .scheduling.evolution import DEParams
from .scheduling.types import CostBreakdown, Schedule, ScheduleInstance


class RouteRequest(BaseModel):
    """A routing instance and the solver to run on it."""

    instance: EvrpInstance
    solver: Literal["exact", "heuristic"] = "exact"
    seed: int = Field(0, ge=0)
    node_limit: int = Field(2_000_000, gt=0)
    time_limit_s: float = Field(60.0, gt=0.0)

    model_config = ConfigDict(extra="forbid")


class ScheduleRequest(BaseModel):
    """A scheduling instance and the search settings."""

    instance: ScheduleInstance
    de: DEParams = DEParams()

    model_config = ConfigDict(extra="forbid")


class ScheduleResponse(BaseModel):
    status: str = "success"
    schedule: Schedule
    cost: CostBreakdown | None = None
    best_cost_series: list[float]


class ScenarioRun(BaseModel):
    """One scenario of a batch: a shipped name, a file path or an inline config.

    Paths, including the files an inline config names, are relative to the
    shipped data directory.
    """

    scenario: str | None = None
    path: Path | None = None
    config: ScenarioConfig | None = None
    seed: int | None = Field(None, ge=0)

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def _one_source(self) -> "ScenarioRun":
        given = [x for x in (self.scenario, self.path, self.config) if x is not None]
        if len(given) != 1:
            raise ValueError("give exactly one of scenario, path and config")
        return self

    @property
    def label(self) -> str:
        if self.config is not None:
            return self.config.name
        return str(self.scenario or self.path)


class MultipleScenariosRequest(BaseModel):
    runs: list[ScenarioRun] = Field(..., min_length=1, max_length=100)


class ScenarioSummary(BaseModel):
    """Headline figures of one scenario run, or the error that stopped it."""

    status: str = "success"
    scenario: str
    seed: int | None = None
    config_hash: str | None = None
    routes: int | None = None
    route_energy_kwh: float | None = None
    total_cost: float | None = None
    mean_dod: list[float] | None = None
    error: str | None = None
    stage: str | None = None


class MultipleScenariosResponse(BaseModel):
    responses: list[ScenarioSummary]


class EnergyMatrixResponse(BaseModel):
    nodes: list[str]
    depot: str
    energy_kwh: list[list[float]]
    time_s: list[list[float]]


class ErrorResponse(BaseModel):
    """Body of a 422 raised by a planner domain error."""

    status: str = "error"
    error: str
    message: str
    request: int | None = None
    diagnostics: dict[str, Any] | None = None
