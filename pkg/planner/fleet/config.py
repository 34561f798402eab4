"""Scenario configuration loaded from JSON."""

import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..degradation.model import DegradationParams
from ..energy.types import EnergyGraph, VehicleParams
from ..errors import ParameterError, ParseError
from ..routing.demand import HourlyDemand
from ..routing.types import TransportRequest
from ..scheduling.evolution import DEParams
from ..scheduling.types import Horizon, Station, Vehicle

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


class TwoLevelTariff(BaseModel):
    """Night price from `night_start_hour` to `night_end_hour`, day price otherwise."""

    day: float = Field(..., ge=0.0)
    night: float = Field(..., ge=0.0)
    night_start_hour: float = Field(22.0, ge=0.0, lt=24.0)
    night_end_hour: float = Field(6.0, ge=0.0, lt=24.0)

    model_config = ConfigDict(extra="forbid", frozen=True)

    def series(self, horizon: Horizon) -> list[float]:
        prices = []
        for i in range(horizon.intervals):
            hour = (horizon.start_hour + i * horizon.interval_hours) % 24.0
            if self.night_start_hour > self.night_end_hour:
                night = hour >= self.night_start_hour or hour < self.night_end_hour
            else:
                night = self.night_start_hour <= hour < self.night_end_hour
            prices.append(self.night if night else self.day)
        return prices


class StationConfig(BaseModel):
    """A charging station; reroute figures default to the energy graph's values."""

    id: str
    node: str
    rate_kw: float = Field(..., gt=0.0)
    efficiency: float = Field(..., gt=0.0, le=1.0)
    tariff: TwoLevelTariff | list[float]
    availability: int | list[int] = 1
    reroute_intervals: int | None = Field(None, ge=0)
    reroute_kwh: float | None = Field(None, ge=0.0)
    allows_discharge: bool = False

    model_config = ConfigDict(extra="forbid", frozen=True)

    def to_station(self, horizon: Horizon, graph: EnergyGraph) -> Station:
        """Expand tariff and availability over the horizon."""
        tariff = (
            self.tariff.series(horizon)
            if isinstance(self.tariff, TwoLevelTariff)
            else list(self.tariff)
        )
        availability = (
            [self.availability] * horizon.intervals
            if isinstance(self.availability, int)
            else list(self.availability)
        )
        depot = graph.depot
        remote = self.node != depot
        intervals = self.reroute_intervals
        if intervals is None:
            travel = max(graph.time(depot, self.node), graph.time(self.node, depot))
            intervals = math.ceil(travel / horizon.interval_s) if remote else 0
        kwh = self.reroute_kwh
        if kwh is None:
            kwh = graph.energy(depot, self.node) + graph.energy(self.node, depot)
        return Station(
            id=self.id,
            rate_kw=self.rate_kw,
            efficiency=self.efficiency,
            tariff=tuple(tariff),
            availability=tuple(availability),
            reroute_intervals=intervals,
            reroute_kwh=kwh if intervals > 0 else 0.0,
            allows_discharge=self.allows_discharge,
        )


class SyntheticSegment(BaseModel):
    """A stretch of driving at a target speed, reached by a linear ramp."""

    duration_s: float = Field(..., gt=0.0)
    speed_mps: float = Field(..., ge=0.0)
    noise_sd: float = Field(0.0, ge=0.0)
    ramp_s: float = Field(0.0, ge=0.0)

    model_config = ConfigDict(extra="forbid", frozen=True)


class SyntheticLog(BaseModel):
    """Recipe for a generated GPS speed log."""

    segments: tuple[SyntheticSegment, ...] = Field(..., min_length=1)
    sample_rate: float = Field(100.0, gt=0.0)

    model_config = ConfigDict(extra="forbid", frozen=True)


class FilterSettings(BaseModel):
    """Conditioning of the scenario's GPS log."""

    profile_file: Path | None = None
    synthetic: SyntheticLog | None = None
    window: int = Field(21, gt=0)
    poly_order: int = Field(3, ge=0)
    process_var: float = Field(10.0, gt=0.0)
    meas_var: float = Field(1.0, gt=0.0)

    model_config = ConfigDict(extra="forbid", frozen=True)


class RoutingSettings(BaseModel):
    """Routing-instance constants and solver choice."""

    capacity: int = Field(4, gt=0)
    battery: float = Field(24.0, gt=0.0)
    e_min: float = Field(0.0, ge=0.0)
    big_m: float = Field(86400.0, gt=0.0)
    max_routes: int | None = Field(None, gt=0)
    max_route_duration_s: float | None = Field(None, gt=0.0)
    max_ride_s: float = Field(3600.0, ge=0.0)
    dwell_s: float = Field(0.0, ge=0.0)
    solver: Literal["exact", "heuristic"] = "exact"
    node_limit: int = Field(2_000_000, gt=0)
    time_limit_s: float = Field(60.0, gt=0.0)
    restarts: int = Field(8, ge=1)

    model_config = ConfigDict(extra="forbid", frozen=True)


class ScenarioConfig(BaseModel):
    """Everything one planning run needs.

    Supplying `energy_matrix` and `distance_matrix` selects case-study mode and
    skips the dynamics stage; otherwise `road_graph` is required.
    """

    name: str
    seed: int = Field(..., ge=0)
    energy_matrix: Path | None = None
    distance_matrix: Path | None = None
    average_speed_kmh: float = Field(30.0, gt=0.0)
    road_graph: Path | None = None
    node_set: list[str] | None = None
    depot: str
    vehicle: VehicleParams = VehicleParams()
    filter: FilterSettings = FilterSettings()
    routing: RoutingSettings = RoutingSettings()
    demand: HourlyDemand | None = None
    requests: list[TransportRequest] | None = None
    horizon: Horizon = Horizon(intervals=48)
    vehicles: list[Vehicle] = Field(..., min_length=1)
    stations: list[StationConfig] = Field(..., min_length=1)
    de: DEParams = DEParams()
    degradation: DegradationParams = DegradationParams()
    use_degradation: bool = True
    allow_discharge: bool = False
    clamp_regen: bool = False

    model_config = ConfigDict(extra="forbid", frozen=True)

    @model_validator(mode="after")
    def _sources(self) -> "ScenarioConfig":
        case_study = self.energy_matrix is not None or self.distance_matrix is not None
        if case_study and (self.energy_matrix is None or self.distance_matrix is None):
            raise ParameterError(
                "case-study mode needs both energy and distance matrices"
            )
        if not case_study and self.road_graph is None:
            raise ParameterError("a scenario needs a road graph or case-study matrices")
        if (self.demand is None) == (self.requests is None):
            raise ParameterError("give exactly one of demand and requests")
        return self

    @property
    def case_study(self) -> bool:
        return self.energy_matrix is not None

    def resolve_paths(self, base_dir: Path) -> "ScenarioConfig":
        """Copy with every relative file path anchored at `base_dir`."""

        def anchor(path: Path | None) -> Path | None:
            if path is None or path.is_absolute():
                return path
            return base_dir / path

        return self.model_copy(
            update={
                "energy_matrix": anchor(self.energy_matrix),
                "distance_matrix": anchor(self.distance_matrix),
                "road_graph": anchor(self.road_graph),
                "filter": self.filter.model_copy(
                    update={"profile_file": anchor(self.filter.profile_file)}
                ),
            }
        )

    def file_paths(self) -> list[Path]:
        """Every input file the scenario names."""
        paths = (
            self.energy_matrix,
            self.distance_matrix,
            self.road_graph,
            self.filter.profile_file,
        )
        return [p for p in paths if p is not None]

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return self.model_copy(
            update={"seed": seed, "de": self.de.model_copy(update={"seed": seed})}
        )

    def config_hash(self) -> str:
        """sha256 of the canonical JSON form."""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()


def load_scenario(path: str | Path) -> ScenarioConfig:
    """
    Parse a scenario file and anchor its relative paths at the file's directory.

    The DE seed follows the scenario seed.

    Raises:
        ParseError: If the file is missing, not JSON or not a valid scenario
        ParameterError: If the scenario names inconsistent data sources
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
        config = ScenarioConfig.model_validate(raw)
    except OSError as e:
        raise ParseError(str(e), path=str(path)) from e
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, path=str(path), line=e.lineno) from e
    except ValidationError as e:
        raise ParseError(f"invalid scenario: {e}", path=str(path)) from e
    logger.info(f"Loaded scenario {config.name} from {path}")
    return config.resolve_paths(path.parent).with_seed(config.seed)


def data_file(path: str | Path) -> Path:
    """
    Resolve a client-supplied path inside the shipped data directory.

    Absolute paths and `..` components are refused before anything is read.

    Raises:
        ParameterError: If the path would leave the data directory
    """
    path = Path(path)
    if path.is_absolute() or ".." in path.parts:
        raise ParameterError(
            f"{path.name!r} must be a relative path inside the data directory"
        )
    resolved = (DATA_DIR / path).resolve()
    if not resolved.is_relative_to(DATA_DIR):
        raise ParameterError(f"{path.name!r} is outside the data directory")
    return resolved


def confined_scenario(config: ScenarioConfig) -> ScenarioConfig:
    """
    Anchor an untrusted scenario's files in the data directory.

    Raises:
        ParameterError: If any file path is absolute or climbs out with `..`
    """
    for path in config.file_paths():
        data_file(path)
    return config.resolve_paths(DATA_DIR)


def shipped_scenario(name: str) -> Path:
    """Path of a scenario file shipped with the package."""
    if not name or Path(name).name != name or name.startswith("."):
        raise ParameterError(f"{name!r} is not a scenario name")
    path = DATA_DIR / f"{name}.json"
    if not path.exists():
        available = sorted(p.stem for p in DATA_DIR.glob("*.json"))
        raise ParameterError(f"no shipped scenario {name!r}; available: {available}")
    return path
