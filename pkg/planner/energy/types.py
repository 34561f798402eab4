"""Domain types for speed profiles, vehicles and energy graphs."""

import math
from typing import Any

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..errors import ParameterError, PathError

SPACING_TOLERANCE_S = 1e-9


class SpeedSample(BaseModel):
    """One speed reading, `t` seconds after the section start."""

    t: float = Field(..., ge=0.0)
    v: float = Field(..., ge=0.0)

    model_config = ConfigDict(frozen=True)


class SpeedProfile(BaseModel):
    """Uniformly sampled ground speed over one road section."""

    samples: tuple[SpeedSample, ...]
    sample_rate: float = Field(..., gt=0.0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_sampling(self) -> "SpeedProfile":
        if len(self.samples) < 2:
            raise ParameterError("a speed profile needs at least 2 samples")
        times = np.array([s.t for s in self.samples])
        steps = np.diff(times)
        if np.any(steps <= 0):
            raise ParameterError("sample times must be strictly increasing")
        if np.max(np.abs(steps - 1.0 / self.sample_rate)) > SPACING_TOLERANCE_S:
            raise ParameterError(
                f"sample spacing deviates from 1/{self.sample_rate} s by more than "
                f"{SPACING_TOLERANCE_S} s"
            )
        return self

    @classmethod
    def from_arrays(
        cls, times: Any, speeds: Any, sample_rate: float
    ) -> "SpeedProfile":
        """Build a profile from parallel time and speed arrays."""
        samples = tuple(
            SpeedSample(t=float(t), v=float(v))
            for t, v in zip(times, speeds, strict=True)
        )
        return cls(samples=samples, sample_rate=sample_rate)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples], dtype=float)

    @property
    def speeds(self) -> np.ndarray:
        return np.array([s.v for s in self.samples], dtype=float)

    @property
    def duration(self) -> float:
        """Elapsed seconds between the first and the last sample."""
        return self.samples[-1].t - self.samples[0].t

    @property
    def distance(self) -> float:
        """Distance covered in meters (trapezoidal integral of speed)."""
        speeds = self.speeds
        return float(np.sum((speeds[1:] + speeds[:-1]) * 0.5 / self.sample_rate))

    def with_speeds(self, speeds: Any) -> "SpeedProfile":
        """Same timestamps, new speed values."""
        return SpeedProfile.from_arrays(self.times, speeds, self.sample_rate)


class VehicleParams(BaseModel):
    """Longitudinal-dynamics parameters of a vehicle.

    Defaults describe the airport shuttle of the case study. Air density is the
    sea-level value; high-altitude scenarios should override it.
    """

    mass: float = Field(1312.0, gt=0.0, description="kg")
    frontal_area: float = Field(1.86, gt=0.0, description="m²")
    drag_coeff: float = Field(0.32, gt=0.0)
    rolling_coeff: float = Field(0.0117, gt=0.0)
    powertrain_eff: float = Field(0.9, gt=0.0, le=1.0)
    air_density: float = Field(1.225, gt=0.0, description="kg/m³")
    gravity: float = Field(9.81, gt=0.0, description="m/s²")

    model_config = ConfigDict(extra="forbid", frozen=True)


class RoadVertex(BaseModel):
    """A key-point of the street map with its elevation."""

    id: str
    z_m: float

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _finite_elevation(self) -> "RoadVertex":
        if not math.isfinite(self.z_m):
            raise ParameterError(f"vertex {self.id} has a non-finite elevation")
        return self


class RoadEdge(BaseModel):
    """A directed road section with its representative speed profile."""

    source: str = Field(..., alias="from")
    target: str = Field(..., alias="to")
    profile: SpeedProfile

    model_config = ConfigDict(frozen=True, populate_by_name=True)


class RoadGraph(BaseModel):
    """Directed road network with elevations and per-edge speed profiles."""

    vertices: tuple[RoadVertex, ...]
    edges: tuple[RoadEdge, ...]

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _endpoints_exist(self) -> "RoadGraph":
        ids = {v.id for v in self.vertices}
        if len(ids) != len(self.vertices):
            raise ParameterError("duplicate vertex ids in road graph")
        for edge in self.edges:
            for end in (edge.source, edge.target):
                if end not in ids:
                    raise PathError(f"edge endpoint {end!r} is not a vertex")
        return self

    def elevation(self, vertex: str) -> float:
        for v in self.vertices:
            if v.id == vertex:
                return v.z_m
        raise PathError(f"unknown vertex {vertex!r}")

    def edge(self, source: str, target: str) -> RoadEdge:
        for e in self.edges:
            if e.source == source and e.target == target:
                return e
        raise PathError(f"no edge {source!r} -> {target!r}")


class EnergyEdge(BaseModel):
    """Minimum-energy connection between two nodes of the energy graph."""

    energy_kwh: float
    time_s: float = Field(..., ge=0.0)
    path: tuple[str, ...] = ()

    model_config = ConfigDict(frozen=True)


class EnergyGraph(BaseModel):
    """Simplified graph over depot, client and station nodes.

    `edges[i][j]` holds the energy and travel time of the cheapest road path from
    node i to node j. The depot is a single physical node that acts as both start
    and end of every route.
    """

    nodes: tuple[str, ...]
    depot: str
    stations: tuple[str, ...] = ()
    edges: dict[str, dict[str, EnergyEdge]]

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _complete(self) -> "EnergyGraph":
        if self.depot not in self.nodes:
            raise ParameterError(f"depot {self.depot!r} is not a node")
        for station in self.stations:
            if station not in self.nodes:
                raise ParameterError(f"station {station!r} is not a node")
        for i in self.nodes:
            for j in self.nodes:
                if i == j:
                    continue
                edge = self.edges.get(i, {}).get(j)
                if edge is None:
                    raise ParameterError(f"energy graph misses edge {i!r} -> {j!r}")
                if not math.isfinite(edge.energy_kwh):
                    raise ParameterError(f"energy of {i!r} -> {j!r} is not finite")
        return self

    def _edge(self, i: str, j: str) -> EnergyEdge | None:
        if i == j:
            return None
        try:
            return self.edges[i][j]
        except KeyError as e:
            raise PathError(f"no energy edge {i!r} -> {j!r}") from e

    def energy(self, i: str, j: str) -> float:
        edge = self._edge(i, j)
        return 0.0 if edge is None else edge.energy_kwh

    def time(self, i: str, j: str) -> float:
        edge = self._edge(i, j)
        return 0.0 if edge is None else edge.time_s

    def path(self, i: str, j: str) -> tuple[str, ...]:
        edge = self._edge(i, j)
        return (i,) if edge is None else edge.path

    def energy_matrix(self) -> list[list[float]]:
        return [[self.energy(i, j) for j in self.nodes] for i in self.nodes]

    def time_matrix(self) -> list[list[float]]:
        return [[self.time(i, j) for j in self.nodes] for i in self.nodes]

    def to_frames(self) -> tuple[pd.DataFrame, pd.DataFrame]:
        """Energy (kWh) and time (s) matrices labelled by node."""
        labels = list(self.nodes)
        energy = pd.DataFrame(self.energy_matrix(), index=labels, columns=labels)
        time = pd.DataFrame(self.time_matrix(), index=labels, columns=labels)
        return energy, time
