"""Minimum-energy paths over the road network and the simplified energy graph."""

import logging
import math
from pathlib import Path
from typing import Iterable, Literal, Sequence

import networkx as nx
import numpy as np
import pandas as pd

from ..errors import ModelError, NoPathError, ParameterError, ParseError, PathError
from .dynamics import edge_energy
from .types import EnergyEdge, EnergyGraph, RoadGraph, VehicleParams

logger = logging.getLogger(__name__)

KMH_TO_MPS = 1000.0 / 3600.0


def energy_digraph(
    graph: RoadGraph, params: VehicleParams, clamp_regen: bool = False
) -> nx.DiGraph:
    """Directed graph with `energy` (kWh), `time` (s) and `length` (m) per edge."""
    digraph = nx.DiGraph()
    for vertex in graph.vertices:
        digraph.add_node(vertex.id, z=vertex.z_m)
    elevation = {v.id: v.z_m for v in graph.vertices}
    for edge in graph.edges:
        delta_z = elevation[edge.target] - elevation[edge.source]
        digraph.add_edge(
            edge.source,
            edge.target,
            energy=edge_energy(params, edge.profile, delta_z, clamp_regen),
            time=edge.profile.duration,
            length=edge.profile.distance,
        )
    return digraph


def path_energy(
    graph: RoadGraph,
    params: VehicleParams,
    path: Sequence[str],
    clamp_regen: bool = False,
) -> float:
    """
    Energy in kWh to drive along a vertex sequence.

    Raises:
        PathError: If two consecutive vertices are not joined by an edge
    """
    elevation = {v.id: v.z_m for v in graph.vertices}
    total = 0.0
    for source, target in zip(path, path[1:]):
        edge = graph.edge(source, target)
        total += edge_energy(
            params, edge.profile, elevation[target] - elevation[source], clamp_regen
        )
    return total


def _check_no_negative_cycle(digraph: nx.DiGraph) -> None:
    if nx.negative_edge_cycle(digraph, weight="energy"):
        raise ModelError(
            "road graph has a negative-energy cycle; check elevations and profiles"
        )


def _bellman_ford(
    digraph: nx.DiGraph, src: str, dst: str
) -> tuple[list[str], float]:
    if src not in digraph or dst not in digraph:
        raise PathError(f"unknown vertex in ({src!r}, {dst!r})")
    if src == dst:
        return [], 0.0
    try:
        length, path = nx.single_source_bellman_ford(
            digraph, src, target=dst, weight="energy"
        )
    except nx.NetworkXUnbounded as e:
        raise ModelError(f"negative-energy cycle reachable from {src!r}") from e
    except nx.NetworkXNoPath as e:
        raise NoPathError(f"{dst!r} is unreachable from {src!r}") from e
    return list(path), float(length)


def min_energy_path(
    graph: RoadGraph,
    params: VehicleParams,
    src: str,
    dst: str,
    clamp_regen: bool = False,
) -> tuple[list[str], float]:
    """
    Cheapest path in energy between two vertices.

    Uses Bellman-Ford label correction because downhill sections can have negative
    energy. A negative-energy cycle is a data error, not something to route around.

    Returns:
        The vertex sequence (empty when src == dst) and its energy in kWh
    """
    digraph = energy_digraph(graph, params, clamp_regen)
    _check_no_negative_cycle(digraph)
    return _bellman_ford(digraph, src, dst)


def build_energy_graph(
    graph: RoadGraph,
    params: VehicleParams,
    node_set: Sequence[str],
    depot: str | None = None,
    stations: Iterable[str] = (),
    speed_for_time: Literal["profile"] | float = "profile",
    clamp_regen: bool = False,
) -> EnergyGraph:
    """
    All-pairs minimum-energy graph among a subset of road vertices.

    Args:
        graph: The road network
        params: Vehicle parameters
        node_set: Vertices kept in the simplified graph
        depot: Depot vertex (defaults to the first node)
        stations: Vertices hosting charging stations
        speed_for_time: "profile" to sum the profile durations along each path, or
            an average speed in km/h to derive times from path lengths
        clamp_regen: Ignore recovered energy when computing edge energies

    Returns:
        The simplified energy graph
    """
    missing = [n for n in node_set if n not in {v.id for v in graph.vertices}]
    if missing:
        raise PathError(f"nodes not in road graph: {missing}")
    if speed_for_time != "profile" and float(speed_for_time) <= 0:
        raise ParameterError("average speed must be positive")

    digraph = energy_digraph(graph, params, clamp_regen)
    _check_no_negative_cycle(digraph)

    edges: dict[str, dict[str, EnergyEdge]] = {}
    for i in node_set:
        edges[i] = {}
        for j in node_set:
            if i == j:
                continue
            path, energy = _bellman_ford(digraph, i, j)
            legs = list(zip(path, path[1:]))
            if speed_for_time == "profile":
                time_s = math.fsum(digraph.edges[u, v]["time"] for u, v in legs)
            else:
                length = math.fsum(digraph.edges[u, v]["length"] for u, v in legs)
                time_s = length / (float(speed_for_time) * KMH_TO_MPS)
            edges[i][j] = EnergyEdge(energy_kwh=energy, time_s=time_s, path=tuple(path))

    logger.info(f"Built energy graph over {len(node_set)} nodes")
    return EnergyGraph(
        nodes=tuple(node_set),
        depot=depot if depot is not None else node_set[0],
        stations=tuple(stations),
        edges=edges,
    )


def energy_graph_from_matrices(
    nodes: Sequence[str],
    energy_kwh: Sequence[Sequence[float]],
    distance_km: Sequence[Sequence[float]],
    average_speed_kmh: float,
    depot: str,
    stations: Iterable[str] = (),
) -> EnergyGraph:
    """
    Energy graph straight from published matrices (case-study mode).

    Travel times are distance / average speed.
    """
    if average_speed_kmh <= 0:
        raise ParameterError("average speed must be positive")
    edges: dict[str, dict[str, EnergyEdge]] = {}
    for a, i in enumerate(nodes):
        edges[i] = {}
        for b, j in enumerate(nodes):
            if i == j:
                continue
            edges[i][j] = EnergyEdge(
                energy_kwh=float(energy_kwh[a][b]),
                time_s=float(distance_km[a][b]) / average_speed_kmh * 3600.0,
                path=(i, j),
            )
    return EnergyGraph(
        nodes=tuple(nodes), depot=depot, stations=tuple(stations), edges=edges
    )


def load_matrix_csv(path: str | Path) -> tuple[list[str], list[list[float]]]:
    """
    Read a square node-labelled matrix (distance in km or energy in kWh).

    The first row and the first column carry node names in the same order.
    """
    try:
        frame = pd.read_csv(path, index_col=0)
    except OSError as e:
        raise ParseError(e.strerror or "cannot be read", path=str(path)) from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ParseError("not a CSV matrix", path=str(path)) from e
    rows = [str(n) for n in frame.index]
    cols = [str(c) for c in frame.columns]
    if rows != cols:
        raise ParseError("row labels differ from column labels", path=str(path))
    try:
        values = frame.to_numpy(dtype=float)
    except ValueError as e:
        raise ParseError("matrix holds a non-numeric cell", path=str(path)) from e
    if not np.all(np.isfinite(values)):
        raise ParseError("matrix holds non-finite cells", path=str(path))
    return rows, values.tolist()
