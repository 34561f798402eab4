"""GPS log ingestion, synthetic logs and road-graph loading."""

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from pydantic import ValidationError

from ..energy.types import RoadEdge, RoadGraph, RoadVertex, SpeedProfile
from ..errors import ParameterError, ParseError
from .config import SyntheticLog

logger = logging.getLogger(__name__)

GPS_COLUMNS = ["t_s", "v_mps"]


def ingest_gps(path: str | Path, sample_rate: float | None = None) -> SpeedProfile:
    """
    Read a GPS speed log with header `t_s,v_mps`.

    Args:
        path: CSV file, one sample per row
        sample_rate: Log rate in Hz; inferred from the median spacing when omitted

    Returns:
        The validated speed profile

    Raises:
        ParseError: With the file line of the first malformed, negative-speed or
            non-increasing row
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, skipinitialspace=True)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(str(e), path=str(path)) from e
    if list(frame.columns) != GPS_COLUMNS:
        raise ParseError(
            f"header must be {','.join(GPS_COLUMNS)}, got {','.join(frame.columns)}",
            path=str(path),
            line=1,
        )

    numeric = frame.apply(pd.to_numeric, errors="coerce")
    # file line = row index + 2 (header is line 1)
    bad = numeric.isna().any(axis=1) | ~np.isfinite(numeric.fillna(0)).all(axis=1)
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise ParseError(
            f"malformed row {frame.iloc[row].tolist()}", str(path), row + 2
        )

    times = numeric["t_s"].to_numpy(dtype=float)
    speeds = numeric["v_mps"].to_numpy(dtype=float)
    negative = np.flatnonzero(speeds < 0)
    if negative.size:
        row = int(negative[0])
        raise ParseError(f"negative speed {speeds[row]}", str(path), row + 2)
    if len(times) < 2:
        raise ParseError("a log needs at least 2 samples", path=str(path))
    backwards = np.flatnonzero(np.diff(times) <= 0)
    if backwards.size:
        row = int(backwards[0]) + 1
        raise ParseError(f"time {times[row]} does not increase", str(path), row + 2)

    rate = sample_rate or float(round(1.0 / float(np.median(np.diff(times))), 6))
    try:
        profile = SpeedProfile.from_arrays(times, speeds, rate)
    except (ParameterError, ValidationError) as e:
        raise ParseError(f"irregular sampling: {e}", path=str(path)) from e
    logger.debug(f"Ingested {len(times)} samples at {rate} Hz from {path}")
    return profile


def _synthetic_speeds(log: SyntheticLog) -> tuple[np.ndarray, np.ndarray]:
    rate = log.sample_rate
    clean: list[np.ndarray] = []
    noise_sd: list[np.ndarray] = []
    previous = 0.0
    for segment in log.segments:
        n = int(round(segment.duration_s * rate))
        t = np.arange(n) / rate
        if segment.ramp_s > 0:
            ramp = np.clip(t / segment.ramp_s, 0.0, 1.0)
            speeds = previous + (segment.speed_mps - previous) * ramp
        else:
            speeds = np.full(n, segment.speed_mps)
        clean.append(speeds)
        noise_sd.append(np.full(n, segment.noise_sd))
        previous = segment.speed_mps
    return np.concatenate(clean), np.concatenate(noise_sd)


def synth_gps(log: SyntheticLog, seed: int, noisy: bool = True) -> SpeedProfile:
    """
    Deterministic synthetic GPS log.

    Each segment holds its target speed after a linear ramp from the previous
    segment's speed (zero before the first). Gaussian noise with the segment's
    standard deviation is added per sample; negative speeds are clamped to zero.

    Args:
        log: Segment list and sample rate
        seed: Noise seed
        noisy: False returns the clean target profile

    Returns:
        round(duration * sample_rate) samples per segment
    """
    clean, sd = _synthetic_speeds(log)
    speeds = clean
    if noisy:
        rng = np.random.default_rng(seed)
        speeds = np.clip(clean + rng.normal(0.0, 1.0, clean.size) * sd, 0.0, None)
    times = np.arange(clean.size) / log.sample_rate
    return SpeedProfile.from_arrays(times, speeds, log.sample_rate)


def load_road_graph(path: str | Path, seed: int) -> RoadGraph:
    """
    Read a road graph JSON file.

    Edges carry either `profile_file` (a GPS log relative to the graph file) or a
    `synthetic` log recipe, generated with seed `seed + edge index`.

    Raises:
        ParseError: If the file cannot be read or an edge is malformed
        PathError: If an edge ends at a vertex the file does not declare
    """
    path = Path(path)
    try:
        raw: dict[str, Any] = json.loads(path.read_text())
    except OSError as e:
        raise ParseError(str(e), path=str(path)) from e
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, path=str(path), line=e.lineno) from e

    try:
        vertices = tuple(RoadVertex.model_validate(v) for v in raw["vertices"])
        edges = []
        for index, edge in enumerate(raw["edges"]):
            if "profile_file" in edge:
                profile = ingest_gps(path.parent / edge["profile_file"])
            elif "synthetic" in edge:
                log = SyntheticLog.model_validate(edge["synthetic"])
                profile = synth_gps(log, seed + index)
            else:
                raise ParseError(f"edge {index} has no profile", path=str(path))
            edges.append(
                RoadEdge(source=edge["from"], target=edge["to"], profile=profile)
            )
        return RoadGraph(vertices=vertices, edges=tuple(edges))
    except (KeyError, ValidationError) as e:
        raise ParseError(f"invalid road graph: {e}", path=str(path)) from e
