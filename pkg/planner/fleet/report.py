"""Report artifacts written to an output directory."""

import json
import logging
from pathlib import Path
from typing import Any

import pandas as pd
from pydantic import ValidationError

from ..errors import ParseError
from ..scheduling.soc import simulate_soc
from ..scheduling.types import Schedule, ScheduleInstance
from .pipeline import RunReport

logger = logging.getLogger(__name__)

ASSIGNMENT_COLUMNS = ["route", "vehicle", "start", "end", "energy_kwh"]
CONVERGENCE_COLUMNS = ["generation", "best_cost"]
COST_COLUMNS = ["scope", "item", "value"]
FILTER_COLUMNS = [
    "raw_rms",
    "savgol_rms",
    "kalman_rms",
    "savgol_window",
    "savgol_order",
    "process_var",
    "meas_var",
]
ARTIFACTS = (
    "solution.json",
    "schedule.json",
    "energy_matrix.csv",
    "time_matrix.csv",
    "assignment.csv",
    "actions.csv",
    "soc_trace.csv",
    "cost_breakdown.csv",
    "convergence.csv",
    "filter_comparison.csv",
    "summary.txt",
)


def _write_json(path: Path, payload: Any) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, rows: list[dict[str, Any]], columns: list[str]) -> None:
    pd.DataFrame(rows, columns=columns).to_csv(path, index=False, lineterminator="\n")


def _solution_payload(report: RunReport) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "scenario": report.scenario,
        "seed": report.seed,
        "config_hash": report.config_hash,
        "solution": None,
    }
    if report.solution is not None:
        payload["solution"] = report.solution.model_dump(mode="json")
    return payload


def _schedule_payload(report: RunReport) -> dict[str, Any]:
    if report.schedule_instance is None or report.de_result is None:
        return {"instance": None, "schedule": None}
    schedule = report.de_result.schedule
    return {
        "instance": report.schedule_instance.model_dump(mode="json"),
        "schedule": schedule.model_dump(
            mode="json", include={"assignment", "actions", "action_stations"}
        ),
    }


def _matrix_frames(report: RunReport) -> tuple[pd.DataFrame, pd.DataFrame]:
    if report.energy_graph is None:
        return pd.DataFrame(columns=["node"]), pd.DataFrame(columns=["node"])
    energy, times = report.energy_graph.to_frames()
    return energy.rename_axis("node"), times.rename_axis("node")


def _schedule_tables(
    report: RunReport,
) -> tuple[list[dict[str, Any]], list[dict[str, Any]], list[dict[str, Any]]]:
    """Rows of assignment.csv, actions.csv and soc_trace.csv."""
    instance = report.schedule_instance
    if instance is None or report.de_result is None:
        return [], [], []
    schedule = report.de_result.schedule
    horizon = instance.horizon
    vehicles = [v.id for v in instance.vehicles]

    assignment = []
    for s, task in enumerate(instance.tasks):
        owner = schedule.vehicle_of(s)
        assignment.append(
            {
                "route": task.route_id,
                "vehicle": vehicles[owner] if owner is not None else "",
                "start": horizon.clock(task.start),
                "end": horizon.clock(task.end + 1),
                "energy_kwh": round(task.total_energy, 6),
            }
        )

    actions = []
    for i in range(horizon.intervals):
        row: dict[str, Any] = {"interval": i, "clock": horizon.clock(i)}
        for k, vehicle in enumerate(vehicles):
            x = schedule.action_stations[k][i]
            row[f"{vehicle}_action"] = schedule.actions[k][i]
            row[f"{vehicle}_station"] = instance.stations[x].id if x >= 0 else ""
        actions.append(row)

    trace = simulate_soc(instance, schedule)
    soc = []
    for i in range(horizon.intervals + 1):
        row = {"boundary": i, "clock": horizon.clock(i)}
        for k, vehicle in enumerate(vehicles):
            row[f"{vehicle}_soc_kwh"] = round(trace.levels[k][i], 6)
        soc.append(row)
    return assignment, actions, soc


def _cost_rows(report: RunReport) -> list[dict[str, Any]]:
    rows: list[dict[str, Any]] = []
    if report.de_result is not None and report.de_result.schedule.cost is not None:
        cost = report.de_result.schedule.cost
        for item in ("tariff", "revenue", "degradation", "total"):
            rows.append({"scope": "fleet", "item": item, "value": getattr(cost, item)})
    if report.schedule_instance is not None:
        vehicles = [v.id for v in report.schedule_instance.vehicles]
        for vehicle, wear in zip(vehicles, report.degradation, strict=False):
            items = {
                "temperature_loss": wear.temperature_loss,
                "soc_loss": wear.soc_loss,
                "dod_loss": wear.dod_loss,
                "soc_avg": wear.soc_avg,
                "subcycles": wear.subcycles.count,
                "dod_avg": wear.subcycles.dod_avg,
                "implied_cycle_life": wear.implied_cycle_life,
                "cost": wear.cost,
            }
            rows.extend(
                {"scope": vehicle, "item": k, "value": v} for k, v in items.items()
            )
    return rows


def _summary(report: RunReport) -> str:
    lines = [
        f"scenario: {report.scenario}",
        f"seed: {report.seed}",
        f"config_hash: {report.config_hash}",
        f"stages: {', '.join(report.stages)}",
    ]
    if report.solution is not None:
        lines += [
            f"routes: {len(report.solution.routes)} ({report.solution.status})",
            f"route_energy_kwh: {report.solution.total_energy:.6f}",
        ]
    if report.passenger_revenue:
        lines.append(f"passenger_revenue: {report.passenger_revenue:.2f}")
    if report.de_result is not None:
        result = report.de_result
        cost = result.schedule.cost
        lines += [
            f"vector_length: {result.vector_length}",
            f"population_size: {result.population_size}",
            f"generations: {len(result.best_cost_series) - 1}",
            f"greedy_won: {result.greedy_won}",
        ]
        if cost is not None:
            lines += [
                f"tariff_cost: {cost.tariff:.6f}",
                f"discharge_revenue: {cost.revenue:.6f}",
                f"degradation_cost: {cost.degradation:.6f}",
                f"total_cost: {cost.total:.6f}",
            ]
    for k, wear in enumerate(report.degradation):
        lines.append(
            f"vehicle {k}: {wear.subcycles.count} subcycles, "
            f"mean DOD {wear.subcycles.dod_avg:.4f}, "
            f"implied cycle life {wear.implied_cycle_life:.0f}"
        )
    return "\n".join(lines) + "\n"


def emit_report(report: RunReport, out_dir: str | Path) -> list[Path]:
    """
    Write every report artifact to `out_dir`.

    Stages that did not run leave header-only CSVs and null JSON sections.
    Content depends only on the report's outputs, never on timings.

    Args:
        report: The run report
        out_dir: Target directory, created when missing

    Returns:
        Paths of the written files

    Raises:
        OSError: If the directory cannot be written
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    _write_json(out / "solution.json", _solution_payload(report))
    _write_json(out / "schedule.json", _schedule_payload(report))

    energy, times = _matrix_frames(report)
    energy.to_csv(out / "energy_matrix.csv", lineterminator="\n")
    times.to_csv(out / "time_matrix.csv", lineterminator="\n")

    assignment, actions, soc = _schedule_tables(report)
    _write_csv(out / "assignment.csv", assignment, ASSIGNMENT_COLUMNS)
    action_columns = list(actions[0]) if actions else ["interval", "clock"]
    _write_csv(out / "actions.csv", actions, action_columns)
    soc_columns = list(soc[0]) if soc else ["boundary", "clock"]
    _write_csv(out / "soc_trace.csv", soc, soc_columns)
    _write_csv(out / "cost_breakdown.csv", _cost_rows(report), COST_COLUMNS)

    convergence = []
    if report.de_result is not None:
        convergence = [
            {"generation": g, "best_cost": cost}
            for g, cost in enumerate(report.de_result.best_cost_series)
        ]
    _write_csv(out / "convergence.csv", convergence, CONVERGENCE_COLUMNS)

    comparison = (
        [report.filter_comparison.model_dump()]
        if report.filter_comparison is not None
        else []
    )
    _write_csv(out / "filter_comparison.csv", comparison, FILTER_COLUMNS)

    (out / "summary.txt").write_text(_summary(report))
    logger.info(f"Wrote {len(ARTIFACTS)} artifacts to {out}")
    return [out / name for name in ARTIFACTS]


def load_schedule(path: str | Path) -> tuple[ScheduleInstance, Schedule]:
    """
    Re-load the instance and schedule from an emitted `schedule.json`.

    Raises:
        ParseError: If the file is missing, malformed or holds no schedule
    """
    path = Path(path)
    if path.is_dir():
        path = path / "schedule.json"
    try:
        raw = json.loads(path.read_text())
    except OSError as e:
        raise ParseError(str(e), path=str(path)) from e
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, path=str(path), line=e.lineno) from e
    if not raw.get("instance") or not raw.get("schedule"):
        raise ParseError("report holds no schedule", path=str(path))
    try:
        instance = ScheduleInstance.model_validate(raw["instance"])
        schedule = Schedule.model_validate(raw["schedule"])
    except ValidationError as e:
        raise ParseError(f"invalid schedule: {e}", path=str(path)) from e
    return instance, schedule
