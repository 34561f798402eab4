"""Command-line entry point: `fleet-planner <command>`."""

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from . import __version__
from .config import environment, load_environment, out_dir
from .errors import PlannerError, StageError
from .fleet.config import ScenarioConfig, load_scenario, shipped_scenario
from .fleet.pipeline import Stage, run_scenario
from .fleet.report import emit_report, load_schedule
from .logging.setup import initialize_logfire
from .scheduling.constraints import check_schedule

logger = logging.getLogger(__name__)

COMMAND_STAGES: dict[str, Stage] = {
    "filter": "filter",
    "energy-matrix": "energy",
    "route": "routing",
    "schedule": "scheduling",
    "report": "degradation",
    "demo-case-study": "degradation",
}
SCENARIOS = {f"sc{i}": f"case_study_sc{i}" for i in range(1, 5)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fleet-planner",
        description="Energy-aware routing and charge scheduling for an EV fleet",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", type=Path, help="scenario JSON file")
    parser.add_argument("--seed", type=int, help="override the scenario seed")
    parser.add_argument(
        "--out-dir",
        default="out",
        help="artifact directory (FLEET_PLANNER_OUT_DIR takes precedence)",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("filter", help="smooth the scenario GPS log and score filters")
    commands.add_parser("energy-matrix", help="build the minimum-energy node graph")
    commands.add_parser("route", help="solve the routing problem")
    commands.add_parser("schedule", help="assign routes and schedule charging")
    report = commands.add_parser("report", help="run the whole pipeline")
    report.add_argument(
        "--validate",
        type=Path,
        metavar="DIR",
        help="re-check the schedule of an emitted report instead of running",
    )
    demo = commands.add_parser("demo-case-study", help="run a shipped case study")
    demo.add_argument("--scenario", choices=sorted(SCENARIOS), default="sc1")
    return parser


def _scenario(args: argparse.Namespace) -> ScenarioConfig:
    if args.command == "demo-case-study":
        config = load_scenario(shipped_scenario(SCENARIOS[args.scenario]))
    elif args.config is None:
        raise PlannerError(f"{args.command} needs --config")
    else:
        config = load_scenario(args.config)
    return config.with_seed(args.seed) if args.seed is not None else config


def _validate(directory: Path) -> dict[str, object]:
    instance, schedule = load_schedule(directory)
    violations = check_schedule(schedule, instance)
    return {
        "status": "ok" if not violations else "invalid",
        "violations": [str(v) for v in violations],
    }


def _error(e: Exception) -> dict[str, object]:
    cause = e.cause if isinstance(e, StageError) else e
    return {
        "status": "error",
        "error": type(cause).__name__,
        "stage": e.stage if isinstance(e, StageError) else None,
        "message": str(cause),
    }


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command; errors go to stderr as a JSON object and exit code 1."""
    args = build_parser().parse_args(argv)
    load_environment()
    initialize_logfire(environment=environment())
    try:
        if args.command == "report" and args.validate is not None:
            outcome = _validate(args.validate)
            print(json.dumps(outcome, indent=2))
            return 0 if outcome["status"] == "ok" else 1

        config = _scenario(args)
        report = run_scenario(config, until=COMMAND_STAGES[args.command])
        target = out_dir(args.out_dir)
        files = emit_report(report, target)
    except (PlannerError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(json.dumps(_error(e)), file=sys.stderr)
        return 1

    print(
        json.dumps(
            {
                "status": "ok",
                "scenario": report.scenario,
                "stages": list(report.stages),
                "out_dir": str(target),
                "files": [f.name for f in files],
            },
            indent=2,
        )
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
