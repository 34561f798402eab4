"""Exception types shared across the planner."""

from typing import Any


class PlannerError(Exception):
    """Base class for every domain error raised by the planner.

    Not a ValueError: pydantic passes these through model validators unwrapped.
    """


class ParameterError(PlannerError):
    """A numeric parameter is outside its valid range."""


class PathError(PlannerError):
    """A vertex sequence uses an edge that is not in the road graph."""


class NoPathError(PlannerError):
    """The destination cannot be reached from the source."""


class ModelError(PlannerError):
    """The energy model is physically inconsistent (negative-energy cycle)."""


class InstanceError(PlannerError):
    """A routing instance is malformed or references an unknown vertex."""


class InfeasibleInstanceError(PlannerError):
    """No feasible route serves a request."""

    def __init__(self, message: str, request: int | None = None) -> None:
        super().__init__(message)
        self.request = request


class ScheduleError(PlannerError):
    """A schedule is structurally inconsistent with its instance."""


class InitializationError(PlannerError):
    """The evolutionary search could not seed a feasible population."""

    def __init__(self, message: str, diagnostics: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ParseError(PlannerError):
    """An input file could not be parsed."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        location = f"{path}:{line}" if path and line else path or ""
        super().__init__(f"{location}: {message}" if location else message)
        self.path = path
        self.line = line


class StageError(PlannerError):
    """A pipeline stage failed."""

    def __init__(self, stage: str, cause: Exception) -> None:
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
