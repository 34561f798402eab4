"""Constraint-violation records returned by the route and schedule checkers."""

from pydantic import BaseModel


class Violation(BaseModel):
    """One violated constraint.

    `index` is the stop position for routes or the interval for schedules;
    `vehicle` is set for schedule violations that belong to one vehicle.
    """

    kind: str
    message: str
    index: int | None = None
    vehicle: int | None = None

    def __str__(self) -> str:
        where = []
        if self.vehicle is not None:
            where.append(f"vehicle {self.vehicle}")
        if self.index is not None:
            where.append(f"at {self.index}")
        suffix = f" ({', '.join(where)})" if where else ""
        return f"{self.kind}{suffix}: {self.message}"
