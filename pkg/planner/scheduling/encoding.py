"""Bit-vector encoding of schedules for the evolutionary search.

The vector is the charging block followed by the assignment block. The charging
block is vehicle-major, then interval, then station; every (vehicle, interval,
station) slot holds a charge bit, followed by a discharge bit when the station
accepts discharge. The assignment block is route-major: a[s][k] for every route
s and vehicle k.
"""

import numpy as np

from ..errors import ParameterError, ScheduleError
from ..violations import Violation
from .types import Schedule, ScheduleInstance


class SlotLayout:
    """Column meaning of one (vehicle, interval) block of the charging bits."""

    def __init__(self, instance: ScheduleInstance) -> None:
        stations: list[int] = []
        actions: list[int] = []
        for x in range(len(instance.stations)):
            stations.append(x)
            actions.append(1)
            if instance.discharge_slot(x):
                stations.append(x)
                actions.append(-1)
        self.width = len(stations)
        self.stations = np.array(stations, dtype=int)
        self.actions = np.array(actions, dtype=int)
        self.columns = {(x, u): c for c, (x, u) in enumerate(zip(stations, actions))}
        self.vehicles = len(instance.vehicles)
        self.intervals = instance.horizon.intervals
        self.routes = len(instance.tasks)

    @property
    def charging_bits(self) -> int:
        return self.vehicles * self.intervals * self.width

    @property
    def length(self) -> int:
        return self.charging_bits + self.routes * self.vehicles


def vector_length(instance: ScheduleInstance) -> int:
    """Number of bits m_v of an encoded schedule."""
    return SlotLayout(instance).length


def encode(
    schedule: Schedule, instance: ScheduleInstance, layout: SlotLayout | None = None
) -> np.ndarray:
    """
    Bit vector of a schedule.

    Raises:
        ScheduleError: If an action has no slot (discharge where it is not allowed)
    """
    layout = layout or SlotLayout(instance)
    assignment, actions, stations = schedule.arrays()
    block = np.zeros((layout.vehicles, layout.intervals, layout.width), dtype=np.uint8)
    for k, i in zip(*np.nonzero(actions)):
        column = layout.columns.get((int(stations[k, i]), int(actions[k, i])))
        if column is None:
            raise ScheduleError(
                f"action {actions[k, i]} at station {stations[k, i]} has no slot"
            )
        block[k, i, column] = 1
    routes = assignment.T.astype(np.uint8).reshape(-1)
    return np.concatenate([block.reshape(-1), routes])


def decode(
    bits: np.ndarray, instance: ScheduleInstance, layout: SlotLayout | None = None
) -> Schedule:
    """
    Schedule of a bit vector.

    Slots with more than one set bit keep their first set bit and are flagged as
    a structural violation; check_schedule reports them with the rest.

    Raises:
        ParameterError: If the vector length does not match the instance
    """
    layout = layout or SlotLayout(instance)
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape != (layout.length,):
        raise ParameterError(
            f"vector has {bits.size} bits, instance needs {layout.length}"
        )
    block = bits[: layout.charging_bits].reshape(
        layout.vehicles, layout.intervals, layout.width
    )
    counts = block.sum(axis=2)
    first = block.argmax(axis=2)
    actions = np.where(counts > 0, layout.actions[first], 0)
    stations = np.where(counts > 0, layout.stations[first], -1)
    assignment = bits[layout.charging_bits :].reshape(layout.routes, layout.vehicles).T

    violations = tuple(
        Violation(
            kind="multiple_actions",
            vehicle=int(k),
            index=int(i),
            message=f"{counts[k, i]} actions in one interval",
        )
        for k, i in zip(*np.nonzero(counts > 1))
    )
    return Schedule.from_arrays(assignment, actions, stations, violations)
