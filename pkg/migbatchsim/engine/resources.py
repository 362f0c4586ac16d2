from typing import List, Tuple

import numpy as np

from ..utils.errors import SimulationError
from .events import SimTime


class Resource:
    """
    A pool of identical servers (vGPUs, CPU workers, ...).

    Occupancy changes only through acquire/release. Every change is logged
    as a (time, busy) step so busy time can be integrated over any window.

    Args:
        resource_id: Name used in reports ("vgpu", "cpu", ...)
        capacity: Number of parallel servers
        efficiency: Share of occupied time that counts as productive work
    """

    def __init__(self, resource_id: str, capacity: int, efficiency: float = 1.0):
        if capacity < 1:
            raise ValueError(f"resource {resource_id!r} needs capacity >= 1, got {capacity}")
        self.id = resource_id
        self.capacity = capacity
        self.efficiency = efficiency
        self.busy = 0
        self._steps: List[Tuple[SimTime, int]] = [(0, 0)]

    @property
    def idle(self) -> int:
        return self.capacity - self.busy

    def _record(self, now: SimTime) -> None:
        if now < self._steps[-1][0]:
            raise SimulationError(f"{self.id}: occupancy change at {now} before {self._steps[-1][0]}")
        if self._steps[-1][0] == now:
            self._steps[-1] = (now, self.busy)
        else:
            self._steps.append((now, self.busy))

    def acquire(self, now: SimTime) -> None:
        if self.busy >= self.capacity:
            raise SimulationError(f"{self.id}: acquire with all {self.capacity} servers busy")
        self.busy += 1
        self._record(now)

    def release(self, now: SimTime) -> None:
        if self.busy <= 0:
            raise SimulationError(f"{self.id}: release with no busy server")
        self.busy -= 1
        self._record(now)

    def busy_time(self, start: SimTime, end: SimTime) -> float:
        """Integral of productive occupancy over [start, end), in server-microseconds."""
        if end <= start:
            return 0.0
        times = np.array([t for t, _ in self._steps] + [max(end, self._steps[-1][0])], dtype=np.int64)
        levels = np.array([b for _, b in self._steps], dtype=np.float64)
        lo = np.clip(times[:-1], start, end)
        hi = np.clip(times[1:], start, end)
        return float(np.sum(levels * (hi - lo))) * self.efficiency
