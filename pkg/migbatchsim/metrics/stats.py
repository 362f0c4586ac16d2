import math
from typing import Protocol, Sequence, Union

import numpy as np

from ..engine.events import SimTime


class BusyTracked(Protocol):
    capacity: int

    def busy_time(self, start: SimTime, end: SimTime) -> float: ...


def percentile(samples: Union[Sequence[float], np.ndarray], p: float) -> float:
    """
    Nearest-rank percentile: the ceil(p/100 * n)-th smallest sample.

    Raises:
        ValueError: If samples is empty or p is outside (0, 100)
    """
    values = np.asarray(samples)
    if values.size == 0:
        raise ValueError("percentile of an empty sample set")
    if not 0 < p < 100:
        raise ValueError(f"p must be in (0, 100), got {p}")
    rank = max(1, math.ceil(p * values.size / 100 - 1e-9))
    return np.partition(values, rank - 1)[rank - 1].item()


def utilization(resource: BusyTracked, start: SimTime, end: SimTime) -> float:
    """Busy-time integral over [start, end) divided by capacity x window."""
    if end <= start:
        raise ValueError(f"utilization window must be positive, got [{start}, {end})")
    if resource.capacity == 0:
        return 0.0
    value = resource.busy_time(start, end) / (resource.capacity * (end - start))
    return float(min(1.0, max(0.0, value)))
