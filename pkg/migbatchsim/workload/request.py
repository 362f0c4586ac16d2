from dataclasses import dataclass
from typing import Optional

from ..engine.events import SimTime

# Input length carried by vision requests. Images are fixed-size, so the
# value only has to be positive and identical across requests.
IMAGE_INPUT_LENGTH = 1.0

STAGE_ORDER = ("arrival", "preproc_start", "preproc_done", "batch_dispatched", "exec_start", "exec_done")


@dataclass(slots=True)
class Request:
    """One single-input inference query and its per-stage timestamps (microseconds)."""
    id: int
    arrival: SimTime
    input_length: float
    preproc_start: Optional[SimTime] = None
    preproc_done: Optional[SimTime] = None
    batch_dispatched: Optional[SimTime] = None
    exec_start: Optional[SimTime] = None
    exec_done: Optional[SimTime] = None
    bucket: int = -1
    batch_id: int = -1
    batch_size: int = 0

    def __post_init__(self):
        if self.input_length <= 0:
            raise ValueError(f"request {self.id}: input_length must be > 0, got {self.input_length}")

    @property
    def completed(self) -> bool:
        return self.exec_done is not None

    @property
    def latency(self) -> SimTime:
        return self.exec_done - self.arrival

    def timestamps_ordered(self) -> bool:
        """True when the stamps set so far are non-decreasing in pipeline order."""
        stamps = [getattr(self, name) for name in STAGE_ORDER]
        present = [s for s in stamps if s is not None]
        return all(a <= b for a, b in zip(present, present[1:]))
