import math
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, List, Optional

from ..engine.events import SimTime
from ..workload.request import Request


def bucket_index(length: float, width: float) -> int:
    """floor(length / width) over half-open buckets; an infinite width maps everything to bucket 0."""
    if length <= 0:
        raise ValueError(f"length must be > 0, got {length}")
    if width <= 0:
        raise ValueError(f"bucket width must be > 0, got {width}")
    if math.isinf(width):
        return 0
    return int(math.floor(length / width))


@dataclass
class BucketQueue:
    index: int
    low: float
    high: float
    batch_max: int
    pending: Deque[Request] = field(default_factory=deque)
    timer_id: Optional[int] = None
    timer_time: Optional[SimTime] = None

    def __len__(self):
        return len(self.pending)

    @property
    def oldest_ready(self) -> Optional[SimTime]:
        return self.pending[0].preproc_done if self.pending else None

    def take(self, count: int) -> List[Request]:
        return [self.pending.popleft() for _ in range(min(count, len(self.pending)))]


@dataclass
class Batch:
    id: int
    members: List[Request]
    dispatch_time: SimTime
    bucket: int      # bucket of the longest member, which sets the cap
    trigger: str     # "size" | "timeout" | "feed"

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def longest_length(self) -> float:
        return max(r.input_length for r in self.members)
