"""CPU worker-pool preprocessing: M workers serving a FIFO queue."""

import heapq
import math
from collections import deque
from dataclasses import dataclass
from typing import Deque, List, Optional, Sequence, Tuple

from ..engine.events import SimTime
from ..engine.resources import Resource
from ..workload.request import Request
from .latency import LatencyModel


@dataclass(frozen=True)
class CpuPoolSpec:
    workers: int
    service_time: LatencyModel
    efficiency_cap: float = 1.0

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if not 0 < self.efficiency_cap <= 1:
            raise ValueError(f"efficiency_cap must be in (0, 1], got {self.efficiency_cap}")

    def occupancy(self, input_length: float) -> SimTime:
        """Time one worker is held: service time plus the stall that keeps utilization under the cap."""
        service = self.service_time(input_length)
        if service <= 0:
            raise ValueError(f"service_time must be > 0, got {service} for length {input_length}")
        return int(math.ceil(service / self.efficiency_cap - 1e-9))


class CpuPoolState:
    """Event-driven pool state: busy workers plus the FIFO of waiting requests."""

    def __init__(self, spec: CpuPoolSpec):
        self.spec = spec
        self.workers = Resource("cpu", spec.workers, efficiency=spec.efficiency_cap)
        self.waiting: Deque[Request] = deque()

    def _start(self, request: Request, now: SimTime) -> SimTime:
        self.workers.acquire(now)
        request.preproc_start = now
        return now + self.spec.occupancy(request.input_length)

    def finish(self, now: SimTime) -> Optional[Tuple[Request, SimTime]]:
        """Free one worker; if a request is waiting, start it and return (request, completion)."""
        self.workers.release(now)
        if self.waiting:
            request = self.waiting.popleft()
            return request, self._start(request, now)
        return None


def cpu_preprocess(request: Request, pool_state: CpuPoolState, now: SimTime) -> Optional[SimTime]:
    """
    Hand a request to the CPU pool.

    Returns:
        The PreprocDone time if a worker was free, otherwise None (the request
        waits FIFO and starts when CpuPoolState.finish frees a worker).
    """
    if request.preproc_done is not None:
        raise ValueError(f"request {request.id} is already preprocessed")
    if pool_state.workers.idle > 0 and not pool_state.waiting:
        return pool_state._start(request, now)
    pool_state.waiting.append(request)
    return None


def cpu_pool_schedule(ready_times: Sequence[SimTime], lengths: Sequence[float],
                      spec: CpuPoolSpec) -> List[SimTime]:
    """Closed-form FIFO M-server schedule: completion time of each job in submission order."""
    free_at = [0] * spec.workers
    heapq.heapify(free_at)
    completions = []
    for ready, length in zip(ready_times, lengths):
        start = max(ready, heapq.heappop(free_at))
        done = start + spec.occupancy(length)
        heapq.heappush(free_at, done)
        completions.append(done)
    return completions
