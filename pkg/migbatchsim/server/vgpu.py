from collections import deque
from dataclasses import dataclass
from typing import Callable, Deque, Dict, List, Optional, Tuple

from ..batching.buckets import Batch
from ..engine.events import EventKind, SimTime
from ..engine.loop import Engine
from ..engine.resources import Resource
from ..tuning.profile import ModelProfile, exec_latency
from ..utils.errors import SimulationError
from ..utils.logging import get_logger

logger = get_logger(__name__)


@dataclass
class VGpu:
    id: int
    busy_until: Optional[SimTime] = None
    current: Optional[int] = None
    executed_batches: int = 0

    @property
    def idle(self) -> bool:
        return self.current is None


class ReadyQueue:
    """FIFO of dispatched batches waiting for a vGPU."""

    def __init__(self):
        self._queue: Deque[Batch] = deque()

    def __len__(self):
        return len(self._queue)

    def push(self, batch: Batch) -> None:
        if self._queue:
            tail = self._queue[-1]
            if (batch.dispatch_time, batch.id) < (tail.dispatch_time, tail.id):
                raise SimulationError(f"batch {batch.id} enqueued out of dispatch order")
        self._queue.append(batch)

    def pop(self) -> Batch:
        return self._queue.popleft()

    def head(self) -> Optional[Batch]:
        return self._queue[0] if self._queue else None


class GpuServer:
    """
    V homogeneous vGPUs serving the ready queue. A batch runs synchronously on
    one vGPU for exec_latency(profile, size, longest length) and is never split.

    Args:
        profile (ModelProfile): Execution-latency surface of one vGPU
        vgpu_count (int): Number of active vGPUs
        engine (Engine): Event loop receiving the ExecDone events
        on_complete (Callable): Called with every finished Batch
    """

    def __init__(self, profile: ModelProfile, vgpu_count: int, engine: Engine,
                 on_complete: Optional[Callable[[Batch], None]] = None):
        self.profile = profile
        self.engine = engine
        self.on_complete = on_complete
        self.vgpus = [VGpu(id=i) for i in range(vgpu_count)]
        self.resource = Resource("vgpu", vgpu_count)
        self.ready = ReadyQueue()
        self.in_flight: Dict[int, Tuple[Batch, int]] = {}
        self.completed_batches = 0

    @property
    def idle_count(self) -> int:
        return self.resource.idle

    def submit(self, batch: Batch, now: SimTime) -> None:
        self.ready.push(batch)
        self.drain(now)

    def drain(self, now: SimTime) -> List[Tuple[int, SimTime]]:
        started = []
        while len(self.ready) and self.idle_count:
            started.append(self.assign_batch(self.ready.pop(), now))
        return started

    def assign_batch(self, batch: Batch, now: SimTime) -> Tuple[int, SimTime]:
        """Start `batch` on the lowest-numbered idle vGPU; returns (vgpu id, ExecDone time)."""
        vgpu = next((g for g in self.vgpus if g.idle), None)
        if vgpu is None:
            raise SimulationError(f"batch {batch.id} assigned with every vGPU busy")
        done = now + exec_latency(self.profile, batch.size, batch.longest_length)
        for request in batch.members:
            request.exec_start = now
            request.exec_done = done
        vgpu.current, vgpu.busy_until = batch.id, done
        self.resource.acquire(now)
        self.in_flight[batch.id] = (batch, vgpu.id)
        self.engine.schedule(done, EventKind.EXEC_DONE, batch.id)
        return vgpu.id, done

    def on_exec_done(self, batch_id: int, now: SimTime) -> Batch:
        batch, vgpu_id = self.in_flight.pop(batch_id)
        vgpu = self.vgpus[vgpu_id]
        vgpu.current, vgpu.busy_until = None, None
        vgpu.executed_batches += 1
        self.resource.release(now)
        self.completed_batches += 1
        if self.on_complete is not None:
            self.on_complete(batch)
        self.drain(now)
        return batch

    def check_work_conservation(self, now: SimTime) -> None:
        if len(self.ready) and self.idle_count:
            raise SimulationError(f"t={now}: {self.idle_count} vGPU(s) idle with "
                                  f"{len(self.ready)} batch(es) ready")
