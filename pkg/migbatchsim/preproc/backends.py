from abc import ABC, abstractmethod
from typing import List, Optional, Tuple

from ..engine.events import SimTime
from ..utils.errors import SimulationError
from ..workload.request import Request
from .cpu_pool import CpuPoolSpec, CpuPoolState, cpu_preprocess
from .dpu import DpuSpec, DpuState, dpu_dispatch


class PreprocBackend(ABC):
    """
    Preprocessing stage as seen by the simulator.

    admit() is called on arrival and returns the time of the request's next
    milestone, or None when the request has to wait. The milestone is
    PreprocDone unless handoff_pending() says the request moves on to another
    stage of the backend at that time (CuDone), where on_handoff() is called
    and returns the next milestone. on_done() is called on PreprocDone and
    returns requests that started because capacity was freed.
    """
    name: str = "preproc"
    capacity: int = 1

    @abstractmethod
    def admit(self, request: Request, now: SimTime) -> Optional[SimTime]:
        pass

    def handoff_pending(self, request: Request) -> bool:
        return False

    def on_handoff(self, request: Request, now: SimTime) -> SimTime:
        raise SimulationError(f"{self.name} backend has no internal handoffs (request {request.id})")

    def on_done(self, request: Request, now: SimTime) -> List[Tuple[Request, SimTime]]:
        return []

    @abstractmethod
    def busy_time(self, start: SimTime, end: SimTime) -> float:
        pass


class CpuBackend(PreprocBackend):
    name = "cpu"

    def __init__(self, spec: CpuPoolSpec):
        self.state = CpuPoolState(spec)
        self.capacity = spec.workers

    def admit(self, request, now):
        return cpu_preprocess(request, self.state, now)

    def on_done(self, request, now):
        started = self.state.finish(now)
        return [started] if started is not None else []

    def busy_time(self, start, end):
        return self.state.workers.busy_time(start, end)


class DpuBackend(PreprocBackend):
    """Each CU type after the first takes a request when it leaves the previous type."""
    name = "dpu"

    def __init__(self, spec: DpuSpec):
        self.state = DpuState(spec)
        self.capacity = self.state.capacity

    def admit(self, request, now):
        return dpu_dispatch(request, self.state, now)

    def handoff_pending(self, request):
        return self.state.awaiting_handoff(request.id)

    def on_handoff(self, request, now):
        if not self.state.awaiting_handoff(request.id):
            raise SimulationError(f"request {request.id} has no pending CU handoff")
        return dpu_dispatch(request, self.state, now)

    def busy_time(self, start, end):
        return self.state.busy_time(start, end)


class IdealBackend(PreprocBackend):
    """Zero-cost preprocessing: the upper-bound design point."""
    name = "ideal"

    def admit(self, request, now):
        request.preproc_start = now
        return now

    def busy_time(self, start, end):
        return 0.0
