"""Simulation events and the future-event list."""

import heapq
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Set, Tuple

from ..utils.errors import SimulationError

# Virtual time is an integer count of microseconds since simulation start.
SimTime = int

US_PER_SECOND = 1_000_000
US_PER_MS = 1_000


def seconds_to_us(seconds: float) -> SimTime:
    return int(round(seconds * US_PER_SECOND))


def us_to_seconds(time_us: SimTime) -> float:
    return time_us / US_PER_SECOND


class EventKind(Enum):
    ARRIVAL = "Arrival"
    PREPROC_DONE = "PreprocDone"
    CU_DONE = "CuDone"
    BATCH_TIMER_FIRED = "BatchTimerFired"
    EXEC_DONE = "ExecDone"
    SHUTDOWN = "Shutdown"


@dataclass(frozen=True)
class Event:
    time: SimTime
    sequence: int
    kind: EventKind
    payload: int = -1

    def trace_line(self) -> str:
        return f"{self.time},{self.kind.value},{self.payload}"


class EventList:
    """
    Priority queue of events ordered by (time, sequence).

    Sequence numbers are handed out on insertion, so events with equal
    time pop in insertion order. Cancelled events are dropped lazily; only
    events still pending can be cancelled.
    """

    def __init__(self):
        self._heap: List[Tuple[SimTime, int, Event]] = []
        self._next_sequence = 0
        self._pending: Set[int] = set()

    def __len__(self) -> int:
        return len(self._pending)

    def push(self, time: SimTime, kind: EventKind, payload: int = -1) -> Event:
        event = Event(time=time, sequence=self._next_sequence, kind=kind, payload=payload)
        self._next_sequence += 1
        heapq.heappush(self._heap, (event.time, event.sequence, event))
        self._pending.add(event.sequence)
        return event

    def cancel(self, sequence: int) -> None:
        """
        Raises:
            SimulationError: If the event is unknown, already fired or already cancelled
        """
        if sequence < 0 or sequence >= self._next_sequence:
            raise SimulationError(f"cannot cancel unknown event {sequence}")
        if sequence not in self._pending:
            raise SimulationError(f"cannot cancel event {sequence}: already fired or cancelled")
        self._pending.discard(sequence)

    def _drop_cancelled(self) -> None:
        while self._heap and self._heap[0][1] not in self._pending:
            heapq.heappop(self._heap)

    def peek_time(self) -> Optional[SimTime]:
        self._drop_cancelled()
        return self._heap[0][0] if self._heap else None

    def pop(self) -> Event:
        self._drop_cancelled()
        if not self._heap:
            raise SimulationError("pop from empty event list")
        event = heapq.heappop(self._heap)[-1]
        self._pending.discard(event.sequence)
        return event
