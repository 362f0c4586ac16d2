'''
Single-threaded discrete-event loop.

1. Clock:
   - Integer microseconds, never decreasing
   - schedule() refuses events in the past
2. Dispatch:
   - Events pop in (time, sequence) order
   - One handler per EventKind; a missing handler is a logic bug
3. Trace:
   - Optional in-memory list of processed events, dumped as
     `time_us,kind,payload_id` lines
4. Checks:
   - Invariant callbacks run after every event when enabled
'''

from pathlib import Path
from typing import Callable, Dict, List, Optional, Union

import pandas as pd

from ..utils.errors import SimulationError
from ..utils.logging import get_logger
from .events import Event, EventKind, EventList, SimTime

logger = get_logger(__name__)

Handler = Callable[[Event], None]


class Engine:
    def __init__(self, record_trace: bool = False, check_invariants: bool = False):
        self.now: SimTime = 0
        self.last_event_time: SimTime = 0
        self.events = EventList()
        self.handlers: Dict[EventKind, Handler] = {}
        self.invariants: List[Callable[[SimTime], None]] = []
        self.finalizer: Optional[Callable[["Engine"], object]] = None
        self.record_trace = record_trace
        self.check_invariants = check_invariants
        self.trace: List[Event] = []
        self.processed = 0
        self._stopped = False

    def register(self, kind: EventKind, handler: Handler) -> None:
        self.handlers[kind] = handler

    def add_invariant(self, check: Callable[[SimTime], None]) -> None:
        self.invariants.append(check)

    def schedule(self, time: SimTime, kind: EventKind, payload: int = -1) -> int:
        """
        Insert an event and return its id (the tie-break sequence number).

        Raises:
            SimulationError: If time is earlier than the current clock
        """
        if time < self.now:
            raise SimulationError(f"event in past: {kind.value} at {time} < clock {self.now}")
        return self.events.push(int(time), kind, payload).sequence

    def cancel(self, event_id: int) -> None:
        self.events.cancel(event_id)

    def stop(self) -> None:
        self._stopped = True

    def _dispatch(self, event: Event) -> None:
        if event.kind is EventKind.SHUTDOWN:
            handler = self.handlers.get(event.kind)
            if handler is not None:
                handler(event)
            self.stop()
            return
        handler = self.handlers.get(event.kind)
        if handler is None:
            raise SimulationError(f"no handler registered for {event.kind.value}")
        handler(event)

    def run_until(self, t_end: SimTime):
        """
        Process every event with time <= t_end, then move the clock to t_end.

        Returns:
            Whatever the registered finalizer builds (the SimReport), or an
            empty report when no finalizer is registered
        """
        self._stopped = False
        while not self._stopped:
            next_time = self.events.peek_time()
            if next_time is None or next_time > t_end:
                break
            event = self.events.pop()
            self.now = event.time
            self.last_event_time = event.time
            if self.record_trace:
                self.trace.append(event)
            self._dispatch(event)
            self.processed += 1
            if self.check_invariants:
                for check in self.invariants:
                    check(self.now)
        self.now = max(self.now, t_end)
        logger.debug(f"run_until({t_end}) processed {self.processed} events, last at {self.last_event_time}")
        if self.finalizer is not None:
            return self.finalizer(self)
        from ..metrics.report import SimReport
        return SimReport.empty(window_us=t_end)

    def trace_lines(self) -> List[str]:
        return [event.trace_line() for event in self.trace]

    def trace_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "time_us": [e.time for e in self.trace],
            "kind": [e.kind.value for e in self.trace],
            "payload_id": [e.payload for e in self.trace],
        })

    def dump_trace(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.trace_frame().to_csv(path, index=False, lineterminator="\n")
        return path
