import tempfile
from pathlib import Path

import pandas as pd
import pytest

from migbatchsim.engine import Engine, EventKind, EventList, Resource
from migbatchsim.utils.errors import SimulationError


def test_engine():
    """
    Test the event list, the event loop and resource accounting
    """

    print("Testing Engine ...")
    test_event_order()
    test_cancelled_events_skipped()
    test_cancel_only_pending()
    test_schedule_in_past_rejected()
    test_run_until_moves_clock()
    test_missing_handler()
    test_shutdown_stops_loop()
    test_invariant_callbacks()
    test_resource_accounting()
    test_event_trace_dump()


def test_event_order():
    events = EventList()
    events.push(20, EventKind.ARRIVAL, 0)
    events.push(10, EventKind.EXEC_DONE, 1)
    events.push(10, EventKind.ARRIVAL, 2)
    events.push(10, EventKind.PREPROC_DONE, 3)
    popped = [events.pop() for _ in range(4)]
    assert [e.time for e in popped] == [10, 10, 10, 20], "Events must pop in time order"
    assert [e.payload for e in popped] == [1, 2, 3, 0], "Equal times must pop in insertion order"
    assert len(events) == 0 and events.peek_time() is None

    print("Test Passed: (time, sequence) ordering")


def test_cancelled_events_skipped():
    engine = Engine(record_trace=True)
    fired = []
    engine.register(EventKind.BATCH_TIMER_FIRED, lambda e: fired.append(e.payload))
    keep = engine.schedule(5, EventKind.BATCH_TIMER_FIRED, 0)
    drop = engine.schedule(3, EventKind.BATCH_TIMER_FIRED, 1)
    engine.cancel(drop)
    engine.run_until(100)
    assert fired == [0], f"Cancelled timer fired: {fired}"
    assert engine.trace_lines() == ["5,BatchTimerFired,0"], "Cancelled events must not be traced"
    assert keep != drop

    print("Test Passed: lazy cancellation")


def test_cancel_only_pending():
    events = EventList()
    first = events.push(1, EventKind.ARRIVAL, 0).sequence
    second = events.push(2, EventKind.ARRIVAL, 1).sequence
    assert events.pop().sequence == first
    with pytest.raises(SimulationError):
        events.cancel(first)
    assert len(events) == 1, "A rejected cancel leaves the count alone"
    events.cancel(second)
    assert len(events) == 0 and events.peek_time() is None
    with pytest.raises(SimulationError):
        events.cancel(second)
    with pytest.raises(SimulationError):
        events.cancel(99)

    print("Test Passed: only pending events can be cancelled")


def test_schedule_in_past_rejected():
    engine = Engine()
    engine.register(EventKind.ARRIVAL, lambda e: engine.schedule(e.time - 1, EventKind.ARRIVAL))
    engine.schedule(10, EventKind.ARRIVAL)
    with pytest.raises(SimulationError, match="event in past"):
        engine.run_until(100)

    print("Test Passed: scheduling in the past is a SimulationError")


def test_run_until_moves_clock():
    engine = Engine()
    seen = []
    engine.register(EventKind.ARRIVAL, lambda e: seen.append(engine.now))
    for t in (0, 7, 7, 30):
        engine.schedule(t, EventKind.ARRIVAL)
    engine.schedule(31, EventKind.ARRIVAL)
    engine.run_until(30)
    assert seen == [0, 7, 7, 30], "Events at t_end must be processed"
    assert engine.now == 30 and engine.last_event_time == 30
    assert len(engine.events) == 1, "Events after t_end stay queued"

    idle = Engine()
    report = idle.run_until(1_000)
    assert idle.now == 1_000 and idle.last_event_time == 0, "The clock reaches t_end even with no events"
    assert report.qps == 0.0 and report.completed == 0

    print("Test Passed: run_until clock semantics")


def test_missing_handler():
    engine = Engine()
    engine.schedule(1, EventKind.EXEC_DONE, 4)
    with pytest.raises(SimulationError, match="no handler"):
        engine.run_until(10)

    print("Test Passed: unhandled event kind")


def test_shutdown_stops_loop():
    engine = Engine()
    seen = []
    engine.register(EventKind.ARRIVAL, lambda e: seen.append(e.time))
    engine.schedule(1, EventKind.ARRIVAL)
    engine.schedule(2, EventKind.SHUTDOWN)
    engine.schedule(3, EventKind.ARRIVAL)
    engine.run_until(10)
    assert seen == [1], "Nothing runs after Shutdown"

    print("Test Passed: Shutdown")


def test_invariant_callbacks():
    engine = Engine(check_invariants=True)
    calls = []
    engine.register(EventKind.ARRIVAL, lambda e: None)
    engine.add_invariant(calls.append)
    for t in (1, 2, 3):
        engine.schedule(t, EventKind.ARRIVAL)
    engine.run_until(10)
    assert calls == [1, 2, 3], "Invariants run after every event"

    print("Test Passed: invariant callbacks")


def test_resource_accounting():
    gpu = Resource("vgpu", 2)
    gpu.acquire(0)
    gpu.acquire(10)
    with pytest.raises(SimulationError):
        gpu.acquire(10)
    gpu.release(20)
    gpu.release(30)
    with pytest.raises(SimulationError):
        gpu.release(40)
    # 1 busy over [0,10), 2 over [10,20), 1 over [20,30)
    assert gpu.busy_time(0, 40) == 40
    assert gpu.busy_time(15, 25) == 2 * 5 + 1 * 5
    assert gpu.busy_time(30, 40) == 0
    half = Resource("cpu", 1, efficiency=0.5)
    half.acquire(0)
    half.release(100)
    assert half.busy_time(0, 100) == 50

    print("Test Passed: Resource busy-time integral")


def test_event_trace_dump():
    engine = Engine(record_trace=True)
    engine.register(EventKind.ARRIVAL, lambda e: engine.schedule(e.time + 5, EventKind.EXEC_DONE, e.payload))
    engine.register(EventKind.EXEC_DONE, lambda e: None)
    engine.schedule(0, EventKind.ARRIVAL, 9)
    engine.run_until(100)
    with tempfile.TemporaryDirectory() as d:
        path = engine.dump_trace(Path(d) / "events.csv")
        text = path.read_text()
        frame = pd.read_csv(path)
    assert text == "time_us,kind,payload_id\n0,Arrival,9\n5,ExecDone,9\n", text
    assert list(frame.columns) == ["time_us", "kind", "payload_id"]

    print("Test Passed: event trace CSV")


def main():
    from tests.testing_framework import TestingFramework
    framework = TestingFramework(test_categories={"engine": []})
    framework.register_test_case("engine", test_engine, "Event loop and resources")
    framework.run_tests()
    framework.summarize_results()


if __name__ == "__main__":
    main()
