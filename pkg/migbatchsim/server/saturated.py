from ..batching.buckets import Batch
from ..engine.events import EventKind, SimTime
from ..engine.loop import Engine
from ..metrics.report import SimReport, MeasurementWindow, build_report
from ..metrics.stats import utilization
from ..metrics.trace import TraceSink
from ..tuning.profile import ModelProfile
from ..workload.request import Request
from .vgpu import GpuServer


def run_saturated_feed(profile: ModelProfile, vgpu_count: int, batch_size: int, length: float,
                       duration: SimTime, warmup_fraction: float = 0.1,
                       check_invariants: bool = False) -> SimReport:
    """
    Offline-profiling mode: the ready queue never runs dry. One size-B batch
    of already preprocessed inputs is created per vGPU at start and one more
    every time a batch finishes.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    engine = Engine(check_invariants=check_invariants)
    sink = TraceSink()
    state = {"next_request": 0, "next_batch": 0}

    def make_batch(now: SimTime) -> Batch:
        members = []
        for _ in range(batch_size):
            request = Request(id=state["next_request"], arrival=now, input_length=length)
            request.preproc_start = request.preproc_done = request.batch_dispatched = now
            request.bucket, request.batch_id, request.batch_size = 0, state["next_batch"], batch_size
            members.append(request)
            state["next_request"] += 1
        batch = Batch(id=state["next_batch"], members=members, dispatch_time=now, bucket=0, trigger="feed")
        state["next_batch"] += 1
        return batch

    server = GpuServer(profile, vgpu_count, engine, on_complete=lambda b: sink.extend(b.members))

    def on_exec_done(event):
        server.ready.push(make_batch(event.time))
        server.on_exec_done(event.payload, event.time)

    engine.register(EventKind.EXEC_DONE, on_exec_done)
    engine.add_invariant(server.check_work_conservation)
    for _ in range(vgpu_count):
        server.submit(make_batch(0), 0)
    engine.run_until(duration)

    window = MeasurementWindow.from_duration(duration, warmup_fraction)
    return build_report(sink.records, window,
                        utilization={"vgpu": utilization(server.resource, window.start, window.end)},
                        generated=state["next_request"])
