'''
Scenario assembly and execution.

Simulation wires one scenario into an event loop:

    Arrival -> preprocessing backend (-> CuDone ...) -> PreprocDone -> DynamicBatcher
            -> BatchTimerFired / dispatch -> GpuServer -> ExecDone -> TraceSink

ScenarioRunner adds the experiment directory around a Simulation:

    {outputs.dir}/{run_name}/
    ├── config.yaml
    ├── policy.json
    ├── report.json
    ├── trace.csv        (outputs.trace)
    ├── dispatch.csv     (outputs.dispatch_trace)
    └── events.csv       (outputs.event_trace)
'''

import math
from pathlib import Path
from typing import Dict, Iterator, Optional

import wandb

from ..batching.batcher import DynamicBatcher
from ..batching.buckets import Batch
from ..engine.events import Event, EventKind, SimTime
from ..engine.loop import Engine
from ..metrics.report import MeasurementWindow, SimReport, build_report
from ..metrics.stats import utilization
from ..metrics.trace import TraceSink, write_trace_csv
from ..preproc.backends import CpuBackend, DpuBackend, IdealBackend, PreprocBackend
from ..tuning.curves import DEFAULT_BATCH_SIZES
from ..tuning.mig import MigConfig
from ..tuning.policy import BatchingPolicy, build_batching_policy, build_static_policy
from ..tuning.profile import ModelProfile, load_profile
from ..utils.logging import flatten_metrics, get_logger
from ..server.vgpu import GpuServer
from ..workload.request import Request
from ..workload.traffic import generate_arrivals
from .config import ScenarioConfig

logger = get_logger(__name__)


def build_backend(config: ScenarioConfig) -> PreprocBackend:
    section = config.preproc
    if section.cpu is not None:
        return CpuBackend(section.cpu.to_spec())
    if section.dpu is not None:
        return DpuBackend(section.dpu.to_spec())
    return IdealBackend()


def load_model_profile(config: ScenarioConfig) -> ModelProfile:
    mig = config.mig.to_mig_config()
    return load_profile(config.model.profile, model_name=config.model.name, vgpu_shape=mig.shape)


def build_policy(config: ScenarioConfig, profile: ModelProfile, mig: MigConfig) -> BatchingPolicy:
    section = config.policy
    batch_sizes = tuple(section.batch_sizes) if section.batch_sizes else DEFAULT_BATCH_SIZES
    if section.mode == "auto":
        return build_batching_policy(profile, mig, section.bucket_width_s, section.delta, batch_sizes)
    if section.mode == "static":
        return build_static_policy(profile, mig, section.delta, batch_sizes,
                                   batch_max=section.batch_max[0] if section.batch_max else None,
                                   time_queue=section.time_queue_us)
    width = math.inf if len(section.batch_max) == 1 else section.bucket_width_s
    return BatchingPolicy(bucket_width_s=width, batch_max=tuple(section.batch_max),
                          time_queue=section.time_queue_us,
                          tail_knee=section.time_queue_us * mig.vgpu_count)


class Simulation:
    """
    One scenario on one engine.

    Args:
        config (ScenarioConfig): Validated scenario
        profile (ModelProfile): Preloaded profile (loaded from config.model.profile when None)
        policy (BatchingPolicy): Preset policy (built from config.policy when None)
    """

    def __init__(self, config: ScenarioConfig, profile: Optional[ModelProfile] = None,
                 policy: Optional[BatchingPolicy] = None):
        self.config = config
        self.duration: SimTime = config.sim.duration_us
        self.mig = config.mig.to_mig_config()
        self.profile = profile if profile is not None else load_model_profile(config)
        self.policy = policy if policy is not None else build_policy(config, self.profile, self.mig)

        self.engine = Engine(record_trace=config.outputs.event_trace,
                             check_invariants=config.sim.check_invariants)
        self.backend = build_backend(config)
        self.batcher = DynamicBatcher(self.policy, self.engine,
                                      record_dispatches=config.outputs.dispatch_trace)
        self.server = GpuServer(self.profile, self.mig.vgpu_count, self.engine, on_complete=self._on_complete)
        self.sink = TraceSink()
        self.requests: Dict[int, Request] = {}
        self.generated = 0
        self._arrivals: Iterator[Request] = generate_arrivals(config.traffic_spec())

        self.engine.register(EventKind.ARRIVAL, self._on_arrival)
        self.engine.register(EventKind.PREPROC_DONE, self._on_preproc_done)
        self.engine.register(EventKind.CU_DONE, self._on_cu_done)
        self.engine.register(EventKind.BATCH_TIMER_FIRED, self._on_batch_timer)
        self.engine.register(EventKind.EXEC_DONE, self._on_exec_done)
        self.engine.add_invariant(self.server.check_work_conservation)
        self.engine.finalizer = self._finalize

    def run(self) -> SimReport:
        self._schedule_next_arrival()
        report = self.engine.run_until(self.duration)
        logger.info(f"simulated {self.duration}us: {self.generated} arrivals, "
                    f"{len(self.sink)} completed, {self.engine.processed} events")
        return report

    ## Handlers --------------------------------------------------------------------------------------------------

    def _schedule_next_arrival(self) -> None:
        request = next(self._arrivals, None)
        if request is None:
            return
        self.requests[request.id] = request
        self.generated += 1
        self.engine.schedule(request.arrival, EventKind.ARRIVAL, request.id)

    def _on_arrival(self, event: Event) -> None:
        request = self.requests[event.payload]
        done = self.backend.admit(request, event.time)
        if done is not None:
            self._schedule_preproc(request, done)
        self._schedule_next_arrival()

    def _on_preproc_done(self, event: Event) -> None:
        request = self.requests[event.payload]
        request.preproc_done = event.time
        for started, done in self.backend.on_done(request, event.time):
            self._schedule_preproc(started, done)
        self.batcher.enqueue(request, event.time)
        self._submit(self.batcher.poll_dispatch(event.time), event.time)

    def _on_cu_done(self, event: Event) -> None:
        request = self.requests[event.payload]
        self._schedule_preproc(request, self.backend.on_handoff(request, event.time))

    def _schedule_preproc(self, request: Request, time: SimTime) -> None:
        kind = EventKind.CU_DONE if self.backend.handoff_pending(request) else EventKind.PREPROC_DONE
        self.engine.schedule(time, kind, request.id)

    def _on_batch_timer(self, event: Event) -> None:
        self._submit(self.batcher.on_timer(event.payload, event.time), event.time)

    def _on_exec_done(self, event: Event) -> None:
        self.server.on_exec_done(event.payload, event.time)

    def _submit(self, batches, now: SimTime) -> None:
        for batch in batches:
            self.server.submit(batch, now)

    def _on_complete(self, batch: Batch) -> None:
        for request in batch.members:
            self.sink.append(self.requests.pop(request.id))

    def _finalize(self, engine: Engine) -> SimReport:
        window = MeasurementWindow.from_duration(self.duration, self.config.sim.warmup_fraction)
        report = build_report(
            self.sink.records, window,
            price_model=self.config.price_model(),
            utilization={
                "vgpu": utilization(self.server.resource, window.start, window.end),
                "preproc": utilization(self.backend, window.start, window.end),
            },
            generated=self.generated,
            clamped_lengths=self.batcher.clamped_lengths,
        )
        report.extra = {"backend": self.backend.name, "mig": self.mig.notation,
                        "policy": self.policy.to_dict()}
        return report


class ScenarioRunner:
    """Runs a Simulation inside an experiment directory and writes its artifacts."""

    def __init__(self, config: ScenarioConfig, run_name: Optional[str] = None):
        self.config = config
        self.run_name = run_name or config.outputs.run_name or "run"
        self.out_dir = self._init_experiment()
        self.simulation: Optional[Simulation] = None

    def _init_experiment(self) -> Path:
        out_dir = Path(self.config.outputs.dir) / self.run_name
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "config.yaml").write_text(self.config.to_yaml())
        return out_dir

    def run(self) -> SimReport:
        self.simulation = Simulation(self.config)
        report = self.simulation.run()
        self._write_artifacts(report)
        if self.config.outputs.use_wandb:
            self._log_wandb(report)
        return report

    def _write_artifacts(self, report: SimReport) -> None:
        sim = self.simulation
        outputs = self.config.outputs
        sim.policy.save(self.out_dir / "policy.json")
        report.save(self.out_dir / "report.json")
        if outputs.trace:
            write_trace_csv(sim.sink.records, self.out_dir / "trace.csv")
        if outputs.dispatch_trace:
            sim.batcher.dispatch_frame().to_csv(self.out_dir / "dispatch.csv", index=False, lineterminator="\n")
        if outputs.event_trace:
            sim.engine.dump_trace(self.out_dir / "events.csv")
        logger.info(f"outputs written to {self.out_dir}")

    def _log_wandb(self, report: SimReport) -> None:
        run = wandb.init(project=self.config.outputs.wandb_project, name=self.run_name,
                         config=self.config.model_dump(mode="json"), reinit=True)
        metrics = {k: v for k, v in flatten_metrics(report.to_dict()).items() if isinstance(v, (int, float))}
        run.log(metrics)
        run.finish()
