'''
Run report built from the per-request trace after the simulation ends.

1. Window:
   - The first warmup_fraction of the run is excluded
   - qps counts completions inside the steady-state window
2. Latency:
   - Exact nearest-rank percentiles over requests that arrived in the window
   - Stage breakdown (preprocessing, batching, execution queueing,
     execution) whose means add up to the mean end-to-end latency
3. Efficiency:
   - Utilization per resource class
   - Cost and energy efficiency when a PriceModel is given
'''

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import numpy as np

from ..engine.events import SimTime, us_to_seconds
from .cost import PriceModel, cost_efficiency, energy_efficiency
from .stats import percentile
from .trace import TraceRecord

STAGES = ("preprocessing", "batching", "execution_queueing", "execution")
PERCENTILES = (50, 95, 99)


@dataclass(frozen=True)
class MeasurementWindow:
    start: SimTime
    end: SimTime

    @property
    def length(self) -> SimTime:
        return self.end - self.start

    @classmethod
    def from_duration(cls, duration: SimTime, warmup_fraction: float = 0.1) -> "MeasurementWindow":
        if not 0 <= warmup_fraction < 1:
            raise ValueError(f"warmup_fraction must be in [0, 1), got {warmup_fraction}")
        return cls(start=int(round(duration * warmup_fraction)), end=duration)


@dataclass
class SimReport:
    qps: float
    window_s: float
    latency_us: Dict[str, Optional[float]]
    breakdown_us: Dict[str, float]
    utilization: Dict[str, float]
    generated: int = 0
    completed: int = 0
    in_flight: int = 0
    measured: int = 0
    batches: int = 0
    mean_batch_size: float = 0.0
    clamped_lengths: int = 0
    cost_efficiency: Optional[float] = None
    energy_efficiency: Optional[float] = None
    extra: Dict[str, object] = field(default_factory=dict)

    @property
    def p50_us(self) -> Optional[float]:
        return self.latency_us["p50"]

    @property
    def p95_us(self) -> Optional[float]:
        return self.latency_us["p95"]

    @property
    def p99_us(self) -> Optional[float]:
        return self.latency_us["p99"]

    @property
    def mean_latency_us(self) -> Optional[float]:
        return self.latency_us["mean"]

    @classmethod
    def empty(cls, window_us: SimTime) -> "SimReport":
        return cls(qps=0.0, window_s=us_to_seconds(window_us),
                   latency_us={"mean": None, **{f"p{p}": None for p in PERCENTILES}},
                   breakdown_us={stage: 0.0 for stage in STAGES},
                   utilization={})

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json() + "\n")
        return path

    def summary(self) -> dict:
        """Nested sections for print_tree."""
        def fmt(v):
            return "n/a" if v is None else (f"{v:.4g}" if isinstance(v, float) else v)
        sections = {
            "Throughput": {"qps": fmt(self.qps), "window_s": fmt(self.window_s),
                           "completed": self.completed, "in_flight": self.in_flight},
            "Latency (us)": {k: fmt(v) for k, v in self.latency_us.items()},
            "Breakdown (us)": {k: fmt(v) for k, v in self.breakdown_us.items()},
            "Utilization": {k: fmt(v) for k, v in self.utilization.items()},
            "Batching": {"batches": self.batches, "mean_batch_size": fmt(self.mean_batch_size),
                         "clamped_lengths": self.clamped_lengths},
        }
        if self.cost_efficiency is not None:
            sections["Cost"] = {"queries_per_usd": fmt(self.cost_efficiency),
                                "queries_per_joule": fmt(self.energy_efficiency)}
        return sections


def build_report(records: Sequence[TraceRecord], window: MeasurementWindow,
                 price_model: Optional[PriceModel] = None,
                 utilization: Optional[Dict[str, float]] = None,
                 generated: Optional[int] = None,
                 clamped_lengths: int = 0) -> SimReport:
    """
    Raises:
        ValueError: If the steady-state window is empty
    """
    if window.length <= 0:
        raise ValueError(f"empty steady-state window [{window.start}, {window.end})")
    done = np.array([r.exec_done for r in records], dtype=np.int64)
    in_window = (done >= window.start) & (done <= window.end)
    qps = float(np.count_nonzero(in_window)) / us_to_seconds(window.length)

    measured = [r for r in records if r.arrival >= window.start and r.exec_done <= window.end]
    if measured:
        latencies = np.array([r.latency for r in measured], dtype=np.int64)
        latency = {"mean": float(latencies.mean()),
                   **{f"p{p}": float(percentile(latencies, p)) for p in PERCENTILES}}
        breakdown = {stage: float(np.mean([r.stages[stage] for r in measured])) for stage in STAGES}
    else:
        latency = {"mean": None, **{f"p{p}": None for p in PERCENTILES}}
        breakdown = {stage: 0.0 for stage in STAGES}

    batch_sizes = {r.batch_id: r.batch_size for r in records}
    generated = len(records) if generated is None else generated
    report = SimReport(
        qps=qps,
        window_s=us_to_seconds(window.length),
        latency_us=latency,
        breakdown_us=breakdown,
        utilization=dict(utilization or {}),
        generated=generated,
        completed=len(records),
        in_flight=generated - len(records),
        measured=len(measured),
        batches=len(batch_sizes),
        mean_batch_size=float(np.mean(list(batch_sizes.values()))) if batch_sizes else 0.0,
        clamped_lengths=clamped_lengths,
    )
    if price_model is not None:
        report.cost_efficiency = cost_efficiency(qps, price_model)
        report.energy_efficiency = energy_efficiency(qps, price_model) if price_model.power_w > 0 else None
    return report
