from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from ..engine.events import SimTime, US_PER_SECOND
from .profile import ModelProfile, exec_latency

# 1..256, the batch sizes profiled per vGPU
DEFAULT_BATCH_SIZES: Tuple[int, ...] = tuple(2 ** k for k in range(9))
DEFAULT_DELTA = 0.05


@dataclass(frozen=True)
class CurvePoint:
    batch: int
    throughput: float  # queries per second
    p95_us: SimTime


@dataclass(frozen=True)
class Curve:
    """Throughput vs. tail latency at one input length."""
    length: float
    points: Tuple[CurvePoint, ...]

    def __post_init__(self):
        batches = [p.batch for p in self.points]
        if any(b1 <= b0 for b0, b1 in zip(batches, batches[1:])):
            raise ValueError(f"curve batch sizes must be strictly ascending, got {batches}")

    @property
    def batch_sizes(self) -> Tuple[int, ...]:
        return tuple(p.batch for p in self.points)

    def point(self, batch: int) -> Optional[CurvePoint]:
        for p in self.points:
            if p.batch == batch:
                return p
        return None


def sweep_curve(profile: ModelProfile, length: float,
                batch_sizes: Sequence[int] = DEFAULT_BATCH_SIZES, vgpu_count: int = 1) -> Curve:
    """
    Saturated-feed sweep: every batch runs back to back, so the tail latency
    of a point is its execution latency and throughput is B / latency.
    """
    if len(batch_sizes) == 0:
        raise ValueError("batch_sizes must not be empty")
    points = []
    for batch in batch_sizes:
        latency = exec_latency(profile, batch, length)
        points.append(CurvePoint(batch=int(batch),
                                 throughput=vgpu_count * batch * US_PER_SECOND / latency,
                                 p95_us=latency))
    return Curve(length=length, points=tuple(points))


def find_batch_knee(curve: Curve, delta: float = DEFAULT_DELTA) -> int:
    """
    Smallest profiled B whose next larger batch size improves throughput by
    less than a relative `delta`. A curve that never flattens returns its
    largest batch size.
    """
    if len(curve.points) < 2:
        raise ValueError(f"knee detection needs at least 2 curve points, got {len(curve.points)}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if any(p.throughput <= 0 for p in curve.points):
        raise ValueError("curve throughputs must be positive")
    for current, nxt in zip(curve.points, curve.points[1:]):
        if nxt.throughput < (1 + delta) * current.throughput:
            return current.batch
    return curve.points[-1].batch


def tail_at_knee(curve: Curve, knee: int) -> SimTime:
    point = curve.point(knee)
    if point is None:
        raise ValueError(f"knee {knee} is not a point of the curve {curve.batch_sizes}")
    return point.p95_us
