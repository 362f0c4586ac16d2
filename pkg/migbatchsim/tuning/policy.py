'''
Offline tuning of the dynamic batcher.

1. Buckets:
   - Audio lengths are split into fixed-width buckets; each bucket is tuned
     at its upper edge (the longest length it can hold)
   - Vision models get one bucket of infinite width
2. Batch_max:
   - Knee of the bucket's throughput curve, forced non-increasing across buckets
3. Time_queue:
   - Median tail latency at the knees, divided by the number of vGPUs
'''

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..engine.events import SimTime
from ..utils.logging import get_logger
from .curves import DEFAULT_BATCH_SIZES, DEFAULT_DELTA, find_batch_knee, sweep_curve, tail_at_knee
from .mig import MigConfig
from .profile import ModelProfile

logger = get_logger(__name__)

DEFAULT_BUCKET_WIDTH_S = 2.5


@dataclass(frozen=True)
class BatchingPolicy:
    bucket_width_s: float
    batch_max: Tuple[int, ...]
    time_queue: SimTime
    tail_knee: SimTime
    # tuning-time knees before the non-increasing clamp; not serialized
    raw_knees: Tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "batch_max", tuple(int(b) for b in self.batch_max))
        if not self.bucket_width_s > 0:
            raise ValueError(f"bucket_width_s must be > 0, got {self.bucket_width_s}")
        if len(self.batch_max) == 0:
            raise ValueError("batch_max must list at least one bucket")
        if any(b < 1 for b in self.batch_max):
            raise ValueError(f"batch_max must be >= 1 everywhere, got {list(self.batch_max)}")
        if any(b1 > b0 for b0, b1 in zip(self.batch_max, self.batch_max[1:])):
            raise ValueError(f"batch_max must be non-increasing with bucket index, got {list(self.batch_max)}")
        if self.time_queue <= 0:
            raise ValueError(f"time_queue must be > 0, got {self.time_queue}")

    @property
    def num_buckets(self) -> int:
        return len(self.batch_max)

    @property
    def is_single_bucket(self) -> bool:
        return math.isinf(self.bucket_width_s)

    def bucket_range(self, index: int) -> Tuple[float, float]:
        if self.is_single_bucket:
            return 0.0, math.inf
        return index * self.bucket_width_s, (index + 1) * self.bucket_width_s

    def to_dict(self) -> dict:
        return {
            "bucket_width_s": None if self.is_single_bucket else self.bucket_width_s,
            "batch_max": list(self.batch_max),
            "time_queue_us": int(self.time_queue),
            "tail_knee_us": int(self.tail_knee),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json() + "\n")
        return path

    @classmethod
    def from_dict(cls, data: dict) -> "BatchingPolicy":
        width = data.get("bucket_width_s")
        return cls(bucket_width_s=math.inf if width is None else float(width),
                   batch_max=tuple(data["batch_max"]),
                   time_queue=int(data["time_queue_us"]),
                   tail_knee=int(data.get("tail_knee_us", data["time_queue_us"])))

    @classmethod
    def from_json(cls, text: str) -> "BatchingPolicy":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path: Union[str, Path]) -> "BatchingPolicy":
        return cls.from_json(Path(path).read_text())


def derive_time_queue(tail_knee: SimTime, vgpu_count: int) -> SimTime:
    if tail_knee <= 0:
        raise ValueError(f"tail_knee must be > 0, got {tail_knee}")
    if vgpu_count < 1:
        raise ValueError(f"vgpu count must be >= 1, got {vgpu_count}")
    return int(round(tail_knee / vgpu_count))


def bucket_anchor_lengths(profile: ModelProfile, bucket_width: float) -> List[float]:
    """Upper edge of every bucket up to the longest profiled length."""
    count = max(1, math.ceil(profile.max_length / bucket_width - 1e-9))
    return [min((k + 1) * bucket_width, profile.max_length) for k in range(count)]


def _enforce_non_increasing(knees: Sequence[int]) -> Tuple[int, ...]:
    clamped = tuple(int(v) for v in np.minimum.accumulate(np.asarray(knees)))
    if clamped != tuple(knees):
        logger.warning(f"per-bucket knees {list(knees)} are not non-increasing; using {list(clamped)}")
    return clamped


def build_batching_policy(profile: ModelProfile, mig_config: MigConfig,
                          bucket_width: float = DEFAULT_BUCKET_WIDTH_S,
                          delta: float = DEFAULT_DELTA,
                          batch_sizes: Sequence[int] = DEFAULT_BATCH_SIZES) -> BatchingPolicy:
    """
    Derive Batch_max per bucket and the global Time_queue from a profile.

    Args:
        profile (ModelProfile): Execution-latency surface of one vGPU
        mig_config (MigConfig): Number of active vGPUs sets Time_queue
        bucket_width (float): Audio bucket width in seconds (ignored for vision)
        delta (float): Relative marginal-gain threshold of the knee rule
        batch_sizes (Sequence[int]): Swept batch sizes

    Returns:
        BatchingPolicy
    """
    if profile.is_vision:
        width, anchors = math.inf, [float(profile.lengths[0])]
    else:
        if not bucket_width > 0:
            raise ValueError(f"bucket_width must be > 0, got {bucket_width}")
        width, anchors = bucket_width, bucket_anchor_lengths(profile, bucket_width)

    knees, tails = [], []
    for length in anchors:
        curve = sweep_curve(profile, length, batch_sizes)
        knee = find_batch_knee(curve, delta)
        knees.append(knee)
        tails.append(tail_at_knee(curve, knee))
        logger.debug(f"{profile.model_name}: length {length:g}s knee={knee} tail={tails[-1]}us")

    tail_knee = int(round(float(np.median(tails))))
    policy = BatchingPolicy(bucket_width_s=width,
                            batch_max=_enforce_non_increasing(knees),
                            time_queue=derive_time_queue(tail_knee, mig_config.vgpu_count),
                            tail_knee=tail_knee,
                            raw_knees=tuple(knees))
    logger.info(f"{profile.model_name}: batch_max={list(policy.batch_max)} "
                f"tail_knee={policy.tail_knee}us time_queue={policy.time_queue}us")
    return policy


def build_static_policy(profile: ModelProfile, mig_config: MigConfig,
                        delta: float = DEFAULT_DELTA,
                        batch_sizes: Sequence[int] = DEFAULT_BATCH_SIZES,
                        batch_max: Optional[int] = None,
                        time_queue: Optional[SimTime] = None) -> BatchingPolicy:
    """
    Length-oblivious baseline: one queue, tuned at the longest profiled length
    unless batch_max / time_queue are given explicitly.
    """
    curve = sweep_curve(profile, profile.max_length, batch_sizes)
    knee = find_batch_knee(curve, delta) if len(curve.points) > 1 else curve.points[0].batch
    tail = tail_at_knee(curve, knee)
    return BatchingPolicy(bucket_width_s=math.inf,
                          batch_max=(batch_max if batch_max is not None else knee,),
                          time_queue=time_queue if time_queue is not None
                          else derive_time_queue(tail, mig_config.vgpu_count),
                          tail_knee=tail,
                          raw_knees=(knee,))
