'''
Open-loop traffic: Poisson arrivals of single-input requests.

Inter-arrival gaps are i.i.d. exponential with mean 1/rate. Input lengths
come from one of three sources:
   - FixedImage: every request carries IMAGE_INPUT_LENGTH
   - ConstantAudio: every request carries the same audio length
     (the fixed 2.5 s setup of the characterization runs)
   - VariableAudio: lengths sampled from a LengthDistribution

Gaps and lengths are drawn in blocks from one numpy Generator seeded by
the TrafficSpec, so the same seed always yields the same stream.
'''

from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from ..engine.events import SimTime, US_PER_SECOND
from .histogram import LengthDistribution
from .request import IMAGE_INPUT_LENGTH, Request

BLOCK_SIZE = 65536


@dataclass(frozen=True)
class FixedImage:
    length: float = IMAGE_INPUT_LENGTH


@dataclass(frozen=True)
class ConstantAudio:
    length_s: float = 2.5

    def __post_init__(self):
        if self.length_s <= 0:
            raise ValueError(f"audio length must be > 0, got {self.length_s}")


@dataclass(frozen=True)
class VariableAudio:
    distribution: LengthDistribution


InputKind = Union[FixedImage, ConstantAudio, VariableAudio]


@dataclass(frozen=True)
class TrafficSpec:
    rate_lambda: float
    duration: SimTime
    seed: int
    input_kind: InputKind = FixedImage()

    def __post_init__(self):
        if self.rate_lambda <= 0:
            raise ValueError(f"rate_lambda must be > 0, got {self.rate_lambda}")
        if self.duration <= 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")


def _lengths(kind: InputKind, rng: np.random.Generator, size: int) -> np.ndarray:
    if isinstance(kind, VariableAudio):
        return kind.distribution.sample(rng, size)
    if isinstance(kind, ConstantAudio):
        return np.full(size, kind.length_s)
    return np.full(size, kind.length)


def generate_arrivals(spec: TrafficSpec) -> Iterator[Request]:
    """
    Yield requests in arrival order until the arrival time reaches spec.duration.

    Arrival times are cumulative exponential gaps (seconds), rounded to
    whole microseconds.
    """
    rng = np.random.default_rng(spec.seed)
    mean_gap_s = 1.0 / spec.rate_lambda
    elapsed_s = 0.0
    next_id = 0
    while True:
        gaps = rng.exponential(mean_gap_s, size=BLOCK_SIZE)
        lengths = _lengths(spec.input_kind, rng, BLOCK_SIZE)
        arrivals_s = elapsed_s + np.cumsum(gaps)
        arrivals_us = np.rint(arrivals_s * US_PER_SECOND).astype(np.int64)
        for arrival, length in zip(arrivals_us, lengths):
            if arrival >= spec.duration:
                return
            yield Request(id=next_id, arrival=int(arrival), input_length=float(length))
            next_id += 1
        elapsed_s = float(arrivals_s[-1])


def arrival_times(spec: TrafficSpec) -> np.ndarray:
    """All arrival times of the stream as an int64 array (microseconds)."""
    return np.fromiter((r.arrival for r in generate_arrivals(spec)), dtype=np.int64)
