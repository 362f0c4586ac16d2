from dataclasses import dataclass

from ..engine.events import SimTime


@dataclass(frozen=True)
class LatencyModel:
    """
    latency(length) = base_us + per_second_us * length ** exponent

    per_second_us = 0 gives a constant latency (vision stages).
    """
    base_us: float
    per_second_us: float = 0.0
    exponent: float = 1.0

    def __post_init__(self):
        if self.base_us < 0 or self.per_second_us < 0:
            raise ValueError(f"latency terms must be non-negative, got {self}")

    @classmethod
    def constant(cls, latency_us: float) -> "LatencyModel":
        return cls(base_us=latency_us)

    def __call__(self, input_length: float) -> SimTime:
        return int(round(self.base_us + self.per_second_us * input_length ** self.exponent))
