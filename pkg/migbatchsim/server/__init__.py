from .vgpu import VGpu, ReadyQueue, GpuServer
from .saturated import run_saturated_feed

__all__ = ["VGpu", "ReadyQueue", "GpuServer", "run_saturated_feed"]
