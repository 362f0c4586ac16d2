from .latency import LatencyModel
from .cpu_pool import CpuPoolSpec, CpuPoolState, cpu_preprocess, cpu_pool_schedule
from .dpu import (FunctionalUnitSpec, CuSpec, DpuSpec, DpuState, CuInstance, PreprocJob,
                  VISION_STAGES, AUDIO_CU_A_STAGES, AUDIO_CU_B_STAGES, DEFAULT_TRANSFER_OVERHEAD_US,
                  merge_cus, dpu_dispatch, cu_pipeline_makespan, audio_two_cu_makespan,
                  monolithic_makespan, vision_cu, audio_cus)
from .backends import PreprocBackend, CpuBackend, DpuBackend, IdealBackend

__all__ = ["LatencyModel", "CpuPoolSpec", "CpuPoolState", "cpu_preprocess", "cpu_pool_schedule",
           "FunctionalUnitSpec", "CuSpec", "DpuSpec", "DpuState", "CuInstance", "PreprocJob",
           "VISION_STAGES", "AUDIO_CU_A_STAGES", "AUDIO_CU_B_STAGES", "DEFAULT_TRANSFER_OVERHEAD_US",
           "merge_cus", "dpu_dispatch", "cu_pipeline_makespan", "audio_two_cu_makespan",
           "monolithic_makespan", "vision_cu", "audio_cus",
           "PreprocBackend", "CpuBackend", "DpuBackend", "IdealBackend"]
