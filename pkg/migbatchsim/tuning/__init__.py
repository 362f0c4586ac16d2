from .mig import MigConfig, VGpuShape, MIG_SHAPES, TOTAL_GPCS, parse_mig_notation
from .profile import ModelProfile, PROFILE_COLUMNS, exec_latency, load_profile, profile_from_frame
from .curves import (Curve, CurvePoint, DEFAULT_BATCH_SIZES, DEFAULT_DELTA,
                     sweep_curve, find_batch_knee, tail_at_knee)
from .policy import (BatchingPolicy, DEFAULT_BUCKET_WIDTH_S, derive_time_queue,
                     bucket_anchor_lengths, build_batching_policy, build_static_policy)

__all__ = ["MigConfig", "VGpuShape", "MIG_SHAPES", "TOTAL_GPCS", "parse_mig_notation",
           "ModelProfile", "PROFILE_COLUMNS", "exec_latency", "load_profile", "profile_from_frame",
           "Curve", "CurvePoint", "DEFAULT_BATCH_SIZES", "DEFAULT_DELTA",
           "sweep_curve", "find_batch_knee", "tail_at_knee",
           "BatchingPolicy", "DEFAULT_BUCKET_WIDTH_S", "derive_time_queue",
           "bucket_anchor_lengths", "build_batching_policy", "build_static_policy"]
