'''
Execution-latency surface L(batch, input_length) of one model on one vGPU shape.

Profiles are calibration inputs: a `batch,length_s,latency_us` CSV holding
a dense or sparse grid. Missing cells of a sparse grid are filled along the
batch axis of their length column. Lookups are exact on grid points,
bilinear between them and clamped (with a warning) outside the grid.
'''

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Set, Tuple, Union

import numpy as np
import pandas as pd

from ..engine.events import SimTime
from ..utils.errors import ProfileFormatError
from ..utils.logging import get_logger
from .mig import VGpuShape

logger = get_logger(__name__)

PROFILE_COLUMNS = ["batch", "length_s", "latency_us"]


@dataclass
class ModelProfile:
    model_name: str
    vgpu_shape: VGpuShape
    batch_sizes: np.ndarray
    lengths: np.ndarray
    latency: np.ndarray  # shape (len(batch_sizes), len(lengths)), microseconds
    _warned: Set[Tuple[str, str]] = field(default_factory=set, repr=False, compare=False)

    def __post_init__(self):
        self.batch_sizes = np.asarray(self.batch_sizes, dtype=np.float64)
        self.lengths = np.asarray(self.lengths, dtype=np.float64)
        self.latency = np.asarray(self.latency, dtype=np.float64)
        if self.latency.shape != (len(self.batch_sizes), len(self.lengths)):
            raise ValueError(f"latency grid shape {self.latency.shape} does not match "
                             f"{len(self.batch_sizes)} batch sizes x {len(self.lengths)} lengths")
        if np.any(np.diff(self.batch_sizes) <= 0) or np.any(np.diff(self.lengths) <= 0):
            raise ValueError("profile axes must be strictly ascending")
        if np.any(self.latency <= 0):
            raise ValueError(f"{self.model_name}: latency must be strictly positive")
        if np.any(np.diff(self.latency, axis=0) < 0):
            raise ValueError(f"{self.model_name}: latency must be non-decreasing in batch size")
        if np.any(np.diff(self.latency, axis=1) < 0):
            raise ValueError(f"{self.model_name}: latency must be non-decreasing in input length")

    @property
    def is_vision(self) -> bool:
        """A single profiled length means the input size is fixed."""
        return len(self.lengths) == 1

    @property
    def max_length(self) -> float:
        return float(self.lengths[-1])

    def _warn_once(self, axis: str, direction: str, value: float) -> None:
        if (axis, direction) in self._warned:
            return
        self._warned.add((axis, direction))
        logger.warning(f"{self.model_name}: {axis}={value} is {direction} the profiled range; clamping")


def _axis_weights(profile: ModelProfile, grid: np.ndarray, x: float, axis: str):
    if len(grid) == 1:
        return 0, 0, 0.0
    if x < grid[0]:
        profile._warn_once(axis, "below", x)
        return 0, 0, 0.0
    if x > grid[-1]:
        profile._warn_once(axis, "above", x)
        return len(grid) - 1, len(grid) - 1, 0.0
    hi = int(np.searchsorted(grid, x, side="left"))
    if grid[hi] == x:
        return hi, hi, 0.0
    lo = hi - 1
    return lo, hi, (x - grid[lo]) / (grid[hi] - grid[lo])


def exec_latency(profile: ModelProfile, batch_size: float, input_length: float) -> SimTime:
    """
    Execution latency in microseconds for one batch.

    Raises:
        ValueError: If batch_size < 1 or input_length <= 0
    """
    if batch_size < 1:
        raise ValueError(f"batch size must be >= 1, got {batch_size}")
    if input_length <= 0:
        raise ValueError(f"input length must be > 0, got {input_length}")
    b0, b1, wb = _axis_weights(profile, profile.batch_sizes, batch_size, "batch")
    l0, l1, wl = _axis_weights(profile, profile.lengths, input_length, "length_s")
    grid = profile.latency
    value = ((1 - wb) * (1 - wl) * grid[b0, l0] + wb * (1 - wl) * grid[b1, l0]
             + (1 - wb) * wl * grid[b0, l1] + wb * wl * grid[b1, l1])
    return int(round(value))


def profile_from_frame(frame: pd.DataFrame, model_name: str, vgpu_shape: VGpuShape) -> ModelProfile:
    batches = np.sort(frame["batch"].unique())
    lengths = np.sort(frame["length_s"].unique())
    grid = np.full((len(batches), len(lengths)), np.nan)
    b_index = {b: i for i, b in enumerate(batches)}
    l_index = {l: j for j, l in enumerate(lengths)}
    for b, l, lat in frame[PROFILE_COLUMNS].itertuples(index=False, name=None):
        grid[b_index[b], l_index[l]] = lat
    for j in range(len(lengths)):
        known = ~np.isnan(grid[:, j])
        grid[:, j] = np.interp(batches, batches[known], grid[known, j])
    return ModelProfile(model_name=model_name, vgpu_shape=vgpu_shape,
                        batch_sizes=batches, lengths=lengths, latency=grid)


def load_profile(path: Union[str, Path], model_name: Optional[str] = None,
                 vgpu_shape: VGpuShape = VGpuShape(1, 5)) -> ModelProfile:
    """
    Read a `batch,length_s,latency_us` CSV into a ModelProfile.

    Raises:
        ProfileFormatError: Bad header, malformed or duplicate rows,
                            non-positive values, non-monotone grid
    """
    path = Path(path)
    try:
        raw = pd.read_csv(path, dtype=str, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise ProfileFormatError(f"{path}: empty profile")
    except pd.errors.ParserError as e:
        raise ProfileFormatError(f"{path}: malformed row ({e})")
    if list(raw.columns) != PROFILE_COLUMNS:
        raise ProfileFormatError(f"{path}:1: expected header {','.join(PROFILE_COLUMNS)}, got {','.join(raw.columns)}")
    if len(raw) == 0:
        raise ProfileFormatError(f"{path}: empty profile")

    frame = raw.apply(pd.to_numeric, errors="coerce")
    seen = {}
    for row_idx, (b, l, lat) in enumerate(frame.itertuples(index=False, name=None)):
        line = row_idx + 2
        if any(pd.isna(v) for v in (b, l, lat)):
            raise ProfileFormatError(f"{path}:{line}: malformed row {','.join(raw.iloc[row_idx].fillna(''))}")
        if b < 1 or b != int(b):
            raise ProfileFormatError(f"{path}:{line}: batch must be a positive integer, got {b}")
        if l <= 0 or lat <= 0:
            raise ProfileFormatError(f"{path}:{line}: length and latency must be > 0")
        if (b, l) in seen:
            raise ProfileFormatError(f"{path}:{line}: duplicate grid point (batch={int(b)}, length_s={l}), "
                                     f"first seen on line {seen[(b, l)]}")
        seen[(b, l)] = line
    try:
        return profile_from_frame(frame, model_name or path.stem, vgpu_shape)
    except ValueError as e:
        raise ProfileFormatError(f"{path}: {e}")
