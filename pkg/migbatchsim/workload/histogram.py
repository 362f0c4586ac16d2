from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from ..utils.errors import HistogramFormatError

HISTOGRAM_COLUMNS = ["low_s", "high_s", "count"]


@dataclass(frozen=True)
class LengthDistribution:
    """
    Piecewise-uniform distribution of input lengths.

    bin_edges has one more entry than bin_probabilities; bin i covers
    [bin_edges[i], bin_edges[i + 1]).
    """
    bin_edges: tuple
    bin_probabilities: tuple

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=np.float64)
        probs = np.asarray(self.bin_probabilities, dtype=np.float64)
        if len(probs) == 0:
            raise ValueError("no bins")
        if len(edges) != len(probs) + 1:
            raise ValueError(f"{len(edges)} edges for {len(probs)} bins")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must be strictly ascending")
        if edges[0] < 0:
            raise ValueError("bin edges must be non-negative")
        if np.any(probs < 0):
            raise ValueError("bin probabilities must be non-negative")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError(f"bin probabilities sum to {probs.sum()}, expected 1")

    @classmethod
    def from_counts(cls, edges, counts) -> "LengthDistribution":
        counts = np.asarray(counts, dtype=np.float64)
        total = counts.sum()
        if total <= 0:
            raise ValueError("all-zero mass")
        return cls(tuple(float(e) for e in edges), tuple(float(p) for p in counts / total))

    @classmethod
    def single_bin(cls, low: float, high: float) -> "LengthDistribution":
        return cls((float(low), float(high)), (1.0,))

    @property
    def support(self):
        return self.bin_edges[0], self.bin_edges[-1]

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Pick a bin by its probability, then a uniform point inside it."""
        edges = np.asarray(self.bin_edges)
        probs = np.asarray(self.bin_probabilities)
        bins = rng.choice(len(probs), size=size, p=probs)
        lengths = rng.uniform(edges[bins], edges[bins + 1])
        # uniform() may return the low edge itself; lengths must stay > 0
        return np.maximum(lengths, np.nextafter(0.0, 1.0))


def load_length_histogram(path: Union[str, Path]) -> LengthDistribution:
    """
    Read a `low_s,high_s,count` CSV and normalize it.

    Gaps between consecutive rows become zero-probability bins.

    Raises:
        HistogramFormatError: Empty file, bad header, malformed rows,
                              non-ascending edges or all-zero mass.
                              Messages carry the line number (header = line 1).
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise HistogramFormatError(f"{path}: no bins")
    except pd.errors.ParserError as e:
        raise HistogramFormatError(f"{path}: malformed row ({e})")
    if list(frame.columns) != HISTOGRAM_COLUMNS:
        raise HistogramFormatError(f"{path}:1: expected header {','.join(HISTOGRAM_COLUMNS)}, got {','.join(frame.columns)}")
    if len(frame) == 0:
        raise HistogramFormatError(f"{path}: no bins")

    numeric = frame.apply(pd.to_numeric, errors="coerce")
    edges, counts = [], []
    for row_idx, (low, high, count) in enumerate(numeric.itertuples(index=False, name=None)):
        line = row_idx + 2
        if any(pd.isna(v) for v in (low, high, count)):
            raise HistogramFormatError(f"{path}:{line}: malformed row {','.join(frame.iloc[row_idx].fillna(''))}")
        if low < 0 or high <= low:
            raise HistogramFormatError(f"{path}:{line}: bin [{low}, {high}) is not ascending")
        if count < 0:
            raise HistogramFormatError(f"{path}:{line}: negative count {count}")
        if edges:
            if low < edges[-1]:
                raise HistogramFormatError(f"{path}:{line}: edges not ascending ({low} < {edges[-1]})")
            if low > edges[-1]:
                edges.append(low)
                counts.append(0.0)
        else:
            edges.append(low)
        edges.append(high)
        counts.append(count)

    if sum(counts) <= 0:
        raise HistogramFormatError(f"{path}: all-zero mass")
    return LengthDistribution.from_counts(edges, counts)
