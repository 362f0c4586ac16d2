from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Union

import pandas as pd

from ..engine.events import SimTime
from ..workload.request import Request

TRACE_COLUMNS = ["id", "arrival_us", "preproc_done_us", "dispatched_us",
                 "exec_start_us", "exec_done_us", "bucket", "batch_size"]


@dataclass(frozen=True)
class TraceRecord:
    id: int
    arrival: SimTime
    preproc_done: SimTime
    dispatched: SimTime
    exec_start: SimTime
    exec_done: SimTime
    bucket: int
    batch_id: int
    batch_size: int

    @classmethod
    def from_request(cls, request: Request) -> "TraceRecord":
        return cls(id=request.id, arrival=request.arrival, preproc_done=request.preproc_done,
                   dispatched=request.batch_dispatched, exec_start=request.exec_start,
                   exec_done=request.exec_done, bucket=request.bucket,
                   batch_id=request.batch_id, batch_size=request.batch_size)

    @property
    def latency(self) -> SimTime:
        return self.exec_done - self.arrival

    @property
    def stages(self) -> dict:
        return {
            "preprocessing": self.preproc_done - self.arrival,
            "batching": self.dispatched - self.preproc_done,
            "execution_queueing": self.exec_start - self.dispatched,
            "execution": self.exec_done - self.exec_start,
        }

    def ordered(self) -> bool:
        return self.arrival <= self.preproc_done <= self.dispatched <= self.exec_start <= self.exec_done


class TraceSink:
    """Append-only store of completed requests."""

    def __init__(self):
        self.records: List[TraceRecord] = []

    def __len__(self):
        return len(self.records)

    def append(self, request: Request) -> None:
        self.records.append(TraceRecord.from_request(request))

    def extend(self, requests: Iterable[Request]) -> None:
        for request in requests:
            self.append(request)


def trace_frame(records: Iterable[TraceRecord]) -> pd.DataFrame:
    """Per-request trace sorted by request id, in the CSV column layout."""
    rows = sorted(((r.id, r.arrival, r.preproc_done, r.dispatched, r.exec_start,
                    r.exec_done, r.bucket, r.batch_size) for r in records))
    return pd.DataFrame(rows, columns=TRACE_COLUMNS, dtype="int64")


def write_trace_csv(records: Iterable[TraceRecord], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    trace_frame(records).to_csv(path, index=False, lineterminator="\n")
    return path


