'''
Preprocessing accelerator (DPU) model.

1. Functional units:
   - vision: Decode -> Resize -> Crop -> Normalize, all inside one CU
   - audio: Resample + MelSpectrogram in CU type A, Normalize in CU type B
     (Normalize needs every sample of a request before it can start)

2. Compute units (CUs):
   - pipelined: stage j takes the next request as soon as stage j is free,
     so successive requests overlap across stages
   - not pipelined: the CU holds one request until all its units finish

3. Dispatch:
   - single-input granularity; CU types are traversed in declared order
   - a request is handed to the next CU type when it leaves the previous
     one, so each type serves requests in the order they become ready
   - within a type, the instance that can admit the request earliest wins
     (lowest index on ties)
   - a fixed host<->DPU transfer overhead is added once per request, after
     the last CU type

Stage latencies are calibration inputs; the model never derives them.
'''

import heapq
import itertools
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Sequence, Tuple

import numpy as np

from ..engine.events import SimTime
from ..workload.request import IMAGE_INPUT_LENGTH, Request
from .latency import LatencyModel

VISION_STAGES = ("Decode", "Resize", "Crop", "Normalize")
AUDIO_CU_A_STAGES = ("Resample", "MelSpectrogram")
AUDIO_CU_B_STAGES = ("Normalize",)
KNOWN_STAGES = set(VISION_STAGES) | set(AUDIO_CU_A_STAGES) | set(AUDIO_CU_B_STAGES)

DEFAULT_TRANSFER_OVERHEAD_US = 50


class PreprocJob(NamedTuple):
    ready: SimTime
    input_length: float = IMAGE_INPUT_LENGTH


@dataclass(frozen=True)
class FunctionalUnitSpec:
    name: str
    stage_latency: LatencyModel

    def __post_init__(self):
        if self.name not in KNOWN_STAGES:
            raise ValueError(f"unknown functional unit {self.name!r}; expected one of {sorted(KNOWN_STAGES)}")


@dataclass(frozen=True)
class CuSpec:
    units: Tuple[FunctionalUnitSpec, ...]
    pipelined: bool = True
    name: str = "cu"

    def __post_init__(self):
        if len(self.units) == 0:
            raise ValueError(f"CU {self.name!r} needs at least one functional unit")

    @property
    def stage_names(self) -> Tuple[str, ...]:
        return tuple(u.name for u in self.units)

    def stage_latencies(self, input_length: float) -> List[SimTime]:
        return [u.stage_latency(input_length) for u in self.units]


@dataclass(frozen=True)
class DpuSpec:
    cu_instances: Tuple[Tuple[CuSpec, int], ...]
    transfer_overhead: SimTime = DEFAULT_TRANSFER_OVERHEAD_US

    def __post_init__(self):
        if len(self.cu_instances) == 0:
            raise ValueError("DPU needs at least one CU type")
        for cu, count in self.cu_instances:
            if count < 1:
                raise ValueError(f"CU {cu.name!r} count must be >= 1, got {count}")
        if self.transfer_overhead < 0:
            raise ValueError(f"transfer_overhead must be >= 0, got {self.transfer_overhead}")

    def check_layout(self, modality: str) -> None:
        """Vision: one pipelined CU type with all four units. Audio: CU A (Resample+Mel) then CU B (Normalize)."""
        layout = [cu.stage_names for cu, _ in self.cu_instances]
        if modality == "vision":
            if layout != [VISION_STAGES] or not self.cu_instances[0][0].pipelined:
                raise ValueError(f"vision DPU needs one pipelined CU with {VISION_STAGES}, got {layout}")
        elif modality == "audio":
            split = [AUDIO_CU_A_STAGES, AUDIO_CU_B_STAGES]
            mono = [AUDIO_CU_A_STAGES + AUDIO_CU_B_STAGES]
            if layout not in (split, mono):
                raise ValueError(f"audio DPU needs CU types {split} (or the monolithic {mono}), got {layout}")
        else:
            raise ValueError(f"unknown modality {modality!r}")


def merge_cus(cu_a: CuSpec, cu_b: CuSpec) -> CuSpec:
    """The integrated single-CU design: every unit in one CU, no inter-request overlap."""
    return CuSpec(units=cu_a.units + cu_b.units, pipelined=False, name=f"{cu_a.name}+{cu_b.name}")


class CuInstance:
    def __init__(self, cu: CuSpec, index: int):
        self.cu = cu
        self.index = index
        n_slots = len(cu.units) if cu.pipelined else 1
        self.slot_free: List[SimTime] = [0] * n_slots
        self._intervals: List[Tuple[SimTime, SimTime]] = []

    @property
    def slots(self) -> int:
        return len(self.slot_free)

    def entry_time(self, ready: SimTime) -> SimTime:
        return max(ready, self.slot_free[0])

    def admit(self, ready: SimTime, input_length: float) -> Tuple[SimTime, SimTime]:
        """Run one request through the CU; returns (start, finish)."""
        latencies = self.cu.stage_latencies(input_length)
        if not self.cu.pipelined:
            start = self.entry_time(ready)
            finish = start + sum(latencies)
            self.slot_free[0] = finish
            self._intervals.append((start, finish))
            return start, finish
        t = ready
        start = None
        for j, latency in enumerate(latencies):
            begin = max(t, self.slot_free[j])
            t = begin + latency
            self.slot_free[j] = t
            self._intervals.append((begin, t))
            if start is None:
                start = begin
        return start, t

    def busy_time(self, start: SimTime, end: SimTime) -> float:
        if not self._intervals or end <= start:
            return 0.0
        spans = np.asarray(self._intervals, dtype=np.int64)
        lo = np.clip(spans[:, 0], start, end)
        hi = np.clip(spans[:, 1], start, end)
        return float(np.sum(hi - lo))


class DpuState:
    """
    CU instances per type plus the requests handed from one type to the next.

    A request enters CU type k at the moment it leaves type k-1, so entries
    into every type happen in the order requests become ready for it.
    """

    def __init__(self, spec: DpuSpec):
        self.spec = spec
        self.instances: List[List[CuInstance]] = [
            [CuInstance(cu, i) for i in range(count)] for cu, count in spec.cu_instances
        ]
        # request id -> index of the CU type it enters next
        self.next_type: Dict[int, int] = {}

    @property
    def n_types(self) -> int:
        return len(self.instances)

    @property
    def capacity(self) -> int:
        return sum(inst.slots for group in self.instances for inst in group)

    def busy_time(self, start: SimTime, end: SimTime) -> float:
        return sum(inst.busy_time(start, end) for group in self.instances for inst in group)

    def awaiting_handoff(self, request_id: int) -> bool:
        return request_id in self.next_type

    def enter(self, type_index: int, ready: SimTime, input_length: float) -> Tuple[SimTime, SimTime]:
        """Admit a request that is ready at `ready` into one instance of a CU type; returns (start, finish)."""
        group = self.instances[type_index]
        chosen = min(group, key=lambda inst: (inst.entry_time(ready), inst.index))
        return chosen.admit(ready, input_length)


def dpu_dispatch(request: Request, dpu_state: DpuState, now: SimTime) -> SimTime:
    """
    Hand the request to the next CU type on its path, on the least-loaded instance.

    Returns:
        The time the request leaves that CU type. After the last type this is
        the completion time including the transfer overhead. Before it,
        dpu_state.awaiting_handoff(request.id) is True and the caller dispatches
        the request again at the returned time.
    """
    if request.preproc_done is not None:
        raise ValueError(f"request {request.id} is already preprocessed")
    type_index = dpu_state.next_type.pop(request.id, 0)
    start, finish = dpu_state.enter(type_index, now, request.input_length)
    if type_index == 0:
        request.preproc_start = start
    if type_index + 1 < dpu_state.n_types:
        dpu_state.next_type[request.id] = type_index + 1
        return finish
    return finish + dpu_state.spec.transfer_overhead


def _makespan(jobs: Sequence[PreprocJob], cus: Sequence[CuSpec]) -> List[SimTime]:
    state = DpuState(DpuSpec(cu_instances=tuple((cu, 1) for cu in cus), transfer_overhead=0))
    # (ready time, tie-break sequence, job index, CU type)
    pending = [(job.ready, i, i, 0) for i, job in enumerate(jobs)]
    heapq.heapify(pending)
    sequence = itertools.count(len(jobs))
    done: List[SimTime] = [0] * len(jobs)
    while pending:
        ready, _, i, type_index = heapq.heappop(pending)
        _, finish = state.enter(type_index, ready, jobs[i].input_length)
        if type_index + 1 < state.n_types:
            heapq.heappush(pending, (finish, next(sequence), i, type_index + 1))
        else:
            done[i] = finish
    return done


def cu_pipeline_makespan(requests: Sequence[PreprocJob], cu: CuSpec) -> List[SimTime]:
    """Completion time of each request through one pipelined CU instance, in submission order."""
    if not cu.pipelined:
        raise ValueError(f"CU {cu.name!r} is not pipelined")
    return _makespan(requests, [cu])


def audio_two_cu_makespan(requests: Sequence[PreprocJob], cu_a: CuSpec, cu_b: CuSpec) -> List[SimTime]:
    """Completion times with one CU A feeding one CU B; B starts a request only after A has finished it."""
    return _makespan(requests, [cu_a, cu_b])


def monolithic_makespan(requests: Sequence[PreprocJob], cu_a: CuSpec, cu_b: CuSpec) -> List[SimTime]:
    """Completion times on the integrated single CU built by merge_cus."""
    return _makespan(requests, [merge_cus(cu_a, cu_b)])


def vision_cu(decode: LatencyModel, resize: LatencyModel, crop: LatencyModel,
              normalize: LatencyModel) -> CuSpec:
    units = tuple(FunctionalUnitSpec(n, l) for n, l in zip(VISION_STAGES, (decode, resize, crop, normalize)))
    return CuSpec(units=units, pipelined=True, name="vision")


def audio_cus(resample: LatencyModel, mel: LatencyModel, normalize: LatencyModel) -> Tuple[CuSpec, CuSpec]:
    cu_a = CuSpec(units=(FunctionalUnitSpec("Resample", resample), FunctionalUnitSpec("MelSpectrogram", mel)),
                  pipelined=False, name="audio_a")
    cu_b = CuSpec(units=(FunctionalUnitSpec("Normalize", normalize),), pipelined=False, name="audio_b")
    return cu_a, cu_b
