'''
Online dynamic batcher with one FIFO queue per input-length bucket.

1. Size trigger:
   - A bucket holding batch_max requests dispatches its batch_max oldest at once
2. Timeout trigger:
   - A bucket whose oldest request has waited time_queue dispatches everything
     it holds, then fills the deficit from neighbouring buckets (merge_fill)
   - Several overdue buckets are served oldest-request first, lowest index on ties
3. Timers:
   - A bucket timer is anchored on the bucket's oldest request and re-anchored
     (cancel + reschedule) after every removal
4. Cap:
   - A batch never exceeds the batch_max of the bucket of its longest member
'''

from typing import Callable, List, Optional, Sequence

import pandas as pd

from ..engine.events import EventKind, SimTime, us_to_seconds
from ..engine.loop import Engine
from ..tuning.policy import BatchingPolicy
from ..utils.errors import SimulationError
from ..utils.logging import get_logger
from ..workload.request import Request
from .buckets import Batch, BucketQueue, bucket_index

logger = get_logger(__name__)

DISPATCH_COLUMNS = ["dispatch_time_us", "bucket", "batch_size", "longest_len_s", "trigger"]


class DynamicBatcher:
    """
    Args:
        policy (BatchingPolicy): Bucket width, per-bucket batch_max and time_queue
        engine (Engine): Event loop that owns the bucket timers
        on_dispatch (Callable): Optional callback receiving every dispatched Batch
        record_dispatches (bool): Keep a per-dispatch log for the dispatch trace
    """

    def __init__(self, policy: BatchingPolicy, engine: Engine,
                 on_dispatch: Optional[Callable[[Batch], None]] = None,
                 record_dispatches: bool = True):
        self.policy = policy
        self.engine = engine
        self.on_dispatch = on_dispatch
        self.record_dispatches = record_dispatches
        self.time_queue = policy.time_queue
        self.buckets = [BucketQueue(index=k, low=lo, high=hi, batch_max=policy.batch_max[k])
                        for k, (lo, hi) in ((k, policy.bucket_range(k)) for k in range(policy.num_buckets))]
        self.next_batch_id = 0
        self.clamped_lengths = 0
        self.dispatch_log: List[tuple] = []

    ## Bucketing -------------------------------------------------------------------------------------------------

    def bucket_for(self, length: float) -> int:
        index = bucket_index(length, self.policy.bucket_width_s)
        last = len(self.buckets) - 1
        if index <= last:
            return index
        # a length sitting exactly on the last upper edge is still in range
        if length > self.buckets[last].high:
            self.clamped_lengths += 1
            if self.clamped_lengths == 1:
                logger.warning(f"input length {length}s is beyond the last bucket "
                               f"[{self.buckets[last].low}, {self.buckets[last].high}); clamping")
            else:
                logger.debug(f"clamping input length {length}s to bucket {last}")
        return last

    def cap_of(self, bucket: int) -> int:
        return self.buckets[bucket].batch_max

    @property
    def pending(self) -> int:
        return sum(len(b) for b in self.buckets)

    ## Events ----------------------------------------------------------------------------------------------------

    def enqueue(self, request: Request, now: SimTime) -> None:
        bucket = self.buckets[self.bucket_for(request.input_length)]
        request.bucket = bucket.index
        was_empty = len(bucket) == 0
        bucket.pending.append(request)
        if was_empty:
            self._arm(bucket, now + self.time_queue)

    def on_timer(self, bucket_index: int, now: SimTime) -> List[Batch]:
        bucket = self.buckets[bucket_index]
        bucket.timer_id, bucket.timer_time = None, None
        return self.poll_dispatch(now)

    def poll_dispatch(self, now: SimTime) -> List[Batch]:
        batches: List[Batch] = []
        touched = set()

        for bucket in self.buckets:
            while len(bucket) >= bucket.batch_max:
                batches.append(self._dispatch(bucket.take(bucket.batch_max), now, "size"))
                touched.add(bucket.index)

        while True:
            overdue = [b for b in self.buckets if len(b) and now - b.oldest_ready >= self.time_queue]
            if not overdue:
                break
            bucket = min(overdue, key=lambda b: (b.oldest_ready, b.index))
            members = bucket.take(bucket.batch_max)
            touched.add(bucket.index)
            deficit = bucket.batch_max - len(members)
            if deficit > 0:
                extra = self.merge_fill(bucket.index, deficit, now)
                touched.update(r.bucket for r in extra)
                members.extend(extra)
            batches.append(self._dispatch(members, now, "timeout"))

        for index in sorted(touched):
            self._reanchor(self.buckets[index], now)
        return batches

    def merge_fill(self, bucket: int, deficit: int, now: SimTime) -> List[Request]:
        """
        Pull the oldest requests of neighbouring buckets into an undersized
        batch of `bucket`, nearest neighbour first and the lower one first at
        each distance. Every candidate is checked against the cap of the
        bucket of the batch's longest member; the first upward rejection
        closes the upward direction.
        """
        size = self.cap_of(bucket) - deficit
        top = bucket
        added: List[Request] = []
        upward_open = True
        for distance in range(1, len(self.buckets)):
            for neighbour in (bucket - distance, bucket + distance):
                if neighbour < 0 or neighbour >= len(self.buckets):
                    continue
                if neighbour > bucket and not upward_open:
                    continue
                queue = self.buckets[neighbour].pending
                while queue and size < self.cap_of(top):
                    new_top = max(top, neighbour)
                    if size + 1 > self.cap_of(new_top):
                        upward_open = False
                        break
                    added.append(queue.popleft())
                    size += 1
                    top = new_top
                if size >= self.cap_of(top):
                    return added
        return added

    ## Private Methods -------------------------------------------------------------------------------------------

    def _dispatch(self, members: List[Request], now: SimTime, trigger: str) -> Batch:
        top = max(r.bucket for r in members)
        batch = Batch(id=self.next_batch_id, members=members, dispatch_time=now, bucket=top, trigger=trigger)
        self.next_batch_id += 1
        if not 1 <= batch.size <= self.cap_of(top):
            raise SimulationError(f"batch {batch.id} of size {batch.size} breaks the cap "
                                  f"{self.cap_of(top)} of bucket {top}")
        for request in members:
            request.batch_dispatched = now
            request.batch_id = batch.id
            request.batch_size = batch.size
        if self.record_dispatches:
            self.dispatch_log.append((now, top, batch.size, batch.longest_length, trigger))
        if self.on_dispatch is not None:
            self.on_dispatch(batch)
        return batch

    def _arm(self, bucket: BucketQueue, time: SimTime) -> None:
        bucket.timer_id = self.engine.schedule(time, EventKind.BATCH_TIMER_FIRED, bucket.index)
        bucket.timer_time = time

    def _reanchor(self, bucket: BucketQueue, now: SimTime) -> None:
        wanted = None if len(bucket) == 0 else max(now, bucket.oldest_ready + self.time_queue)
        if wanted == bucket.timer_time:
            return
        if bucket.timer_id is not None:
            self.engine.cancel(bucket.timer_id)
            bucket.timer_id, bucket.timer_time = None, None
        if wanted is not None:
            self._arm(bucket, wanted)

    ## Reporting -------------------------------------------------------------------------------------------------

    def dispatch_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.dispatch_log, columns=DISPATCH_COLUMNS)
        return frame.astype({"dispatch_time_us": "int64", "bucket": "int64", "batch_size": "int64"})


def replay(policy: BatchingPolicy, ready: Sequence[tuple]) -> List[Batch]:
    """
    Drive a DynamicBatcher with (ready_time, input_length) pairs on its own
    engine and return the dispatched batches in order.
    """
    engine = Engine()
    batcher = DynamicBatcher(policy, engine)
    dispatched: List[Batch] = []
    requests = [Request(id=i, arrival=t, input_length=length) for i, (t, length) in enumerate(ready)]
    for request in requests:
        request.preproc_start = request.preproc_done = request.arrival
        engine.schedule(request.arrival, EventKind.PREPROC_DONE, request.id)

    def on_ready(event):
        batcher.enqueue(requests[event.payload], event.time)
        dispatched.extend(batcher.poll_dispatch(event.time))

    def on_timer(event):
        dispatched.extend(batcher.on_timer(event.payload, event.time))

    engine.register(EventKind.PREPROC_DONE, on_ready)
    engine.register(EventKind.BATCH_TIMER_FIRED, on_timer)
    engine.run_until(max((t for t, _ in ready), default=0) + 2 * policy.time_queue + 1)
    return dispatched
