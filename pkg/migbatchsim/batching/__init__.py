from .buckets import Batch, BucketQueue, bucket_index
from .batcher import DynamicBatcher, DISPATCH_COLUMNS, replay

__all__ = ["Batch", "BucketQueue", "bucket_index", "DynamicBatcher", "DISPATCH_COLUMNS", "replay"]
