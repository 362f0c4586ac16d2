"""Discrete-event simulator of a MIG-partitioned inference server with a preprocessing accelerator and length-aware dynamic batching."""

__version__ = "0.1.0"
