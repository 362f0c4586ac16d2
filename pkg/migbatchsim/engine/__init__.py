from .events import (SimTime, Event, EventKind, EventList,
                     US_PER_SECOND, US_PER_MS, seconds_to_us, us_to_seconds)
from .resources import Resource
from .loop import Engine

__all__ = ["SimTime", "Event", "EventKind", "EventList", "US_PER_SECOND", "US_PER_MS",
           "seconds_to_us", "us_to_seconds", "Resource", "Engine"]
