from .request import Request, IMAGE_INPUT_LENGTH, STAGE_ORDER
from .histogram import LengthDistribution, load_length_histogram
from .traffic import (TrafficSpec, FixedImage, ConstantAudio, VariableAudio,
                      generate_arrivals, arrival_times)

__all__ = ["Request", "IMAGE_INPUT_LENGTH", "STAGE_ORDER",
           "LengthDistribution", "load_length_histogram",
           "TrafficSpec", "FixedImage", "ConstantAudio", "VariableAudio",
           "generate_arrivals", "arrival_times"]
