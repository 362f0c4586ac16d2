from .errors import (MigBatchSimError, SimulationError, ConfigError,
                     ProfileFormatError, HistogramFormatError)
from .logging import get_logger, configure_logging, print_tree, flatten_metrics

__all__ = ["MigBatchSimError", "SimulationError", "ConfigError",
           "ProfileFormatError", "HistogramFormatError",
           "get_logger", "configure_logging", "print_tree", "flatten_metrics"]
