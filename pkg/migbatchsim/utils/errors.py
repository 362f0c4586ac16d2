class MigBatchSimError(Exception):
    """Base class for every error raised by migbatchsim."""


class SimulationError(MigBatchSimError, RuntimeError):
    """A simulation reached a state that can only come from a logic bug."""


class ConfigError(MigBatchSimError, ValueError):
    """A scenario or sweep file failed validation."""

    def __init__(self, message: str, field_paths=None):
        super().__init__(message)
        self.field_paths = list(field_paths or [])


class ProfileFormatError(MigBatchSimError, ValueError):
    """A latency profile CSV could not be parsed."""


class HistogramFormatError(MigBatchSimError, ValueError):
    """A length histogram CSV could not be parsed."""
