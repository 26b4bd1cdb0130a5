class FeatbenchError(Exception):
    """Base class for errors raised by featbench."""


class DataError(FeatbenchError):
    """Malformed or unusable input data."""


class ConfigError(FeatbenchError):
    """Invalid pipeline configuration; the message names the offending field path."""


class TrainingError(FeatbenchError):
    """Training diverged (for example, a non-finite loss)."""
