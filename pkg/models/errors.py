"""
Exception hierarchy shared by every layer
"""


class SplitLinkError(Exception):
    """Base class for all errors raised by this package"""


class ConfigurationError(SplitLinkError, ValueError):
    """Invalid configuration: unknown keys, bad values, unknown attribute names"""


class DataError(SplitLinkError, ValueError):
    """Input data that cannot be processed"""


class ValidationError(DataError):
    """A domain type invariant does not hold"""


class DimensionMismatchError(ValidationError):
    def __init__(self, expected: int, actual: int, what: str = "vector"):
        super().__init__(f"{what} length mismatch: expected {expected}, got {actual}")
        self.expected = expected
        self.actual = actual


class StructureMismatchError(ValidationError):
    """Two smashed vectors (or batches) do not share the same group structure"""

    def __init__(self, message: str, group_index: int = -1, pair_index: int = -1):
        super().__init__(message)
        self.group_index = group_index
        self.pair_index = pair_index


class CorruptionError(DataError):
    pass


class TrainingError(DataError):
    pass


class ModelFormatError(DataError):
    """Malformed or unsupported persisted model file"""
