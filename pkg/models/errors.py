"""
Exception hierarchy for the distributed QCNN toolkit.
Value-type failures also subclass ValueError so callers can catch them generically.
"""


class QCNNError(Exception):
    """Base class for every error raised by this package."""


class CircuitError(QCNNError, ValueError):
    """Invalid gate, circuit, or binding."""


class CircuitFormatError(CircuitError):
    """Malformed circuit or fragment document."""


class CutError(QCNNError, ValueError):
    """Invalid cut placement or fragment role."""


class DimensionError(QCNNError, ValueError):
    """Shape or size mismatch between states, observables, models and data."""


class DataError(QCNNError):
    """Dataset ingestion, augmentation or splitting failure."""


class ConfigError(QCNNError):
    """Configuration file or override failed validation."""
